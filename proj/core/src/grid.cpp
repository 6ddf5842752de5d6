#include "lamelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stencil.hpp"

namespace lamelab {

GridSpec::GridSpec(std::span<const double> lengths, std::span<const int> interior_counts) {
    if (lengths.size() != interior_counts.size())
        throw ValidationError("grid: lengths and interior_counts differ in size");
    if (lengths.empty() || lengths.size() > static_cast<std::size_t>(max_dim))
        throw ValidationError("grid: dim must be 1, 2 or 3");
    dim_ = static_cast<int>(lengths.size());
    for (int a = 0; a < dim_; ++a) {
        if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
            throw ValidationError("grid: lengths[" + std::to_string(a) + "] must be positive");
        if (interior_counts[a] < 3)
            throw ValidationError("grid: interior_counts[" + std::to_string(a) + "] must be >= 3");
        lengths_[a] = lengths[a];
        counts_[a] = interior_counts[a];
    }
    size_ = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        strides_[a] = size_;
        size_ *= static_cast<std::size_t>(counts_[a]);
    }
    cell_volume_ = 1.0;
    for (int a = 0; a < dim_; ++a) cell_volume_ *= spacing(a);
}

GridSpec GridSpec::line(double length, int n) {
    const double l[] = {length};
    const int c[] = {n};
    return GridSpec(l, c);
}

GridSpec GridSpec::square(double length, int n) {
    const double l[] = {length, length};
    const int c[] = {n, n};
    return GridSpec(l, c);
}

GridSpec GridSpec::cube(double length, int n) {
    const double l[] = {length, length, length};
    const int c[] = {n, n, n};
    return GridSpec(l, c);
}

double GridSpec::min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim_; ++a) h = std::min(h, spacing(a));
    return h;
}

double GridSpec::volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= lengths_[a];
    return v;
}

std::array<int, GridSpec::max_dim> GridSpec::unflatten(std::size_t idx) const {
    std::array<int, max_dim> out{};
    for (int a = 0; a < dim_; ++a) {
        out[a] = static_cast<int>(idx / strides_[a]);
        idx %= strides_[a];
    }
    return out;
}

bool GridSpec::operator==(const GridSpec& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (lengths_[a] != other.lengths_[a] || counts_[a] != other.counts_[a]) return false;
    return true;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) {
        std::ostringstream os;
        os << what << ": grid mismatch (dim " << a.dim() << " vs " << b.dim();
        if (a.dim() == b.dim())
            for (int i = 0; i < a.dim(); ++i)
                os << "; axis " << i << ": n=" << a.count(i) << "/" << b.count(i)
                   << " L=" << a.length(i) << "/" << b.length(i);
        os << ")";
        throw ValidationError(os.str());
    }
}

void for_each_line(const GridSpec& grid, int axis,
                   const std::function<void(std::size_t, std::size_t)>& fn) {
    detail::for_each_line(grid, axis, fn);
}

// --- ScalarField -----------------------------------------------------------

ScalarField::ScalarField(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ValidationError("ScalarField: expected " + std::to_string(grid_.size()) +
                              " values, got " + std::to_string(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw ValidationError("ScalarField: non-finite value at node " + std::to_string(i));
}

ScalarField ScalarField::sample(const GridSpec& grid,
                                const std::function<double(const std::array<double, 3>&)>& fn) {
    ScalarField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        std::array<double, 3> x{};
        for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(a, idx[a]);
        f.values_[i] = fn(x);
    }
    return f;
}

ScalarField ScalarField::constant(const GridSpec& grid, double value) {
    ScalarField f(grid);
    std::fill(f.values_.begin(), f.values_.end(), value);
    return f;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField axpy");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// --- VectorField -----------------------------------------------------------

VectorField::VectorField(const GridSpec& grid) : grid_(grid) {
    components_.reserve(grid.dim());
    for (int i = 0; i < grid.dim(); ++i) components_.emplace_back(grid);
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
    if (components_.empty()) throw ValidationError("VectorField: no components");
    grid_ = components_.front().grid();
    if (static_cast<int>(components_.size()) != grid_.dim())
        throw ValidationError("VectorField: component count must equal grid dimension");
    for (const auto& c : components_) require_same_grid(grid_, c.grid(), "VectorField");
}

bool VectorField::all_finite() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const ScalarField& c) { return c.all_finite(); });
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs());
    return m;
}

VectorField& VectorField::operator+=(const VectorField& o) {
    require_same_grid(grid_, o.grid_, "VectorField +=");
    for (int i = 0; i < dim(); ++i) components_[i] += o.components_[i];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    require_same_grid(grid_, o.grid_, "VectorField -=");
    for (int i = 0; i < dim(); ++i) components_[i] -= o.components_[i];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : components_) c *= s;
    return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
    require_same_grid(grid_, o.grid_, "VectorField axpy");
    for (int i = 0; i < dim(); ++i) components_[i].axpy(s, o.components_[i]);
    return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

// --- State -----------------------------------------------------------------

State State::zero(const GridSpec& grid, double t) {
    return State{t, VectorField(grid), VectorField(grid), ScalarField(grid)};
}

bool State::all_finite() const {
    return std::isfinite(t) && u.all_finite() && v.all_finite() && theta.all_finite();
}

State difference(const State& a, const State& b) {
    return State{a.t, a.u - b.u, a.v - b.v, a.theta - b.theta};
}

State scaled(double s, State a) {
    a.u *= s;
    a.v *= s;
    a.theta *= s;
    return a;
}

// --- inner products --------------------------------------------------------

double l2_inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "l2_inner");
    double sum = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) sum += av[i] * bv[i];
    return sum * a.grid().cell_volume();
}

double l2_inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "l2_inner");
    double sum = 0.0;
    for (int i = 0; i < a.dim(); ++i) sum += l2_inner(a[i], b[i]);
    return sum;
}

double l2_norm_sq(const ScalarField& a) { return l2_inner(a, a); }
double l2_norm_sq(const VectorField& a) { return l2_inner(a, a); }

double grad_inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "grad_inner");
    const GridSpec& g = a.grid();
    const auto av = a.values();
    const auto bv = b.values();
    double total = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const int n = g.count(axis);
        const double inv_h2 = 1.0 / (g.spacing(axis) * g.spacing(axis));
        double sum = 0.0;
        detail::for_each_line(g, axis, [&](std::size_t off, std::size_t st) {
            double pa = 0.0, pb = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double ca = k < n ? av[off + k * st] : 0.0;
                const double cb = k < n ? bv[off + k * st] : 0.0;
                sum += (ca - pa) * (cb - pb);
                pa = ca;
                pb = cb;
            }
        });
        total += sum * inv_h2;
    }
    return total * g.cell_volume();
}

double grad_inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "grad_inner");
    double sum = 0.0;
    for (int i = 0; i < a.dim(); ++i) sum += grad_inner(a[i], b[i]);
    return sum;
}

double grad_norm_sq(const ScalarField& a) { return grad_inner(a, a); }
double grad_norm_sq(const VectorField& a) { return grad_inner(a, a); }

double div_inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "div_inner");
    const GridSpec& g = a.grid();
    const int d = g.dim();
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        // diagonal: forward-difference energy along axis i of component i
        const int n = g.count(i);
        const double inv_h2 = 1.0 / (g.spacing(i) * g.spacing(i));
        const auto av = a[i].values();
        const auto bv = b[i].values();
        double s = 0.0;
        detail::for_each_line(g, i, [&](std::size_t off, std::size_t st) {
            double pa = 0.0, pb = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double ca = k < n ? av[off + k * st] : 0.0;
                const double cb = k < n ? bv[off + k * st] : 0.0;
                s += (ca - pa) * (cb - pb);
                pa = ca;
                pb = cb;
            }
        });
        sum += s * inv_h2 * g.cell_volume();
    }
    if (d > 1) {
        std::vector<ScalarField> da, db;
        for (int i = 0; i < d; ++i) {
            da.push_back(detail::central_diff(a[i], i));
            db.push_back(detail::central_diff(b[i], i));
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) sum += l2_inner(da[j], db[i]);
    }
    return sum;
}

double div_norm_sq(const VectorField& a) { return div_inner(a, a); }

double h01_inner(const VectorField& u1, const VectorField& u2, double mu, double lambda) {
    return mu * grad_inner(u1, u2) + (lambda + mu) * div_inner(u1, u2);
}

double hc_norm_sq(const State& s, double mu, double lambda) {
    return h01_inner(s.u, s.u, mu, lambda) + l2_norm_sq(s.v) + l2_norm_sq(s.theta);
}

double first_eigenvalue(const GridSpec& grid) {
    double lam = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        const double h = grid.spacing(a);
        const double s = std::sin(std::numbers::pi * h / (2.0 * grid.length(a)));
        lam += 4.0 / (h * h) * s * s;
    }
    return lam;
}

ScalarField first_eigenfunction(const GridSpec& grid) {
    return ScalarField::sample(grid, [&](const std::array<double, 3>& x) {
        double v = 1.0;
        for (int a = 0; a < grid.dim(); ++a) v *= std::sin(std::numbers::pi * x[a] / grid.length(a));
        return v;
    });
}

} // namespace lamelab
