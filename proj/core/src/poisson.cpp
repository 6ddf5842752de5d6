#include "lamelab/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "krylov.hpp"
#include "lamelab/operators.hpp"
#include "stencil.hpp"

namespace lamelab {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class SinePlans {
public:
    static SinePlans& instance() {
        static SinePlans p;
        return p;
    }

    fftw_plan get(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> a(n), b(n);
        fftw_plan p = fftw_plan_r2r_1d(n, a.data(), b.data(), FFTW_RODFT00,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw NumericalError("sine transform: plan creation failed for n=" + std::to_string(n));
        plans_.emplace(n, p);
        return p;
    }

    SinePlans(const SinePlans&) = delete;
    SinePlans& operator=(const SinePlans&) = delete;

private:
    SinePlans() = default;
    ~SinePlans() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

void transform_all_axes(const GridSpec& g, std::span<double> data) {
    for (int axis = 0; axis < g.dim(); ++axis) {
        const int n = g.count(axis);
        fftw_plan plan = SinePlans::instance().get(n);
        std::vector<double> in(n), out(n);
        detail::for_each_line(g, axis, [&](std::size_t off, std::size_t st) {
            for (int k = 0; k < n; ++k) in[k] = data[off + k * st];
            fftw_execute_r2r(plan, in.data(), out.data());
            for (int k = 0; k < n; ++k) data[off + k * st] = out[k];
        });
    }
}

ScalarField sine_solve(const ScalarField& rhs, double c0, double c1) {
    const GridSpec& g = rhs.grid();
    const int d = g.dim();
    std::vector<double> data(rhs.values().begin(), rhs.values().end());
    transform_all_axes(g, data);

    std::array<std::vector<double>, GridSpec::max_dim> eig;
    double norm = 1.0;
    for (int a = 0; a < d; ++a) {
        const int n = g.count(a);
        const double h = g.spacing(a);
        eig[a].resize(n);
        for (int k = 0; k < n; ++k) {
            const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * (n + 1)));
            eig[a][k] = 4.0 / (h * h) * s * s;
        }
        norm *= 2.0 * (n + 1);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = g.unflatten(i);
        double lam = 0.0;
        for (int a = 0; a < d; ++a) lam += eig[a][idx[a]];
        const double denom = c0 + c1 * lam;
        if (!(denom > 0.0)) throw NumericalError("sine transform: singular shifted operator");
        data[i] /= denom * norm;
    }
    transform_all_axes(g, data);
    ScalarField out(g);
    std::copy(data.begin(), data.end(), out.values().begin());
    return out;
}

ScalarField cg_solve(const ScalarField& rhs, double c0, double c1, const PoissonSolverSpec& spec) {
    const GridSpec& g = rhs.grid();
    double diag = c0;
    for (int a = 0; a < g.dim(); ++a) diag += c1 * 2.0 / (g.spacing(a) * g.spacing(a));
    ScalarField work(g);
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), work.values().begin());
        ScalarField lap = laplacian(work);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = c0 * in[i] - c1 * lap[i];
    };
    auto precond = [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / diag;
    };
    std::vector<double> x(g.size(), 0.0);
    detail::conjugate_gradient(apply, precond, rhs.values(), x, spec.tolerance,
                               spec.iteration_budget(g), "poisson CG");
    return ScalarField(g, std::move(x));
}

} // namespace

void PoissonSolverSpec::validate(const GridSpec& grid) const {
    if (!(tolerance > 0.0 && tolerance <= 1e-6))
        throw ValidationError("poisson.tolerance must lie in (0, 1e-6]");
    if (max_iterations != 0 && max_iterations < static_cast<long long>(grid.size()))
        throw ValidationError("poisson.max_iterations must be >= node count (" +
                              std::to_string(grid.size()) + ")");
}

int PoissonSolverSpec::iteration_budget(const GridSpec& grid) const {
    return max_iterations > 0 ? max_iterations : static_cast<int>(4 * grid.size());
}

ScalarField poisson_solve(const ScalarField& rhs, const PoissonSolverSpec& spec) {
    return shifted_solve(rhs, 0.0, 1.0, spec);
}

ScalarField shifted_solve(const ScalarField& rhs, double c0, double c1,
                          const PoissonSolverSpec& spec) {
    if (!(c0 >= 0.0) || !(c1 > 0.0))
        throw ValidationError("shifted_solve: need c0 >= 0 and c1 > 0");
    spec.validate(rhs.grid());
    if (spec.method == PoissonSolverSpec::Method::sine_transform) return sine_solve(rhs, c0, c1);
    return cg_solve(rhs, c0, c1, spec);
}

} // namespace lamelab
