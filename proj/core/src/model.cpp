#include "lamelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace lamelab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

double norm(const double* xi, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += xi[i] * xi[i];
    return std::sqrt(s);
}

} // namespace

// --- TimeCoefficient ---------------------------------------------------------

TimeCoefficient TimeCoefficient::constant(double value) {
    TimeCoefficient c;
    c.kind_ = Kind::constant;
    c.params_ = {value};
    c.lo_ = c.hi_ = value;
    c.lipschitz_ = 0.0;
    return c;
}

TimeCoefficient TimeCoefficient::sinusoidal(double mean, double amplitude, double omega, double phase) {
    TimeCoefficient c;
    c.kind_ = Kind::sinusoidal;
    c.params_ = {mean, amplitude, omega, phase};
    c.lo_ = mean - std::abs(amplitude);
    c.hi_ = mean + std::abs(amplitude);
    c.lipschitz_ = std::abs(amplitude * omega);
    return c;
}

TimeCoefficient TimeCoefficient::ramp_clamped(double start, double slope, double lo, double hi) {
    if (!(lo <= hi)) throw ValidationError("ramp_clamped: lo must not exceed hi");
    TimeCoefficient c;
    c.kind_ = Kind::ramp_clamped;
    c.params_ = {start, slope, lo, hi};
    c.lo_ = lo;
    c.hi_ = hi;
    c.lipschitz_ = std::abs(slope);
    return c;
}

double TimeCoefficient::operator()(double t) const {
    switch (kind_) {
    case Kind::constant:
        return params_[0];
    case Kind::sinusoidal:
        return params_[0] + params_[1] * std::sin(params_[2] * t + params_[3]);
    case Kind::ramp_clamped:
        return std::clamp(params_[0] + params_[1] * t, params_[2], params_[3]);
    }
    return 0.0;
}

void TimeCoefficient::validate(const std::string& name) const {
    for (double p : params_)
        if (!std::isfinite(p)) throw ValidationError(name + ": non-finite parameter");
    if (!(lo_ > 0.0)) throw ValidationError(name + ": lower bound must be positive, got " + fmt(lo_));
    if (!(lo_ <= hi_)) throw ValidationError(name + ": lower bound exceeds upper bound");
    if (kind_ == Kind::sinusoidal && !(params_[2] >= 0.0))
        throw ValidationError(name + ": omega must be nonnegative");
}

const char* to_string(TimeCoefficient::Kind k) {
    switch (k) {
    case TimeCoefficient::Kind::constant: return "constant";
    case TimeCoefficient::Kind::sinusoidal: return "sinusoidal";
    case TimeCoefficient::Kind::ramp_clamped: return "ramp-clamped";
    }
    return "?";
}

// --- Nonlinearity ------------------------------------------------------------

Nonlinearity Nonlinearity::zero(double eta) {
    Nonlinearity f;
    f.kind = Kind::zero;
    f.c = 0.0;
    f.eta = eta;
    return f;
}

Nonlinearity Nonlinearity::power(double c, double rho, double eta) {
    if (!(c >= 0.0)) throw ValidationError("nonlinearity.c must be >= 0");
    if (!(rho > 1.0)) throw ValidationError("nonlinearity.rho must be > 1");
    Nonlinearity f;
    f.kind = Kind::power;
    f.c = c;
    f.rho = rho;
    f.eta = eta;
    f.C_f = 0.0;  // fhat >= 0
    return f;
}

void Nonlinearity::value(const double* xi, int d, double* out) const {
    if (is_zero()) {
        std::fill(out, out + d, 0.0);
        return;
    }
    const double r = norm(xi, d);
    const double s = r > 0.0 ? c * std::pow(r, rho - 1.0) : 0.0;
    for (int i = 0; i < d; ++i) out[i] = s * xi[i];
}

double Nonlinearity::potential(const double* xi, int d) const {
    if (is_zero()) return 0.0;
    return c * std::pow(norm(xi, d), rho + 1.0) / (rho + 1.0);
}

double Nonlinearity::second_derivative(const double* xi, int d, int i) const {
    if (is_zero()) return 0.0;
    const double r = norm(xi, d);
    if (r == 0.0) return 0.0;
    const double x = xi[i];
    return c * (rho - 1.0) * std::pow(r, rho - 3.0) * x * (3.0 + (rho - 3.0) * x * x / (r * r));
}

double Nonlinearity::jacobian_norm(const double* xi, int d) const {
    if (is_zero()) return 0.0;
    return c * rho * std::pow(norm(xi, d), rho - 1.0);
}

const char* to_string(Nonlinearity::Kind k) {
    return k == Nonlinearity::Kind::zero ? "zero" : "power";
}

VectorField f_apply(const Nonlinearity& f, const VectorField& u) {
    const GridSpec& g = u.grid();
    VectorField out(g);
    if (f.is_zero()) return out;
    const int d = g.dim();
    double xi[GridSpec::max_dim], val[GridSpec::max_dim];
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (int i = 0; i < d; ++i) xi[i] = u[i][n];
        f.value(xi, d, val);
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(val[i]))
                throw NumericalError("f_apply: overflow at node " + std::to_string(n));
            out[i][n] = val[i];
        }
    }
    return out;
}

double fhat_integral(const Nonlinearity& f, const VectorField& u) {
    if (f.is_zero()) return 0.0;
    const GridSpec& g = u.grid();
    const int d = g.dim();
    double xi[GridSpec::max_dim];
    double sum = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (int i = 0; i < d; ++i) xi[i] = u[i][n];
        const double p = f.potential(xi, d);
        if (!std::isfinite(p))
            throw NumericalError("fhat_integral: overflow at node " + std::to_string(n));
        sum += p;
    }
    return sum * g.cell_volume();
}

double lp_norm(const VectorField& u, double p) {
    double sum = 0.0;
    for (int i = 0; i < u.dim(); ++i)
        for (double x : u[i].values()) sum += std::pow(std::abs(x), p);
    return std::pow(sum * u.grid().cell_volume(), 1.0 / p);
}

// --- ForcingSymbol -----------------------------------------------------------

ForcingSymbol::ForcingSymbol(Kind kind, ScalarField profile, std::vector<double> params, double shift)
    : kind_(kind), profile_(std::move(profile)), params_(std::move(params)), shift_(shift) {
    if (!(shift_ >= 0.0) || !std::isfinite(shift_))
        throw ValidationError("forcing shift must be a finite value >= 0");
    const std::size_t need = kind_ == Kind::static_ ? 0 : kind_ == Kind::pulse_train ? 2 : 1;
    if (params_.size() != need)
        throw ValidationError(std::string("forcing kind ") + to_string(kind_) + " expects " +
                              std::to_string(need) + " temporal parameter(s)");
    if (need >= 1 && !(params_[0] > 0.0)) throw ValidationError("forcing period must be positive");
    if (need == 2 && !(params_[1] > 0.0 && params_[1] <= 1.0))
        throw ValidationError("forcing duty must lie in (0, 1]");
    if (!profile_.all_finite()) throw ValidationError("forcing profile must be finite");
    profile_norm_sq_ = l2_norm_sq(profile_);
}

ForcingSymbol ForcingSymbol::zero(const GridSpec& grid) {
    return ForcingSymbol(Kind::static_, ScalarField(grid));
}

double ForcingSymbol::base_factor(double t) const {
    switch (kind_) {
    case Kind::static_:
        return 1.0;
    case Kind::time_periodic:
        return std::sin(two_pi * t / params_[0]);
    case Kind::quasi_periodic:
        return 0.5 * (std::sin(two_pi * t / params_[0]) +
                      std::sin(two_pi * t / (params_[0] * std::numbers::sqrt2)));
    case Kind::pulse_train: {
        const double phase = t / params_[0] - std::floor(t / params_[0]);
        return phase < params_[1] ? 1.0 : 0.0;
    }
    }
    return 0.0;
}

ScalarField ForcingSymbol::evaluate(double t) const {
    ScalarField g = profile_;
    g *= factor(t);
    return g;
}

double ForcingSymbol::norm_sq(double t) const {
    const double a = factor(t);
    return a * a * profile_norm_sq_;
}

ForcingSymbol ForcingSymbol::translated(double s) const {
    if (!(s >= 0.0)) throw ValidationError("translation shift must be >= 0");
    ForcingSymbol out = *this;
    out.shift_ = shift_ + s;
    return out;
}

const char* to_string(ForcingSymbol::Kind k) {
    switch (k) {
    case ForcingSymbol::Kind::static_: return "static";
    case ForcingSymbol::Kind::time_periodic: return "time-periodic";
    case ForcingSymbol::Kind::quasi_periodic: return "quasi-periodic";
    case ForcingSymbol::Kind::pulse_train: return "pulse-train";
    }
    return "?";
}

double lb2_norm_estimate(const ForcingSymbol& g, double horizon, double dt) {
    if (!(horizon >= 2.0)) throw ValidationError("lb2_norm_estimate: horizon must be >= 2");
    if (!(dt > 0.0 && dt <= 0.01)) throw ValidationError("lb2_norm_estimate: dt must lie in (0, 0.01]");
    const long m = std::lround(1.0 / dt);
    const long total = std::lround(horizon / dt);
    std::vector<double> a(total);
    for (long j = 0; j < total; ++j) a[j] = g.norm_sq((j + 0.5) * dt);
    double best = 0.0;
    for (long start = 0; start + m <= total; ++start) {
        double s = 0.0;
        for (long j = start; j < start + m; ++j) s += a[j];
        best = std::max(best, s * dt);
    }
    return best;
}

std::vector<ForcingSymbol> hull_net(const ForcingSymbol& g0, const std::vector<double>& shifts) {
    std::vector<ForcingSymbol> out;
    out.reserve(shifts.size());
    for (std::size_t j = 0; j < shifts.size(); ++j) {
        if (!(shifts[j] >= 0.0))
            throw ValidationError("hull_net: shifts[" + std::to_string(j) + "] is negative");
        out.push_back(g0.translated(shifts[j]));
    }
    return out;
}

// --- assumption validation ---------------------------------------------------

bool AssumptionReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

namespace {

AssumptionCheck check_coefficient(const std::string& name, const TimeCoefficient& c, int samples,
                                  double horizon) {
    AssumptionCheck chk{name, 0.0, true, false, ""};
    if (!(c.lo() > 0.0)) {
        chk.passed = false;
        chk.hard = true;
        chk.max_violation = -c.lo();
        chk.detail = "lower bound " + fmt(c.lo()) + " is not positive";
        return chk;
    }
    double worst = 0.0;
    for (int j = 0; j <= samples; ++j) {
        const double t = horizon * j / samples;
        const double v = c(t);
        worst = std::max({worst, c.lo() - v, v - c.hi()});
    }
    // Lipschitz probe on a 1e3-point grid
    const int probes = 1000;
    double lip = 0.0;
    for (int j = 0; j < probes; ++j) {
        const double t0 = horizon * j / probes, t1 = horizon * (j + 1) / probes;
        lip = std::max(lip, std::abs(c(t1) - c(t0)) / (t1 - t0));
    }
    worst = std::max(worst, lip - c.lipschitz() * (1.0 + 1e-12));
    chk.max_violation = std::max(0.0, worst);
    chk.passed = chk.max_violation <= 1e-9;
    chk.detail = "range [" + fmt(c.lo()) + ", " + fmt(c.hi()) + "], sampled Lipschitz " + fmt(lip);
    return chk;
}

} // namespace

AssumptionReport validate_assumptions(const ModelSpec& m, const GridSpec& grid, int sample_count,
                                      double time_horizon) {
    if (sample_count < 1000) throw ValidationError("validate_assumptions: sample_count must be >= 1000");
    AssumptionReport rep;
    const int d = grid.dim();
    const Nonlinearity& f = m.f;

    {
        AssumptionCheck chk{"lame_parameters", 0.0, true, true, ""};
        if (!(m.mu > 0.0) || !(m.wave_modulus() > 0.0)) {
            chk.passed = false;
            chk.max_violation = std::max(-m.mu, -m.wave_modulus());
            chk.detail = "need mu > 0 and 2mu+lambda > 0";
        }
        rep.checks.push_back(chk);
    }
    rep.checks.push_back(check_coefficient("alpha_bounds", m.alpha, sample_count, time_horizon));
    rep.checks.push_back(check_coefficient("kappa_bounds", m.kappa, sample_count, time_horizon));

    // eta range against the discrete first eigenvalue
    {
        const double lam1 = first_eigenvalue(grid);
        const double upper = std::min(lam1 * m.wave_modulus() / 2.0, lam1);
        AssumptionCheck chk{"eta_range", 0.0, true, true, ""};
        chk.detail = "eta=" + fmt(f.eta) + " must lie in (0, " + fmt(upper) + ")";
        if (!(f.eta > 0.0 && f.eta < upper)) {
            chk.passed = false;
            chk.max_violation = f.eta <= 0.0 ? -f.eta : f.eta - upper;
        }
        rep.checks.push_back(chk);
    }

    // Deterministic samples: log-uniform magnitudes in [1e-3, 1e3], random directions.
    std::mt19937_64 rng(0x5eed);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::array<double, 3>> xs(sample_count);
    for (auto& x : xs) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            x[i] = 2.0 * unit() - 1.0;
            r2 += x[i] * x[i];
        }
        const double mag = std::pow(10.0, -3.0 + 6.0 * unit());
        const double s = r2 > 0.0 ? mag / std::sqrt(r2) : 0.0;
        for (int i = 0; i < d; ++i) x[i] *= s;
    }

    {
        AssumptionCheck chk{"potential_chain", 0.0, true, false, ""};
        double worst = 0.0;
        for (const auto& x : xs) {
            double fv[3];
            f.value(x.data(), d, fv);
            double r2 = 0.0, fdot = 0.0;
            for (int i = 0; i < d; ++i) {
                r2 += x[i] * x[i];
                fdot += fv[i] * x[i];
            }
            const double fh = f.potential(x.data(), d);
            const double lower = -f.C_f - 0.5 * f.eta * r2;
            const double upper = fdot + 0.5 * f.eta * r2;
            const double scale = 1.0 + std::abs(fh) + std::abs(fdot);
            worst = std::max({worst, (lower - fh) / scale, (fh - upper) / scale});
        }
        chk.max_violation = std::max(0.0, worst);
        chk.passed = chk.max_violation <= 1e-9;
        chk.detail = "C_f=" + fmt(f.C_f);
        rep.checks.push_back(chk);
    }

    {
        // f = grad fhat by central differences of the potential
        AssumptionCheck chk{"conservative", 0.0, true, false, ""};
        double worst = 0.0;
        for (const auto& x : xs) {
            double fv[3];
            f.value(x.data(), d, fv);
            const double r = norm(x.data(), d);
            const double h = 1e-6 * std::max(1.0, r);
            double fn = 0.0, err = 0.0;
            for (int i = 0; i < d; ++i) {
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (f.potential(xp.data(), d) - f.potential(xm.data(), d)) / (2 * h);
                err = std::max(err, std::abs(fd - fv[i]));
                fn = std::max(fn, std::abs(fv[i]));
            }
            worst = std::max(worst, err / std::max(1.0, fn));
        }
        chk.max_violation = worst;
        chk.passed = worst <= 1e-6;
        chk.detail = "max relative finite-difference mismatch " + fmt(worst);
        rep.checks.push_back(chk);
    }

    {
        AssumptionCheck chk{"gradient_growth", 0.0, true, false, ""};
        double C = 0.0;
        for (const auto& x : xs) {
            double s = 1.0;
            for (int i = 0; i < d; ++i) s += std::pow(std::abs(x[i]), f.rho - 1.0);
            C = std::max(C, f.jacobian_norm(x.data(), d) / s);
        }
        rep.fitted_growth_constant = C;
        chk.detail = "fitted C=" + fmt(C);
        if (!std::isfinite(C)) {
            chk.passed = false;
            chk.max_violation = INFINITY;
        }
        if (d >= 3 && !f.is_zero() && !(f.rho < static_cast<double>(d) / (d - 2))) {
            chk.passed = false;
            chk.hard = true;
            chk.max_violation = f.rho - static_cast<double>(d) / (d - 2);
            chk.detail = "rho=" + fmt(f.rho) + " violates rho < d/(d-2)=" + fmt(static_cast<double>(d) / (d - 2));
        }
        rep.checks.push_back(chk);
    }

    {
        AssumptionCheck chk{"second_derivative", 0.0, true, false, ""};
        double C2 = 0.0;
        for (const auto& x : xs)
            for (int i = 0; i < d; ++i) C2 = std::max(C2, std::abs(f.second_derivative(x.data(), d, i)));
        rep.fitted_second_derivative = C2;
        chk.detail = "sampled max " + fmt(C2);
        // The radial power is homogeneous of degree rho - 2 in its second derivatives,
        // so the bound is uniform only for rho = 2.
        if (!f.is_zero() && f.rho != 2.0) {
            chk.passed = false;
            chk.hard = true;
            chk.max_violation = C2;
            chk.detail += "; unbounded for rho != 2";
        }
        rep.checks.push_back(chk);
    }
    return rep;
}

} // namespace lamelab
