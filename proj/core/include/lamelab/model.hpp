#pragma once

#include <string>
#include <vector>

#include "lamelab/grid.hpp"

namespace lamelab {

/// Bounded, globally Lipschitz scalar coefficient of time.
class TimeCoefficient {
public:
    enum class Kind { constant, sinusoidal, ramp_clamped };

    TimeCoefficient() = default;
    static TimeCoefficient constant(double value);
    /// mean + amplitude * sin(omega t + phase)
    static TimeCoefficient sinusoidal(double mean, double amplitude, double omega, double phase = 0.0);
    /// clamp(start + slope t, lo, hi)
    static TimeCoefficient ramp_clamped(double start, double slope, double lo, double hi);

    double operator()(double t) const;

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double lipschitz() const noexcept { return lipschitz_; }

    /// Requires 0 < lo <= hi; `name` prefixes the error message.
    void validate(const std::string& name) const;

private:
    Kind kind_ = Kind::constant;
    std::vector<double> params_{0.0};
    double lo_ = 0.0, hi_ = 0.0, lipschitz_ = 0.0;
};

const char* to_string(TimeCoefficient::Kind k);

/// Conservative nonlinearity f = grad fhat acting pointwise on R^d.
struct Nonlinearity {
    enum class Kind { zero, power };

    Kind kind = Kind::zero;
    double c = 0.0;     ///< amplitude
    double rho = 2.0;   ///< growth exponent, > 1
    double eta = 0.0;   ///< dissipation slack in the potential bounds
    double C_f = 0.0;   ///< lower-bound constant for fhat

    static Nonlinearity zero(double eta = 0.0);
    static Nonlinearity power(double c, double rho, double eta = 0.0);

    bool is_zero() const { return kind == Kind::zero || c == 0.0; }

    /// Pointwise values on a vector xi of length d.
    void value(const double* xi, int d, double* out) const;
    double potential(const double* xi, int d) const;
    /// d^2 f_i / d xi_i^2 at xi.
    double second_derivative(const double* xi, int d, int i) const;
    /// Operator norm of the Jacobian of f at xi.
    double jacobian_norm(const double* xi, int d) const;
};

const char* to_string(Nonlinearity::Kind k);

/// f(u) at every node. Throws NumericalError naming the node on overflow.
VectorField f_apply(const Nonlinearity& f, const VectorField& u);
/// Quadrature of fhat(u).
double fhat_integral(const Nonlinearity& f, const VectorField& u);
/// (sum_i int |u_i|^p)^(1/p).
double lp_norm(const VectorField& u, double p);

/// Forcing g(x, t) = profile(x) * temporal(t + shift).
class ForcingSymbol {
public:
    enum class Kind { static_, time_periodic, quasi_periodic, pulse_train };

    ForcingSymbol() = default;
    /// params: time_periodic/quasi_periodic {period}; pulse_train {period, duty}; static {}.
    ForcingSymbol(Kind kind, ScalarField profile, std::vector<double> params = {}, double shift = 0.0);

    static ForcingSymbol zero(const GridSpec& grid);

    Kind kind() const noexcept { return kind_; }
    const ScalarField& profile() const noexcept { return profile_; }
    const std::vector<double>& params() const noexcept { return params_; }
    double shift() const noexcept { return shift_; }

    /// Temporal factor of the unshifted base.
    double base_factor(double t) const;
    /// Temporal factor including the shift.
    double factor(double t) const { return base_factor(t + shift_); }
    ScalarField evaluate(double t) const;
    /// |g(t)|^2 in L^2.
    double norm_sq(double t) const;

    /// T(s) g: the same base shifted by an extra s >= 0.
    ForcingSymbol translated(double s) const;

private:
    Kind kind_ = Kind::static_;
    ScalarField profile_;
    std::vector<double> params_;
    double profile_norm_sq_ = 0.0;
    double shift_ = 0.0;
};

const char* to_string(ForcingSymbol::Kind k);

/// Everything except the forcing symbol.
struct ModelSpec {
    double mu = 1.0;
    double lambda = 0.0;
    TimeCoefficient alpha = TimeCoefficient::constant(1.0);
    TimeCoefficient kappa = TimeCoefficient::constant(1.0);
    Nonlinearity f;

    double wave_modulus() const { return 2.0 * mu + lambda; }
};

struct AssumptionCheck {
    std::string name;
    double max_violation = 0.0;
    bool passed = true;
    bool hard = false;   ///< structural failure, not a sampled margin
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    double fitted_growth_constant = 0.0;       ///< C in the gradient growth bound
    double fitted_second_derivative = 0.0;     ///< sampled max |d^2 f_i / d xi_i^2|
    bool passed() const;
};

/// Samples the coefficient bounds, potential chain, growth and curvature bounds,
/// and checks eta against the discrete first eigenvalue.
AssumptionReport validate_assumptions(const ModelSpec& model, const GridSpec& grid,
                                      int sample_count = 1000, double time_horizon = 100.0);

/// sup over unit windows starting in [0, horizon - 1] of int |g(s)|^2 ds, midpoint rule with step dt.
double lb2_norm_estimate(const ForcingSymbol& g, double horizon, double dt);

/// {T(h_j) g0}; rejects negative shifts.
std::vector<ForcingSymbol> hull_net(const ForcingSymbol& g0, const std::vector<double>& shifts);

} // namespace lamelab
