#pragma once

#include <functional>
#include <vector>

#include "lamelab/grid.hpp"
#include "lamelab/model.hpp"
#include "lamelab/poisson.hpp"

namespace lamelab {

struct SchemeConfig {
    double dt = 0.01;
    double cfl_safety = 0.5;
    PoissonSolverSpec heat_solver;
    int record_stride = 1;

    /// Largest admissible dt for the explicit wave update.
    double max_stable_dt(const GridSpec& grid, const ModelSpec& model) const;
    /// Throws ValidationError when dt, cfl_safety or record_stride are out of range.
    void validate(const GridSpec& grid, const ModelSpec& model) const;
};

/// A step failed; carries the last finite state.
class StepFailure : public NumericalError {
public:
    StepFailure(const std::string& what, State last_good)
        : NumericalError(what), last_good_(std::move(last_good)) {}
    const State& last_good() const noexcept { return last_good_; }

private:
    State last_good_;
};

/// Time lives on a lattice of half steps: t = tick * dt / 2. Every coefficient
/// (alpha, kappa and g) is evaluated at (tick + shift ticks) * dt / 2, so runs that
/// differ only by a dt-aligned translation perform identical arithmetic.
class Stepper {
public:
    Stepper(const ModelSpec& model, const ForcingSymbol& symbol, const SchemeConfig& scheme);

    /// Half-tick index of a dt-aligned time; rejects misaligned times.
    long tick_of(double t, const char* what = "time") const;
    double time_of(long tick) const { return static_cast<double>(tick) * half_dt_; }

    double alpha_at(long tick) const { return model_.alpha(arg(tick)); }
    double kappa_at(long tick) const { return model_.kappa(arg(tick)); }
    double forcing_factor_at(long tick) const { return symbol_.base_factor(arg(tick)); }
    ScalarField forcing_at(long tick) const;

    /// Advances s from t = time_of(tick) to time_of(tick + 2); s.t is set to time_of(tick + 2).
    void advance(State& s, long tick) const;

    const ModelSpec& model() const noexcept { return model_; }
    const ForcingSymbol& symbol() const noexcept { return symbol_; }
    const SchemeConfig& scheme() const noexcept { return scheme_; }

private:
    double arg(long tick) const { return static_cast<double>(tick + shift_ticks_) * half_dt_; }

    const ModelSpec& model_;
    const ForcingSymbol& symbol_;
    const SchemeConfig& scheme_;
    double half_dt_;
    long shift_ticks_;
};

/// One IMEX step from s.t to s.t + dt.
State step(const State& s, const ModelSpec& model, const ForcingSymbol& symbol, const SchemeConfig& scheme);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<State> states;            ///< filled when RunOptions::keep_states
    std::vector<double> snapshot_times;
    std::vector<State> snapshots;
    State final_state;
    long steps = 0;
};

struct RunOptions {
    bool keep_states = true;
    std::vector<double> snapshot_times;   ///< dt-aligned times in [tau, T]
    /// Called at every recorded time with the state and its half-tick index.
    std::function<void(const State&, long)> observer;
};

/// Process evaluation U_G(T, tau) U_tau, recording every record_stride steps (and at T).
TrajectoryRecord run(const State& U_tau, double tau, double T, const ForcingSymbol& symbol,
                     const ModelSpec& model, const SchemeConfig& scheme, const RunOptions& opts = {});

/// Final state only; no recording.
State evolve(const State& U_tau, double tau, double T, const ForcingSymbol& symbol,
             const ModelSpec& model, const SchemeConfig& scheme);

/// |U_sigma(t+s, tau+s) U_tau - U_{T(s) sigma}(t, tau) U_tau|_{H_c}.
double check_translation_identity(const State& U_tau, double tau, double t, double s,
                                  const ForcingSymbol& g0, const ModelSpec& model,
                                  const SchemeConfig& scheme);

struct DifferenceRecord {
    std::vector<double> times;
    std::vector<double> energy;             ///< E_Z(t)
    std::vector<double> pair_norm_sum;      ///< |u1|_p + |u2|_p
    double norm_exponent = 2.0;             ///< p = 2 rho, or 2 for the zero nonlinearity
    double displacement_double_integral = 0.0;  ///< int_0^T int_s^T |u1-u2|_p^2
    double forcing_double_integral = 0.0;       ///< int_0^T int_s^T |g1-g2|^2
    double energy_double_integral = 0.0;        ///< int_0^T int_sigma^T E_Z(sigma)
    double energy_integral = 0.0;               ///< int_0^T E_Z
    double horizon = 0.0;                        ///< T - tau

    double final_energy() const { return energy.empty() ? 0.0 : energy.back(); }
    /// phi_T = C_B^2/2 * displacement term + 1/2 * forcing term.
    double phi(double C_B) const {
        return 0.5 * C_B * C_B * displacement_double_integral + 0.5 * forcing_double_integral;
    }
    /// Measured constant bounding the E_Z integrals.
    double measured_C_M() const { return energy_double_integral + energy_integral; }
};

/// E_Z = 1/2 (|z_t|^2 + (2mu+lambda)|grad z|^2 + |phi|^2).
double difference_energy(const State& z, const ModelSpec& model);

/// Co-evolves two trajectories and accumulates the difference functionals.
DifferenceRecord difference_run(const State& U1, const State& U2, double tau, double T,
                                const ForcingSymbol& g1, const ForcingSymbol& g2,
                                const ModelSpec& model, const SchemeConfig& scheme);

} // namespace lamelab
