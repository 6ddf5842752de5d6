#pragma once

#include <vector>

#include "lamelab/grid.hpp"
#include "lamelab/integrator.hpp"
#include "lamelab/model.hpp"
#include "lamelab/poisson.hpp"

namespace lamelab {

/// Multiplier field q(x)_i = 2 x_i / L_i - 1, equal to the outward normal
/// component on the faces normal to axis i.
struct QField {
    VectorField q;
    double Mq = 0.0;          ///< max{|Dq|, div q, |grad q|} = sum_i 2/L_i
    double q_max = 0.0;       ///< sup |q| = sqrt(d)
    std::vector<double> slope;  ///< dq_i/dx_i = 2/L_i
    const char* Mq_attained_by = "div q";
};

QField build_q(const GridSpec& grid);

struct Energies {
    double E = 0.0;    ///< kinetic + Lame + thermal + potential
    double E_c = 0.0;  ///< same with (2mu+lambda)|div u|^2 as the elastic term
};

Energies energy(const State& s, const ModelSpec& model);

struct Multipliers {
    ScalarField phi;     ///< -lap phi = div u
    ScalarField phi_t;   ///< -lap phi_t = div v
    ScalarField w;       ///< -lap w = theta
};

Multipliers multiplier_solve(const State& s, const PoissonSolverSpec& spec = {});

struct Functionals {
    double F1 = 0.0;  ///< (u, v)
    double F2 = 0.0;  ///< (theta, phi_t)
    double F3 = 0.0;  ///< q-weighted momentum functional
};

Functionals functionals(const State& s, const Multipliers& m, const QField& q);

/// All per-time quantities needed by the inequality ledger.
struct DiagnosticRow {
    double time = 0.0;
    double E = 0.0, E_c = 0.0;
    double F1 = 0.0, F2 = 0.0, F3 = 0.0;
    double v_sq = 0.0;            ///< |u_t|^2
    double div_sq = 0.0;          ///< |div u|^2 (the Lame-consistent form)
    double grad_theta_sq = 0.0;
    double theta_sq = 0.0;
    double boundary_div_sq = 0.0; ///< boundary integral of |div u|^2
    double fhat = 0.0;
    double g_norm_sq = 0.0;
    double hc_norm_sq = 0.0;
};

DiagnosticRow diagnose(const State& s, double g_norm_sq, const ModelSpec& model, const QField& q,
                       const PoissonSolverSpec& spec = {});

/// Rows for every recorded state; forcing is evaluated on the same tick lattice as the run.
std::vector<DiagnosticRow> diagnose_trajectory(const TrajectoryRecord& rec, const ForcingSymbol& symbol,
                                               const ModelSpec& model, const SchemeConfig& scheme);

/// Per-step residual of the discrete energy identity
/// (E^{n+1} - E^n)/dt + kappa |grad theta^{n+1/2}|^2 - (g^{n+1/2}, theta^{n+1/2}).
std::vector<double> energy_identity_residuals(const State& U_tau, double tau, double T,
                                              const ForcingSymbol& symbol, const ModelSpec& model,
                                              const SchemeConfig& scheme);

/// Centered differences on a possibly nonuniform grid, second-order one-sided at the ends.
/// Fewer than three samples yield NaN.
std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y);

} // namespace lamelab
