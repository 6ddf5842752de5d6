#pragma once

#include <string>
#include <vector>

#include "lamelab/diagnostics.hpp"
#include "lamelab/model.hpp"
#include "lamelab/operator_constants.hpp"

namespace lamelab {

struct YoungConstants {
    double C_delta = 0.0;        ///< boundary trace pairing
    double C_eps_prime = 0.0;    ///< temperature / divergence pairing
    double C_eps_dprime = 0.0;   ///< multiplier / nonlinearity pairing
    double C_eps_tprime = 0.0;   ///< q-multiplier / temperature pairing
    double C_eps_delta = 0.0;    ///< sum entering the F2 estimate
    double C33 = 0.0;            ///< temperature coefficient of the F1 estimate
    double M2_carry = 0.0;       ///< additive constant dropped by the F2 pairing
};

/// Every named constant of the absorbing-set argument, with the algebra that produced it.
struct ConstantLedger {
    // inputs
    int dim = 1;
    double mu = 0.0, lambda = 0.0;
    double alpha0 = 0.0, alpha1 = 0.0, kappa0 = 0.0, kappa1 = 0.0;
    double lambda1 = 0.0;
    double eta = 0.0, C_f = 0.0;
    double Mq = 0.0, q_max = 0.0;
    double k = 0.0, k_c = 0.0, k_g = 0.0, C_tr = 0.0;
    bool k_imposed = false;
    double r = 0.0;                    ///< radius used for the nonlinearity fit
    double C_inf = 0.0;                ///< max_x |u(x)|^2 / |grad u|^2
    double M1 = 0.0, Mbar1 = 0.0, M2 = 0.0;
    double g0_lb2_sq = 0.0;            ///< |g0|^2 in the translation-bounded norm

    // fixed point and derived algebra
    double A = 0.0, B = 0.0, D = 0.0;
    double P = 0.0;
    int P_iterations = 0;
    double delta = 0.0, epsilon = 0.0;
    double N0 = 0.0, N1 = 0.0, N2 = 0.0, N3 = 0.0;
    double N0_min = 0.0;               ///< smallest N0 satisfying the temperature inequality
    double N0_equivalence = 0.0;       ///< N0 needed for c1 >= N0 / 2
    YoungConstants young;
    double xi = 0.0, C_tilde = 0.0, M_tilde = 0.0;

    // equivalence and absorbing radius
    double beta0 = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, S = 0.0;
    double c1 = 0.0, c2 = 0.0;
    double xi1 = 0.0, C_tilde1 = 0.0, M_tilde1 = 0.0;
    double rho0 = 0.0;

    /// Left sides minus right sides of the three closed-form identities.
    std::vector<double> identity_residuals() const;
    /// The four coefficient inequalities; all must be >= 0.
    std::vector<double> coefficient_margins() const;
    /// Temperature coefficient of dL/dt times lambda1, minus max{Mq/2, 1, (2mu+lambda)/6}.
    double temperature_margin(double N0_trial) const;
};

struct LedgerInputs {
    ModelSpec model;
    OperatorConstants operators;
    QField q;
    GridSpec grid;
    double g0_lb2_sq = 0.0;
    double r = 1.0;              ///< initial radius for the nonlinearity fit
    bool refit_radius = true;    ///< one extra pass with r = 2 rho0
    double imposed_k = 0.0;      ///< > 0 replaces operators.k
};

/// Fills every derived field of a ledger whose input fields (mu .. g0_lb2_sq) are set.
ConstantLedger complete_ledger(ConstantLedger inputs);

/// Solves the P fixed point and assembles the full ledger. Throws ValidationError
/// (eta range, coefficient bounds) or NumericalError (fixed point, nonpositive constant).
ConstantLedger compute_constants(const LedgerInputs& in);

/// P = A + 3D / ((2mu+lambda)(B + P)) by fixed-point iteration from P = A.
double solve_P(double A, double B, double D, double wave_modulus, int* iterations = nullptr);

/// max_x |u(x)|^2 / |grad u|^2 over Dirichlet grid functions: the largest diagonal entry of the
/// discrete Green's function.
double sup_norm_constant(const GridSpec& grid);

/// Ledger serialized as JSON (every constant with a formula note).
std::string ledger_json(const ConstantLedger& L);

// --- inequality ledger -------------------------------------------------------

struct MarginRow {
    double time = 0.0;
    double lhs[5] = {};   ///< derivative sides
    double rhs[5] = {};
    double L = 0.0;        ///< Lyapunov functional
    double envelope_rhs = 0.0;
    double envelope_margin = 0.0;
    double margin(int i) const { return rhs[i] - lhs[i]; }
};

inline constexpr const char* inequality_ids[5] = {"3.1", "3.3", "3.8", "3.18", "3.28"};

struct InequalitySummary {
    std::string id;
    double min_margin = 0.0;
    double violation = 0.0;   ///< max(0, -min margin)
};

struct MarginsReport {
    std::vector<MarginRow> rows;
    std::vector<InequalitySummary> summary;  ///< five inequalities then the envelope
    bool approximate_q = false;              ///< q matches the normal only on faces (d > 1)
};

/// Margins RHS - LHS of every differential inequality along a recorded trajectory.
MarginsReport inequality_ledger(const std::vector<DiagnosticRow>& rows, const ConstantLedger& L);

} // namespace lamelab
