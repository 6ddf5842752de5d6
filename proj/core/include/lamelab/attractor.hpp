#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lamelab/grid.hpp"
#include "lamelab/integrator.hpp"
#include "lamelab/ledger.hpp"
#include "lamelab/model.hpp"

namespace lamelab {

/// Smooth random state: every component is a combination of the lowest `modes` sine modes per
/// axis with seeded uniform coefficients, rescaled so that |U|_{H_c} = hc_norm.
State random_smooth_state(const GridSpec& grid, const ModelSpec& model, double hc_norm,
                          std::uint64_t seed, int modes = 3, double t = 0.0);

/// tau + (T - tau) 2^-j for j = count-1 .. 0, floored to multiples of dt, ascending and distinct.
std::vector<double> dyadic_times(double tau, double T, int count, double dt);

struct EnsembleSpec {
    std::vector<State> initial_states;
    std::vector<ForcingSymbol> symbols;
    std::vector<double> snapshot_times;
    double tau = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;

    const GridSpec& grid() const;
    /// One grid, nonempty members, snapshot times within [tau, T].
    void validate(double T) const;
    std::size_t member_count() const { return initial_states.size() * symbols.size(); }
};

/// Builds an ensemble of `ic_count` random states with the given H_c norms (cycled).
EnsembleSpec make_ensemble(const GridSpec& grid, const ModelSpec& model,
                           const std::vector<double>& hc_norms, int ic_count,
                           std::vector<ForcingSymbol> symbols, double tau, std::uint64_t seed);

struct SnapshotCloud {
    double time = 0.0;
    std::vector<State> points;
    std::vector<double> hc_norms;

    void push(State s, double mu, double lambda);
};

/// sup_{a in A} min_{b in B} |a - b|_{H_c}. Throws ValidationError on empty clouds or grid mismatch.
double hausdorff_semidist(const SnapshotCloud& A, const SnapshotCloud& B, double mu, double lambda);

// --- absorbing set -----------------------------------------------------------

struct AbsorbingMember {
    std::size_t ic = 0, symbol = 0;
    double initial_hc_norm_sq = 0.0;
    double initial_energy = 0.0;
    std::optional<double> entry_time;      ///< first t with |U|^2 <= rho0^2
    double predicted_entry = 0.0;          ///< Gronwall envelope entry time (inf when unreachable)
    bool within_slack = false;             ///< entry - tau <= 2 (predicted - tau)
    long exits = 0;                        ///< recorded t > entry with |U| > rho0 (1 + 1e-2)
    double max_ratio_after_entry = 0.0;    ///< max |U| / rho0 after entry
    double final_hc_norm_sq = 0.0;
    bool failed = false;
    std::string error;
};

struct AbsorbingReport {
    double rho0 = 0.0;
    double T = 0.0;
    std::vector<AbsorbingMember> members;
    bool passed() const;
};

/// Gronwall-predicted entry time into B_0 for an initial energy E(tau):
/// the envelope E(tau) e^{-xi1 (t - tau)} + floor must reach beta0 rho0^2 - C_f |Omega|.
double predicted_entry_time(double initial_energy, double tau, const ConstantLedger& L, double volume);

AbsorbingReport absorbing_check(const EnsembleSpec& ensemble, const ConstantLedger& ledger,
                                double T, const ModelSpec& model, const SchemeConfig& scheme);

// --- attractor approximation ---------------------------------------------------

struct AttractorApproximation {
    SnapshotCloud final_cloud;              ///< union of final snapshots
    std::vector<double> times;              ///< snapshot times
    std::vector<double> decay_series;       ///< sup_sigma dist(cloud(t), final_cloud)
    std::vector<SnapshotCloud> clouds;      ///< one cloud per snapshot time
    std::vector<std::string> excluded;      ///< failed members
    double max_jitter = 0.0;                ///< max relative increase between consecutive entries
    bool nonincreasing(double tolerance = 0.05) const { return max_jitter <= tolerance; }
};

AttractorApproximation attractor_approximate(const EnsembleSpec& ensemble, double T_max,
                                             const ModelSpec& model, const SchemeConfig& scheme);

// --- contraction function ------------------------------------------------------

/// U + 2^-n W for n = first .. first + count - 1.
std::vector<State> geometric_sequence(const State& U, const State& W, int count, int first = 1);

/// Constant in |f(u1) - f(u2)| <= C_B |z|_{2 rho}, bounded from the recorded pair norms:
/// 1 for the zero nonlinearity, else max(1, 2 c rho d^rho max_t (|u1| + |u2|)^{rho-1}).
double contraction_constant(const DifferenceRecord& rec, const ModelSpec& model, int dim);

struct ContractionPair {
    std::size_t i = 0, j = 0;
    double E_Z = 0.0;           ///< E_Z at the final time
    double phi = 0.0;
    double C_B = 0.0;
    double C_M = 0.0;
    double bound = 0.0;         ///< C_M / T + phi / T
    bool inequality_holds = false;
    bool failed = false;
    std::string error;
};

struct ContractionReport {
    double horizon = 0.0;
    std::vector<ContractionPair> pairs;     ///< consecutive pairs (i, i+1)
    std::vector<double> ratios;             ///< phi_k / phi_{k+1}
    bool monotone = false;                  ///< phi nonincreasing up to 10% jitter
    double final_fraction = 0.0;            ///< last phi / first phi
    bool all_inequalities_hold() const;
};

/// Pairs (i, i+1) of the sequence under symbols (g_i, g_{i+1}); g_sequence may hold one symbol.
ContractionReport contraction_test(const std::vector<State>& sequence,
                                   const std::vector<ForcingSymbol>& g_sequence, double T,
                                   const ModelSpec& model, const SchemeConfig& scheme, int threads = 1);

/// phi_T for every ordered pair (i, j), i != j; diagonal zero.
std::vector<std::vector<double>> contraction_matrix(const std::vector<State>& sequence,
                                                    const std::vector<ForcingSymbol>& g_sequence,
                                                    double T, const ModelSpec& model,
                                                    const SchemeConfig& scheme, int threads = 1);

} // namespace lamelab
