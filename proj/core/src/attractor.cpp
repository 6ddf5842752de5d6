#include "lamelab/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "lamelab/diagnostics.hpp"
#include "parallel.hpp"

namespace lamelab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

ScalarField random_modes(const GridSpec& g, int modes, std::mt19937_64& rng) {
    const int d = g.dim();
    auto uniform = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };

    // sin((m+1) pi x_k / L) tables per axis
    std::vector<std::vector<double>> tab(d);
    for (int a = 0; a < d; ++a) {
        const int n = g.count(a);
        tab[a].resize(static_cast<std::size_t>(modes) * n);
        for (int m = 0; m < modes; ++m)
            for (int k = 0; k < n; ++k)
                tab[a][m * n + k] = std::sin((m + 1) * std::numbers::pi * g.coordinate(a, k) / g.length(a));
    }

    std::size_t combos = 1;
    for (int a = 0; a < d; ++a) combos *= static_cast<std::size_t>(modes);
    std::vector<double> coeff(combos);
    for (std::size_t c = 0; c < combos; ++c) {
        double msq = 0.0;
        std::size_t r = c;
        for (int a = 0; a < d; ++a) {
            const double m = static_cast<double>(r % modes + 1);
            msq += m * m;
            r /= modes;
        }
        coeff[c] = uniform() / msq;
    }

    ScalarField out(g);
    auto o = out.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto idx = g.unflatten(i);
        double sum = 0.0;
        for (std::size_t c = 0; c < combos; ++c) {
            double p = coeff[c];
            std::size_t r = c;
            for (int a = 0; a < d; ++a) {
                p *= tab[a][(r % modes) * g.count(a) + idx[a]];
                r /= modes;
            }
            sum += p;
        }
        o[i] = sum;
    }
    return out;
}

const ForcingSymbol& symbol_for(const std::vector<ForcingSymbol>& gs, std::size_t i) {
    return gs.size() == 1 ? gs.front() : gs.at(i);
}

} // namespace

State random_smooth_state(const GridSpec& grid, const ModelSpec& model, double hc_norm,
                          std::uint64_t seed, int modes, double t) {
    if (!(hc_norm >= 0.0) || !std::isfinite(hc_norm))
        throw ValidationError("random_smooth_state: hc_norm must be finite and >= 0");
    if (modes < 1) throw ValidationError("random_smooth_state: modes must be >= 1");
    std::mt19937_64 rng(seed);
    State s = State::zero(grid, t);
    for (int i = 0; i < grid.dim(); ++i) s.u[i] = random_modes(grid, modes, rng);
    for (int i = 0; i < grid.dim(); ++i) s.v[i] = random_modes(grid, modes, rng);
    s.theta = random_modes(grid, modes, rng);
    const double n2 = hc_norm_sq(s, model.mu, model.lambda);
    if (n2 > 0.0) s = scaled(hc_norm / std::sqrt(n2), std::move(s));
    s.t = t;
    return s;
}

std::vector<double> dyadic_times(double tau, double T, int count, double dt) {
    if (count < 1) throw ValidationError("dyadic_times: count must be >= 1");
    if (!(T >= tau)) throw ValidationError("dyadic_times: T must be >= tau");
    std::set<long> ticks;
    for (int j = count - 1; j >= 0; --j) {
        const double t = tau + (T - tau) * std::ldexp(1.0, -j);
        ticks.insert(static_cast<long>(std::floor((t - tau) / dt + 1e-9)));
    }
    std::vector<double> out;
    for (long k : ticks) out.push_back(tau + static_cast<double>(k) * dt);
    return out;
}

// --- ensembles -----------------------------------------------------------------

const GridSpec& EnsembleSpec::grid() const {
    if (initial_states.empty()) throw ValidationError("ensemble: no initial states");
    return initial_states.front().grid();
}

void EnsembleSpec::validate(double T) const {
    if (initial_states.empty()) throw ValidationError("ensemble: no initial states");
    if (symbols.empty()) throw ValidationError("ensemble: no symbols");
    const GridSpec& g = grid();
    for (const State& s : initial_states) require_same_grid(g, s.grid(), "ensemble initial state");
    for (const ForcingSymbol& s : symbols) require_same_grid(g, s.profile().grid(), "ensemble symbol");
    for (double t : snapshot_times)
        if (!(t >= tau && t <= T))
            throw ValidationError("ensemble: snapshot time " + std::to_string(t) + " outside [tau, T]");
    if (threads < 1) throw ValidationError("ensemble: threads must be >= 1");
}

EnsembleSpec make_ensemble(const GridSpec& grid, const ModelSpec& model,
                           const std::vector<double>& hc_norms, int ic_count,
                           std::vector<ForcingSymbol> symbols, double tau, std::uint64_t seed) {
    if (hc_norms.empty() || ic_count < 1) throw ValidationError("make_ensemble: need norms and ic_count >= 1");
    EnsembleSpec e;
    e.tau = tau;
    e.seed = seed;
    e.symbols = std::move(symbols);
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(ic_count));
    std::mt19937_64 master(seed);
    for (auto& s : seeds) s = master();
    for (int i = 0; i < ic_count; ++i)
        e.initial_states.push_back(
            random_smooth_state(grid, model, hc_norms[i % hc_norms.size()], seeds[i], 3, tau));
    return e;
}

void SnapshotCloud::push(State s, double mu, double lambda) {
    hc_norms.push_back(std::sqrt(hc_norm_sq(s, mu, lambda)));
    points.push_back(std::move(s));
}

double hausdorff_semidist(const SnapshotCloud& A, const SnapshotCloud& B, double mu, double lambda) {
    if (A.points.empty() || B.points.empty()) throw ValidationError("hausdorff_semidist: empty cloud");
    const GridSpec& g = A.points.front().grid();
    for (const State& s : A.points) require_same_grid(g, s.grid(), "hausdorff_semidist");
    for (const State& s : B.points) require_same_grid(g, s.grid(), "hausdorff_semidist");
    double sup = 0.0;
    for (const State& a : A.points) {
        double best = inf;
        for (const State& b : B.points) {
            best = std::min(best, hc_norm_sq(difference(a, b), mu, lambda));
            if (best == 0.0) break;
        }
        sup = std::max(sup, best);
    }
    return std::sqrt(sup);
}

// --- absorbing set -----------------------------------------------------------

bool AbsorbingReport::passed() const {
    if (members.empty()) return false;
    return std::all_of(members.begin(), members.end(), [](const AbsorbingMember& m) {
        return !m.failed && m.entry_time && m.within_slack && m.exits == 0;
    });
}

double predicted_entry_time(double initial_energy, double tau, const ConstantLedger& L, double volume) {
    const double floor = (1.0 + 1.0 / L.xi1) * (L.M_tilde1 + L.g0_lb2_sq);
    const double target = L.beta0 * L.rho0 * L.rho0 - L.C_f * volume;
    const double room = target - floor;
    if (!(room > 0.0)) return inf;
    if (initial_energy <= room) return tau;
    return tau + std::log(initial_energy / room) / L.xi1;
}

AbsorbingReport absorbing_check(const EnsembleSpec& ensemble, const ConstantLedger& ledger,
                                double T, const ModelSpec& model, const SchemeConfig& scheme) {
    ensemble.validate(T);
    AbsorbingReport rep;
    rep.rho0 = ledger.rho0;
    rep.T = T;
    const std::size_t nsym = ensemble.symbols.size();
    rep.members.resize(ensemble.member_count());
    const double rho_sq = ledger.rho0 * ledger.rho0;
    const double exit_sq = rho_sq * (1.0 + 1e-2) * (1.0 + 1e-2);
    const double volume = ensemble.grid().volume();

    detail::parallel_for(rep.members.size(), ensemble.threads, [&](std::size_t m) {
        AbsorbingMember& M = rep.members[m];
        M.ic = m / nsym;
        M.symbol = m % nsym;
        const State& U0 = ensemble.initial_states[M.ic];
        const ForcingSymbol& g = ensemble.symbols[M.symbol];
        M.initial_hc_norm_sq = hc_norm_sq(U0, model.mu, model.lambda);
        M.initial_energy = energy(U0, model).E;
        M.predicted_entry = predicted_entry_time(M.initial_energy, ensemble.tau, ledger, volume);
        RunOptions opts;
        opts.keep_states = false;
        opts.observer = [&](const State& s, long) {
            const double n2 = hc_norm_sq(s, model.mu, model.lambda);
            M.final_hc_norm_sq = n2;
            if (!M.entry_time) {
                if (n2 <= rho_sq) M.entry_time = s.t;
                return;
            }
            M.max_ratio_after_entry = std::max(M.max_ratio_after_entry, std::sqrt(n2 / rho_sq));
            if (n2 > exit_sq) ++M.exits;
        };
        try {
            run(U0, ensemble.tau, T, g, model, scheme, opts);
        } catch (const Error& e) {
            M.failed = true;
            M.error = e.what();
        }
        if (M.entry_time)
            M.within_slack = *M.entry_time - ensemble.tau <= 2.0 * (M.predicted_entry - ensemble.tau);
    });
    return rep;
}

// --- attractor approximation ---------------------------------------------------

AttractorApproximation attractor_approximate(const EnsembleSpec& ensemble, double T_max,
                                             const ModelSpec& model, const SchemeConfig& scheme) {
    ensemble.validate(T_max);
    std::vector<double> times = ensemble.snapshot_times;
    times.push_back(T_max);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const std::size_t nsym = ensemble.symbols.size();
    const std::size_t members = ensemble.member_count();
    std::vector<std::vector<State>> snaps(members);
    std::vector<std::string> errors(members);

    detail::parallel_for(members, ensemble.threads, [&](std::size_t m) {
        RunOptions opts;
        opts.keep_states = false;
        opts.snapshot_times = times;
        try {
            auto rec = run(ensemble.initial_states[m / nsym], ensemble.tau, T_max, ensemble.symbols[m % nsym],
                           model, scheme, opts);
            snaps[m] = std::move(rec.snapshots);
        } catch (const Error& e) {
            errors[m] = "ic " + std::to_string(m / nsym) + ", symbol " + std::to_string(m % nsym) + ": " + e.what();
        }
    });

    AttractorApproximation out;
    out.times = times;
    out.clouds.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out.clouds[k].time = times[k];
    for (std::size_t m = 0; m < members; ++m) {
        if (!errors[m].empty()) {
            out.excluded.push_back(errors[m]);
            continue;
        }
        for (std::size_t k = 0; k < times.size(); ++k) out.clouds[k].push(snaps[m].at(k), model.mu, model.lambda);
    }
    if (out.clouds.back().points.empty()) throw NumericalError("attractor_approximate: every ensemble member failed");
    out.final_cloud = out.clouds.back();

    out.decay_series.resize(times.size());
    detail::parallel_for(times.size(), ensemble.threads, [&](std::size_t k) {
        out.decay_series[k] = hausdorff_semidist(out.clouds[k], out.final_cloud, model.mu, model.lambda);
    });
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double a = out.decay_series[k], b = out.decay_series[k + 1];
        if (b <= a) continue;
        out.max_jitter = std::max(out.max_jitter, a > 0.0 ? (b - a) / a : inf);
    }
    return out;
}

// --- contraction function ------------------------------------------------------

std::vector<State> geometric_sequence(const State& U, const State& W, int count, int first) {
    require_same_grid(U.grid(), W.grid(), "geometric_sequence");
    if (count < 1) throw ValidationError("geometric_sequence: count must be >= 1");
    std::vector<State> out;
    for (int n = first; n < first + count; ++n) {
        const double a = std::ldexp(1.0, -n);
        State s = U;
        s.u.axpy(a, W.u);
        s.v.axpy(a, W.v);
        s.theta.axpy(a, W.theta);
        out.push_back(std::move(s));
    }
    return out;
}

double contraction_constant(const DifferenceRecord& rec, const ModelSpec& model, int dim) {
    if (model.f.is_zero()) return 1.0;
    const double q = model.f.rho - 1.0;
    double peak = 0.0;
    for (double s : rec.pair_norm_sum) peak = std::max(peak, std::pow(s, q));
    const double cb = 2.0 * model.f.c * model.f.rho * std::pow(static_cast<double>(dim), model.f.rho) * peak;
    return std::max(1.0, cb);
}

namespace {

ContractionPair pair_run(const std::vector<State>& seq, const std::vector<ForcingSymbol>& gs,
                         std::size_t i, std::size_t j, double T, const ModelSpec& model,
                         const SchemeConfig& scheme) {
    ContractionPair p;
    p.i = i;
    p.j = j;
    try {
        const double tau = seq[i].t;
        const DifferenceRecord rec =
            difference_run(seq[i], seq[j], tau, T, symbol_for(gs, i), symbol_for(gs, j), model, scheme);
        p.E_Z = rec.final_energy();
        p.C_B = contraction_constant(rec, model, seq[i].grid().dim());
        p.phi = rec.phi(p.C_B);
        p.C_M = rec.measured_C_M();
        p.bound = rec.horizon > 0.0 ? (p.C_M + p.phi) / rec.horizon : inf;
        p.inequality_holds = p.E_Z <= p.bound * (1.0 + 1e-12) || p.E_Z == 0.0;
    } catch (const Error& e) {
        p.failed = true;
        p.error = e.what();
    }
    return p;
}

void check_sequence(const std::vector<State>& seq, const std::vector<ForcingSymbol>& gs) {
    if (seq.size() < 2) throw ValidationError("contraction: need at least two states");
    if (gs.empty() || (gs.size() != 1 && gs.size() != seq.size()))
        throw ValidationError("contraction: need one symbol or one symbol per state");
    for (const State& s : seq) {
        require_same_grid(seq.front().grid(), s.grid(), "contraction sequence");
        if (s.t != seq.front().t) throw ValidationError("contraction: states must share the initial time");
    }
}

} // namespace

bool ContractionReport::all_inequalities_hold() const {
    return !pairs.empty() && std::all_of(pairs.begin(), pairs.end(), [](const ContractionPair& p) {
        return !p.failed && p.inequality_holds;
    });
}

ContractionReport contraction_test(const std::vector<State>& sequence,
                                   const std::vector<ForcingSymbol>& g_sequence, double T,
                                   const ModelSpec& model, const SchemeConfig& scheme, int threads) {
    check_sequence(sequence, g_sequence);
    ContractionReport rep;
    rep.horizon = T - sequence.front().t;
    rep.pairs.resize(sequence.size() - 1);
    detail::parallel_for(rep.pairs.size(), threads, [&](std::size_t k) {
        rep.pairs[k] = pair_run(sequence, g_sequence, k, k + 1, T, model, scheme);
    });
    rep.monotone = true;
    for (std::size_t k = 0; k + 1 < rep.pairs.size(); ++k) {
        const double a = rep.pairs[k].phi, b = rep.pairs[k + 1].phi;
        rep.ratios.push_back(b > 0.0 ? a / b : inf);
        if (b > 1.1 * a) rep.monotone = false;
    }
    const double first = rep.pairs.front().phi;
    rep.final_fraction = first > 0.0 ? rep.pairs.back().phi / first : 0.0;
    return rep;
}

std::vector<std::vector<double>> contraction_matrix(const std::vector<State>& sequence,
                                                    const std::vector<ForcingSymbol>& g_sequence,
                                                    double T, const ModelSpec& model,
                                                    const SchemeConfig& scheme, int threads) {
    check_sequence(sequence, g_sequence);
    const std::size_t n = sequence.size();
    std::vector<std::vector<double>> phi(n, std::vector<double>(n, 0.0));
    detail::parallel_for(n * n, threads, [&](std::size_t k) {
        const std::size_t i = k / n, j = k % n;
        if (i == j) return;
        const ContractionPair p = pair_run(sequence, g_sequence, i, j, T, model, scheme);
        if (p.failed) throw NumericalError("contraction pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                           "): " + p.error);
        phi[i][j] = p.phi;
    });
    return phi;
}

} // namespace lamelab
