// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lamelab/attractor.hpp"
#include "lamelab/execute.hpp"
#include "lamelab/hodge.hpp"
#include "lamelab/operators.hpp"
#include "lamelab/poisson.hpp"
#include "support.hpp"

using namespace lamelab;
using std::numbers::pi;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double max_abs_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

SchemeConfig scheme_with(double dt) {
    SchemeConfig s;
    s.dt = dt;
    return s;
}

ForcingSymbol periodic_mode(const GridSpec& g, double shift = 0.0) {
    return ForcingSymbol(ForcingSymbol::Kind::time_periodic, first_eigenfunction(g), {1.0}, shift);
}

ModelSpec benchmark_model(bool nonlinear) {
    ModelSpec m;
    m.f = nonlinear ? Nonlinearity::power(1.0, 2.0, 1.0) : Nonlinearity::zero(1.0);
    return m;
}

State benchmark_state(const GridSpec& g) {
    State s = State::zero(g);
    s.u[0] = first_eigenfunction(g);
    s.theta = 0.5 * first_eigenfunction(g);
    return s;
}

fs::path work_dir() {
    const fs::path p = fs::temp_directory_path() / "lamelab_acceptance";
    fs::create_directories(p);
    return p;
}

Scenario catalog(const std::string& name) { return parse_scenario(fs::path(LAMELAB_SCENARIO_DIR) / (name + ".toml")); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Executed {
    ExecutionResult result;
    json metrics;
};

Executed run_scenario(const Scenario& s, const std::string& tag, int threads = 1) {
    const fs::path dir = work_dir() / tag;
    fs::remove_all(dir);
    ExecuteOptions o;
    o.out_dir = dir;
    o.threads = threads;
    Executed e{execute(s, o), {}};
    e.metrics = json::parse(slurp(dir / "summary.json"))["metrics"];
    return e;
}

// --- criteria -------------------------------------------------------------------

Outcome constant_algebra() {
    std::mt19937_64 rng(2024);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * 0.5 * (testing::uniform(rng) + 1.0); };
    auto hand_P = [](double A, double B, double D, double w) {
        double P = A;
        for (int i = 0; i < 64; ++i) P = A + 3.0 * D / (w * (B + P));
        return P;
    };
    double worst_identity = 0.0, worst_P = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        ConstantLedger X;
        X.dim = 1 + draw % 3;
        X.mu = in(0.5, 4.0);
        X.lambda = in(-X.mu / 2, 4.0);
        X.alpha0 = in(0.1, 2.0);
        X.alpha1 = X.alpha0 * in(1.0, 2.0);
        X.kappa0 = in(0.1, 2.0);
        X.kappa1 = X.kappa0 * in(1.0, 2.0);
        X.lambda1 = in(1.0, 50.0);
        X.eta = in(0.05, 0.95) * std::min(X.lambda1 * (2 * X.mu + X.lambda) / 2, X.lambda1) * std::min(X.mu, 1.0);
        X.Mq = in(1.0, 6.0);
        X.q_max = std::sqrt(static_cast<double>(X.dim));
        X.k = in(0.5, 1000.0);
        X.k_c = in(0.1, 2.0);
        X.k_g = X.dim == 1 ? 1.0 : in(1.0, 2.0);
        X.C_tr = in(0.5, 3.0);
        X.g0_lb2_sq = in(0.0, 2.0);
        const ConstantLedger L = complete_ledger(X);
        worst_identity = std::max(worst_identity, max_abs_of(L.identity_residuals()));
        worst_P = std::max(worst_P, std::abs(L.P - hand_P(L.A, L.B, L.D, 2 * L.mu + L.lambda)) / L.P);
    }
    ConstantLedger O;
    O.dim = 1;
    O.mu = 1.0;
    O.alpha0 = O.alpha1 = O.kappa0 = O.kappa1 = 1.0;
    O.lambda1 = pi * pi;
    O.eta = 1.0;
    O.Mq = 2.0;
    O.q_max = 1.0;
    O.k = O.k_g = O.C_tr = 1.0;
    O.k_c = 1.0 / pi;
    O.g0_lb2_sq = 0.25;
    const double P = complete_ledger(O).P;
    return {worst_identity <= 1e-12 && worst_P <= 1e-12 && std::abs(P - 12.2301) <= 5e-5,
            fmt("max identity residual %.2e, max |P - oracle|/P %.2e, benchmark P %.6f", worst_identity, worst_P, P)};
}

Outcome operator_convergence() {
    auto bump = [](const GridSpec& g) {
        return ScalarField::sample(g, [](const auto& x) {
            return std::pow(std::sin(pi * x[0]), 2) * std::pow(std::sin(pi * x[1]), 2);
        });
    };
    std::vector<double> poisson, defect, div_res;
    double worst_curl = 0.0;
    std::mt19937_64 rng(5);
    for (int n : {15, 31, 63, 127}) {
        const GridSpec g = GridSpec::square(1.0, n);
        const auto exact = ScalarField::sample(g, [](const auto& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); });
        poisson.push_back((poisson_solve(2 * pi * pi * exact) - exact).max_abs());
        const auto b = bump(g);
        defect.push_back(std::sqrt(l2_norm_sq(divergence(gradient(b)) - laplacian(b))));

        VectorField u = gradient(b);
        const auto dchi_dx = ScalarField::sample(g, [](const auto& x) {
            return 3 * pi * std::pow(std::sin(pi * x[0]), 2) * std::cos(pi * x[0]) * std::pow(std::sin(pi * x[1]), 3);
        });
        const auto dchi_dy = ScalarField::sample(g, [](const auto& x) {
            return 3 * pi * std::pow(std::sin(pi * x[0]), 3) * std::pow(std::sin(pi * x[1]), 2) * std::cos(pi * x[1]);
        });
        u[0] += dchi_dy;
        u[1] -= dchi_dx;
        const auto parts = helmholtz_decompose(u);
        div_res.push_back(std::sqrt(l2_norm_sq(divergence(parts.div_free))));
        worst_curl = std::max(worst_curl, curl(parts.curl_free)[0].max_abs());
        const auto rnd = helmholtz_decompose(testing::random_vector(g, rng));
        worst_curl = std::max(worst_curl, curl(rnd.curl_free)[0].max_abs());
    }
    const double o1 = testing::observed_order(poisson), o2 = testing::observed_order(defect),
                 o3 = testing::observed_order(div_res);
    return {o1 >= 1.9 && o2 >= 1.9 && o3 >= 1.9 && worst_curl <= 1e-12,
            fmt("orders: Poisson %.3f, div grad defect %.3f, Helmholtz div residual %.3f; max curl of curl-free part %.2e",
                o1, o2, o3, worst_curl)};
}

Outcome integrator_order() {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ScalarField e1 = first_eigenfunction(g);
    const double lam = first_eigenvalue(g);
    auto decoupled = [](double lambda, double kappa) {
        ModelSpec m;
        m.lambda = lambda;
        m.alpha = TimeCoefficient::constant(0.0);
        m.kappa = TimeCoefficient::constant(kappa);
        return m;
    };

    std::vector<double> wave, heat, forced;
    const ModelSpec mw = decoupled(0.5, 1.0);
    const double omega = std::sqrt(mw.wave_modulus() * lam);
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        State s = State::zero(g);
        s.u[0] = e1;
        wave.push_back((evolve(s, 0.0, 1.0, ForcingSymbol::zero(g), mw, scheme_with(dt)).u[0] - std::cos(omega) * e1)
                           .max_abs());
    }
    const ModelSpec mh = decoupled(0.0, 0.7);
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        State s = State::zero(g);
        s.theta = e1;
        SchemeConfig sc = scheme_with(dt);
        sc.cfl_safety = 1.0;
        heat.push_back((evolve(s, 0.0, 1.0, ForcingSymbol::zero(g), mh, sc).theta - std::exp(-0.7 * lam) * e1).max_abs());
    }
    const ModelSpec mf = decoupled(0.0, 1.0);
    const double w = 2 * pi, T = 1.25;
    const double a = (lam * std::sin(w * T) - w * std::cos(w * T) + w * std::exp(-lam * T)) / (lam * lam + w * w);
    for (double dt : {0.01, 0.005, 0.0025, 0.00125})
        forced.push_back((evolve(State::zero(g), 0.0, T, periodic_mode(g), mf, scheme_with(dt)).theta - a * e1).max_abs());

    const double o1 = testing::observed_order(wave), o2 = testing::observed_order(heat),
                 o3 = testing::observed_order(forced);
    return {o1 >= 1.9 && o2 >= 1.9 && o3 >= 1.9,
            fmt("orders: wave mode %.3f, heat decay %.3f, forced heat %.3f", o1, o2, o3)};
}

Outcome energy_identity() {
    std::vector<double> worst;
    std::string levels;
    for (int level = 0; level < 3; ++level) {
        const GridSpec g = GridSpec::line(1.0, (256 << level) - 1);
        State s0 = State::zero(g);
        s0.u[0] = 0.5 * first_eigenfunction(g);
        const double dt = 0.00125 / (1 << level);
        const auto r = energy_identity_residuals(s0, 0.0, 2.0, periodic_mode(g), benchmark_model(true), scheme_with(dt));
        worst.push_back(max_abs_of(r));
        levels += fmt("%s n=%d %.3e", level ? "," : "", g.size(), worst.back());
    }
    const double order = testing::observed_order(worst);
    return {order >= 0.9, fmt("max residual%s; order %.3f", levels.c_str(), order)};
}

/// Streams a benchmark trajectory; tracks energy growth and lower-bound violations.
struct EnergyWatch {
    double E0 = std::numeric_limits<double>::quiet_NaN();
    double max_rise = -std::numeric_limits<double>::infinity();
    double worst_lower_bound = -std::numeric_limits<double>::infinity();
    long rows = 0;
};

EnergyWatch watch_energy(const ModelSpec& m, const ForcingSymbol& g, const State& s0, double T) {
    const GridSpec& grid = s0.theta.grid();
    const double beta0 = 0.5 * (1.0 - m.f.eta / (std::min(m.mu, 1.0) * first_eigenvalue(grid)));
    EnergyWatch w;
    RunOptions opts;
    opts.keep_states = false;
    opts.observer = [&](const State& s, long) {
        const double E = energy(s, m).E;
        if (std::isnan(w.E0)) w.E0 = E;
        w.max_rise = std::max(w.max_rise, E - w.E0);
        const double bound = beta0 * hc_norm_sq(s, m.mu, m.lambda) - m.f.C_f * grid.volume();
        w.worst_lower_bound = std::max(w.worst_lower_bound, bound - E);
        ++w.rows;
    };
    run(s0, 0.0, T, g, m, scheme_with(0.01), opts);
    return w;
}

Outcome dissipation() {
    const GridSpec g = GridSpec::line(1.0, 31);
    std::string detail;
    bool ok = true;
    for (bool nonlinear : {false, true}) {
        const EnergyWatch w = watch_energy(benchmark_model(nonlinear), ForcingSymbol::zero(g), benchmark_state(g), 50.0);
        ok = ok && w.max_rise <= 1e-8;
        detail += fmt("%sf=%s: max E(t)-E(0) %.2e over %ld rows", nonlinear ? "; " : "", nonlinear ? "power" : "zero",
                      w.max_rise, w.rows);
    }
    return {ok, detail};
}

Outcome lower_bound() {
    const GridSpec g = GridSpec::line(1.0, 31);
    long violations = 0, rows = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (bool nonlinear : {false, true})
        for (bool forced : {false, true}) {
            const ForcingSymbol sym = forced ? periodic_mode(g) : ForcingSymbol::zero(g);
            const EnergyWatch w = watch_energy(benchmark_model(nonlinear), sym, benchmark_state(g), forced ? 10.0 : 50.0);
            violations += w.worst_lower_bound > 0.0;
            worst = std::max(worst, w.worst_lower_bound);
            rows += w.rows;
        }
    return {violations == 0, fmt("%ld violating trajectories over %ld rows; max (bound - E) %.3e", violations, rows, worst)};
}

Outcome lyapunov_ledger() {
    Scenario s = catalog("benchmark_1d");
    s.output.write_snapshots = false;
    double viol[2], min31[2];
    for (int level = 0; level < 2; ++level) {
        s.grid.counts = {(32 << level) - 1};
        s.scheme.dt = 0.01 / (1 << level);
        const Executed e = run_scenario(s, "lyapunov_" + std::to_string(level));
        if (e.result.exit_code != 0) return {false, "benchmark run failed: " + e.result.message};
        const json& ineq = e.metrics["inequalities"];
        viol[level] = ineq["3.28"]["violation"].get<double>();
        min31[level] = ineq["3.1"]["min_margin"].get<double>();
    }
    const bool decreased = viol[0] == 0.0 ? viol[1] == 0.0 : viol[1] <= viol[0] / 3.0;
    return {decreased && min31[0] >= 0.0 && min31[1] >= 0.0,
            fmt("3.28 violation %.3e -> %.3e; 3.1 min margin %.3e, %.3e", viol[0], viol[1], min31[0], min31[1])};
}

Outcome absorbing_set() {
    const Executed e = run_scenario(catalog("absorbing_1d"), "absorbing", 4);
    if (e.result.exit_code != 0) return {false, "absorbing run failed: " + e.result.message};
    const std::string csv = slurp(e.result.out_dir / "absorbing.csv");
    long members = 0, inside = 0, exits = 0;
    double latest = 0.0, predicted = 0.0;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::vector<double> v;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
        ++members;
        inside += std::isfinite(v[4]) && v[6] == 1.0 && v[10] == 0.0;
        exits += static_cast<long>(v[7]);
        latest = std::max(latest, v[4]);
        predicted = v[5];
    }
    return {members == 15 && inside == members && exits == 0,
            fmt("%ld/%ld members entered within 2x prediction (latest entry t=%.2f, predicted %.3g), %ld exits", inside,
                members, latest, predicted, exits)};
}

Outcome translation_identity() {
    const GridSpec g = GridSpec::line(1.0, 31);
    ModelSpec m = benchmark_model(true);
    m.alpha = TimeCoefficient::sinusoidal(1.0, 0.2, 1.0);
    const State s0 = benchmark_state(g);
    const double dt = 0.01;
    const ForcingSymbol symbols[] = {ForcingSymbol(ForcingSymbol::Kind::static_, first_eigenfunction(g)),
                                     periodic_mode(g)};
    double worst = 0.0;
    for (double s : {0.0, dt, 100 * dt})
        for (const ForcingSymbol& g0 : symbols)
            worst = std::max(worst, check_translation_identity(s0, 0.0, 1.0, s, g0, m, scheme_with(dt)));
    return {worst <= 1e-12, fmt("max discrepancy %.2e over s in {0, dt, 100 dt}, static and periodic", worst)};
}

Outcome contraction() {
    const GridSpec g = GridSpec::line(1.0, 31);
    const std::vector<ForcingSymbol> gs{periodic_mode(g)};
    std::string detail;
    bool ok = true;

    const ModelSpec lin = benchmark_model(false);
    const State U = random_smooth_state(g, lin, 1.0, 17);
    const State W = random_smooth_state(g, lin, 1.0, 18);
    const auto rep = contraction_test(geometric_sequence(U, W, 6), gs, 4.0, lin, scheme_with(0.01), 2);
    double rmin = 1e300, rmax = 0.0;
    for (double r : rep.ratios) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    ok = ok && rmin >= 3.5 && rmax <= 4.5 && rep.all_inequalities_hold();
    detail += fmt("f=0: ratios in [%.4f, %.4f], inequality %s", rmin, rmax, rep.all_inequalities_hold() ? "holds" : "fails");

    const ModelSpec nl = benchmark_model(true);
    const auto rn = contraction_test(geometric_sequence(U, W, 8), gs, 4.0, nl, scheme_with(0.01), 2);
    ok = ok && rn.monotone && rn.final_fraction < 1e-3 && rn.all_inequalities_hold();
    detail += fmt("; power f: monotone %s, final/initial %.2e", rn.monotone ? "yes" : "no", rn.final_fraction);
    return {ok, detail};
}

Outcome attractor_decay() {
    const Executed e = run_scenario(catalog("attractor_1d"), "attractor", 4);
    if (e.result.exit_code != 0) return {false, "attractor run failed: " + e.result.message};
    const bool nonincreasing = e.metrics["nonincreasing"].get<bool>();
    const bool final_zero = e.metrics["decay_final"].get<double>() == 0.0;
    const int members = e.metrics["members"].get<int>();
    return {nonincreasing && final_zero && members == 24,
            fmt("%d members, decay series nonincreasing within 5%%: %s, final value 0: %s", members,
                nonincreasing ? "yes" : "no", final_zero ? "yes" : "no")};
}

Outcome determinism() {
    const char* names[] = {"benchmark_1d", "nonlinear_1d", "constants_1d", "assumptions_1d",
                           "contraction_1d", "absorbing_1d", "attractor_1d"};
    int checked = 0;
    std::string mismatched;
    for (const char* name : names) {
        for (int threads : {1, 3}) {
            const fs::path dir = work_dir() / ("determinism_" + std::string(name));
            fs::remove_all(dir);
            ExecuteOptions o;
            o.out_dir = dir;
            o.threads = threads;
            const Scenario s = catalog(name);
            const ExecutionResult first = execute(s, o);
            std::map<std::string, std::string> bytes;
            for (const auto& f : first.artifacts) bytes[f] = slurp(dir / f);
            const ExecutionResult second = execute(s, o);
            bool same = first.artifacts == second.artifacts;
            for (const auto& f : second.artifacts)
                if (f != "timing.json" && slurp(dir / f) != bytes[f]) same = false;
            if (!same) mismatched += fmt(" %s(threads=%d)", name, threads);
            ++checked;
        }
    }
    return {mismatched.empty(), fmt("%d scenario/thread combinations rerun; mismatches:%s", checked,
                                    mismatched.empty() ? " none" : mismatched.c_str())};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {"constant algebra identities", 1.0, constant_algebra},
        {"operator convergence", 30.0, operator_convergence},
        {"integrator order", 30.0, integrator_order},
        {"energy identity residual", 60.0, energy_identity},
        {"dissipation sanity", 60.0, dissipation},
        {"energy lower bound", 60.0, lower_bound},
        {"Lyapunov ledger", 300.0, lyapunov_ledger},
        {"absorbing set", 300.0, absorbing_set},
        {"translation identity", 60.0, translation_identity},
        {"contraction", 300.0, contraction},
        {"attractor decay", 600.0, attractor_decay},
        {"determinism", 600.0, determinism},
    };
    int failures = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.passed && in_time;
        failures += !pass;
        std::printf("%s %2d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
