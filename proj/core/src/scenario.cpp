#include "lamelab/scenario.hpp"

#include "lamelab/attractor.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace lamelab {

const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::run: return "run";
    case ExperimentKind::constants: return "constants";
    case ExperimentKind::assumptions: return "assumptions";
    case ExperimentKind::absorbing: return "absorbing";
    case ExperimentKind::attractor: return "attractor";
    case ExperimentKind::contraction: return "contraction";
    case ExperimentKind::convergence: return "convergence";
    }
    return "run";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::run, ExperimentKind::constants, ExperimentKind::assumptions,
                   ExperimentKind::absorbing, ExperimentKind::attractor, ExperimentKind::contraction,
                   ExperimentKind::convergence})
        if (name == to_string(k)) return k;
    throw ValidationError("unknown experiment kind '" + name + "'");
}

namespace {

std::string summarize(const std::vector<FieldError>& errors) {
    std::string s = "invalid scenario:";
    for (const auto& e : errors) s += "\n  " + e.path + ": " + e.message;
    return s;
}

} // namespace

ScenarioError::ScenarioError(std::vector<FieldError> errors)
    : ValidationError(summarize(errors)), errors_(std::move(errors)) {}

std::string ScenarioError::to_json() const {
    nlohmann::ordered_json j;
    j["errors"] = nlohmann::ordered_json::array();
    for (const auto& e : errors_) j["errors"].push_back({{"path", e.path}, {"message", e.message}});
    return j.dump(2);
}

// --- builders ------------------------------------------------------------------

GridSpec GridConfig::build() const {
    return GridSpec(std::span<const double>(lengths), std::span<const int>(counts));
}

TimeCoefficient CoefficientConfig::build() const {
    if (kind == "constant") return TimeCoefficient::constant(value);
    if (kind == "sinusoidal") return TimeCoefficient::sinusoidal(mean, amplitude, omega, phase);
    if (kind == "ramp") return TimeCoefficient::ramp_clamped(start, slope, lo, hi);
    throw ValidationError("unknown coefficient kind '" + kind + "'");
}

Nonlinearity NonlinearityConfig::build() const {
    if (kind == "zero") return Nonlinearity::zero(eta);
    if (kind == "power") return Nonlinearity::power(c, rho, eta);
    throw ValidationError("unknown nonlinearity kind '" + kind + "'");
}

namespace {

ForcingSymbol::Kind forcing_kind(const std::string& s) {
    if (s == "static") return ForcingSymbol::Kind::static_;
    if (s == "time_periodic") return ForcingSymbol::Kind::time_periodic;
    if (s == "quasi_periodic") return ForcingSymbol::Kind::quasi_periodic;
    if (s == "pulse_train") return ForcingSymbol::Kind::pulse_train;
    throw ValidationError("unknown forcing kind '" + s + "'");
}

ScalarField mode_field(const GridSpec& g, const std::vector<int>& mode, double amplitude) {
    return ScalarField::sample(g, [&](const std::array<double, 3>& x) {
        double p = amplitude;
        for (int a = 0; a < g.dim(); ++a) {
            const int m = mode.empty() ? 1 : mode[a % mode.size()];
            p *= std::sin(m * std::numbers::pi * x[a] / g.length(a));
        }
        return p;
    });
}

} // namespace

ForcingSymbol ForcingConfig::build(const GridSpec& grid) const {
    const auto k = forcing_kind(kind);
    ScalarField prof = profile == "zero" ? ScalarField(grid) : mode_field(grid, mode, amplitude);
    if (profile != "zero" && profile != "mode") throw ValidationError("unknown forcing profile '" + profile + "'");
    std::vector<double> params;
    if (k != ForcingSymbol::Kind::static_) params.push_back(period);
    if (k == ForcingSymbol::Kind::pulse_train) params.push_back(duty);
    return ForcingSymbol(k, std::move(prof), std::move(params));
}

ModelSpec ModelConfig::build() const {
    ModelSpec m;
    m.mu = mu;
    m.lambda = lambda;
    m.alpha = alpha.build();
    m.kappa = kappa.build();
    m.f = nonlinearity.build();
    return m;
}

SchemeConfig SchemeSettings::build() const {
    SchemeConfig s;
    s.dt = dt;
    s.cfl_safety = cfl_safety;
    s.record_stride = record_stride;
    if (heat_solver == "sine_transform")
        s.heat_solver.method = PoissonSolverSpec::Method::sine_transform;
    else if (heat_solver == "conjugate_gradient")
        s.heat_solver.method = PoissonSolverSpec::Method::conjugate_gradient;
    else
        throw ValidationError("unknown heat solver '" + heat_solver + "'");
    s.heat_solver.tolerance = solver_tolerance;
    s.heat_solver.max_iterations = solver_max_iterations;
    return s;
}

State InitialConfig::build(const GridSpec& grid, const ModelSpec& model, double t, std::uint64_t seed) const {
    if (kind == "random") return random_smooth_state(grid, model, hc_norm, seed, modes, t);
    State s = State::zero(grid, t);
    if (kind == "zero") return s;
    if (kind != "mode") throw ValidationError("unknown initial kind '" + kind + "'");
    const ScalarField phi = first_eigenfunction(grid);
    for (int i = 0; i < grid.dim(); ++i) {
        s.u[i].axpy(displacement, phi);
        s.v[i].axpy(velocity, phi);
    }
    s.theta.axpy(temperature, phi);
    return s;
}

// --- reading -------------------------------------------------------------------

namespace {

class Reader {
public:
    std::vector<FieldError> errors;

    void fail(std::string path, std::string msg) { errors.push_back({std::move(path), std::move(msg)}); }

    /// Sub-table at key; nullptr (and no error) when absent.
    const toml::table* table(const toml::table& t, const std::string& prefix, std::string_view key) {
        const toml::node* n = t.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) {
            fail(join(prefix, key), "expected a table");
            return nullptr;
        }
        return n->as_table();
    }

    void allow(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> keys) {
        const std::set<std::string_view> ok(keys);
        for (const auto& [k, v] : t)
            if (!ok.count(k.str())) fail(join(prefix, k.str()), "unknown key");
    }

    void number(const toml::table& t, const std::string& prefix, std::string_view key, double& out) {
        const toml::node* n = t.get(key);
        if (!n) return;
        if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer()))
            out = *v;
        else
            fail(join(prefix, key), "expected a number");
    }

    template <class Int>
    void integer(const toml::table& t, const std::string& prefix, std::string_view key, Int& out) {
        const toml::node* n = t.get(key);
        if (!n) return;
        if (!n->is_integer()) {
            fail(join(prefix, key), "expected an integer");
            return;
        }
        const std::int64_t v = *n->value<std::int64_t>();
        if constexpr (std::is_unsigned_v<Int>) {
            if (v < 0) {
                fail(join(prefix, key), "must be >= 0");
                return;
            }
        }
        out = static_cast<Int>(v);
    }

    void boolean(const toml::table& t, const std::string& prefix, std::string_view key, bool& out) {
        const toml::node* n = t.get(key);
        if (!n) return;
        if (n->is_boolean())
            out = *n->value<bool>();
        else
            fail(join(prefix, key), "expected true or false");
    }

    void string(const toml::table& t, const std::string& prefix, std::string_view key, std::string& out) {
        const toml::node* n = t.get(key);
        if (!n) return;
        if (n->is_string())
            out = *n->value<std::string>();
        else
            fail(join(prefix, key), "expected a string");
    }

    template <class T>
    void array(const toml::table& t, const std::string& prefix, std::string_view key, std::vector<T>& out) {
        const toml::node* n = t.get(key);
        if (!n) return;
        const std::string path = join(prefix, key);
        if (!n->is_array()) {
            fail(path, "expected an array");
            return;
        }
        std::vector<T> vals;
        const auto& arr = *n->as_array();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const toml::node& e = arr[i];
            const std::string ep = path + "[" + std::to_string(i) + "]";
            if constexpr (std::is_integral_v<T>) {
                if (!e.is_integer()) {
                    fail(ep, "expected an integer");
                    continue;
                }
                vals.push_back(static_cast<T>(*e.value<std::int64_t>()));
            } else {
                if (!(e.is_integer() || e.is_floating_point())) {
                    fail(ep, "expected a number");
                    continue;
                }
                vals.push_back(*e.value<double>());
            }
        }
        out = std::move(vals);
    }

    static std::string join(const std::string& prefix, std::string_view key) {
        return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
    }
};

void read_coefficient(Reader& r, const toml::table& parent, const std::string& prefix, const char* key,
                      CoefficientConfig& c) {
    const toml::table* t = r.table(parent, prefix, key);
    if (!t) return;
    const std::string p = Reader::join(prefix, key);
    r.allow(*t, p, {"kind", "value", "mean", "amplitude", "omega", "phase", "start", "slope", "lo", "hi"});
    r.string(*t, p, "kind", c.kind);
    r.number(*t, p, "value", c.value);
    r.number(*t, p, "mean", c.mean);
    r.number(*t, p, "amplitude", c.amplitude);
    r.number(*t, p, "omega", c.omega);
    r.number(*t, p, "phase", c.phase);
    r.number(*t, p, "start", c.start);
    r.number(*t, p, "slope", c.slope);
    r.number(*t, p, "lo", c.lo);
    r.number(*t, p, "hi", c.hi);
}

Scenario read_table(const toml::table& root, std::vector<FieldError>& errors) {
    Reader r;
    Scenario s;
    r.allow(root, "", {"seed", "grid", "model", "scheme", "initial", "experiment", "output"});
    r.integer(root, "", "seed", s.seed);

    if (const auto* t = r.table(root, "", "grid")) {
        r.allow(*t, "grid", {"lengths", "counts"});
        r.array(*t, "grid", "lengths", s.grid.lengths);
        r.array(*t, "grid", "counts", s.grid.counts);
    }
    if (const auto* t = r.table(root, "", "model")) {
        r.allow(*t, "model", {"mu", "lambda", "alpha", "kappa", "nonlinearity", "forcing"});
        r.number(*t, "model", "mu", s.model.mu);
        r.number(*t, "model", "lambda", s.model.lambda);
        read_coefficient(r, *t, "model", "alpha", s.model.alpha);
        read_coefficient(r, *t, "model", "kappa", s.model.kappa);
        if (const auto* n = r.table(*t, "model", "nonlinearity")) {
            const std::string p = "model.nonlinearity";
            r.allow(*n, p, {"kind", "c", "rho", "eta"});
            r.string(*n, p, "kind", s.model.nonlinearity.kind);
            r.number(*n, p, "c", s.model.nonlinearity.c);
            r.number(*n, p, "rho", s.model.nonlinearity.rho);
            r.number(*n, p, "eta", s.model.nonlinearity.eta);
        }
        if (const auto* f = r.table(*t, "model", "forcing")) {
            const std::string p = "model.forcing";
            auto& F = s.model.forcing;
            r.allow(*f, p, {"kind", "profile", "mode", "amplitude", "period", "duty", "shifts"});
            r.string(*f, p, "kind", F.kind);
            r.string(*f, p, "profile", F.profile);
            r.array(*f, p, "mode", F.mode);
            r.number(*f, p, "amplitude", F.amplitude);
            r.number(*f, p, "period", F.period);
            r.number(*f, p, "duty", F.duty);
            r.array(*f, p, "shifts", F.shifts);
        }
    }
    if (const auto* t = r.table(root, "", "scheme")) {
        const std::string p = "scheme";
        r.allow(*t, p, {"dt", "cfl_safety", "record_stride", "heat_solver", "solver_tolerance",
                        "solver_max_iterations"});
        r.number(*t, p, "dt", s.scheme.dt);
        r.number(*t, p, "cfl_safety", s.scheme.cfl_safety);
        r.integer(*t, p, "record_stride", s.scheme.record_stride);
        r.string(*t, p, "heat_solver", s.scheme.heat_solver);
        r.number(*t, p, "solver_tolerance", s.scheme.solver_tolerance);
        r.integer(*t, p, "solver_max_iterations", s.scheme.solver_max_iterations);
    }
    if (const auto* t = r.table(root, "", "initial")) {
        const std::string p = "initial";
        r.allow(*t, p, {"kind", "displacement", "velocity", "temperature", "hc_norm", "modes"});
        r.string(*t, p, "kind", s.initial.kind);
        r.number(*t, p, "displacement", s.initial.displacement);
        r.number(*t, p, "velocity", s.initial.velocity);
        r.number(*t, p, "temperature", s.initial.temperature);
        r.number(*t, p, "hc_norm", s.initial.hc_norm);
        r.integer(*t, p, "modes", s.initial.modes);
    }
    if (const auto* t = r.table(root, "", "experiment")) {
        const std::string p = "experiment";
        auto& E = s.experiment;
        r.allow(*t, p, {"kind", "tau", "T", "lb2_horizon", "fit_radius", "refit_radius", "imposed_k", "samples",
                        "sample_horizon", "ic_count", "ic_scale", "ic_norm", "snapshot_count",
                        "sequence_length", "first_index", "base_norm", "perturbation_norm", "levels"});
        std::string kind = to_string(E.kind);
        r.string(*t, p, "kind", kind);
        try {
            E.kind = experiment_kind_from_string(kind);
        } catch (const ValidationError& e) {
            r.fail("experiment.kind", e.what());
        }
        r.number(*t, p, "tau", E.tau);
        r.number(*t, p, "T", E.T);
        r.number(*t, p, "lb2_horizon", E.lb2_horizon);
        r.number(*t, p, "fit_radius", E.fit_radius);
        r.boolean(*t, p, "refit_radius", E.refit_radius);
        r.number(*t, p, "imposed_k", E.imposed_k);
        r.integer(*t, p, "samples", E.samples);
        r.number(*t, p, "sample_horizon", E.sample_horizon);
        r.integer(*t, p, "ic_count", E.ic_count);
        r.number(*t, p, "ic_scale", E.ic_scale);
        r.number(*t, p, "ic_norm", E.ic_norm);
        r.integer(*t, p, "snapshot_count", E.snapshot_count);
        r.integer(*t, p, "sequence_length", E.sequence_length);
        r.integer(*t, p, "first_index", E.first_index);
        r.number(*t, p, "base_norm", E.base_norm);
        r.number(*t, p, "perturbation_norm", E.perturbation_norm);
        r.integer(*t, p, "levels", E.levels);
    }
    if (const auto* t = r.table(root, "", "output")) {
        const std::string p = "output";
        r.allow(*t, p, {"directory", "snapshot_times", "write_snapshots"});
        r.string(*t, p, "directory", s.output.directory);
        r.array(*t, p, "snapshot_times", s.output.snapshot_times);
        r.boolean(*t, p, "write_snapshots", s.output.write_snapshots);
    }
    errors = std::move(r.errors);
    return s;
}

} // namespace

// --- validation ----------------------------------------------------------------

namespace {

bool aligned(double x, double dt) {
    const double q = x / dt;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

std::vector<FieldError> validate_scenario(const Scenario& s) {
    std::vector<FieldError> E;
    auto fail = [&](std::string path, std::string msg) { E.push_back({std::move(path), std::move(msg)}); };
    auto num = [](double x) {
        std::ostringstream os;
        os.precision(6);
        os << x;
        return os.str();
    };

    // grid
    bool grid_ok = true;
    const auto& G = s.grid;
    if (G.lengths.empty() || G.lengths.size() > 3) {
        fail("grid.lengths", "needs 1 to 3 entries");
        grid_ok = false;
    }
    if (G.counts.size() != G.lengths.size()) {
        fail("grid.counts", "needs one entry per length");
        grid_ok = false;
    }
    for (std::size_t i = 0; i < G.lengths.size(); ++i)
        if (!(G.lengths[i] > 0.0 && finite(G.lengths[i]))) {
            fail("grid.lengths[" + std::to_string(i) + "]", "must be positive");
            grid_ok = false;
        }
    double total = 1.0;
    for (std::size_t i = 0; i < G.counts.size(); ++i) {
        total *= std::max(1, G.counts[i]);
        if (G.counts[i] < 3) {
            fail("grid.counts[" + std::to_string(i) + "]", "must be >= 3");
            grid_ok = false;
        }
    }
    if (total > 1 << 24) {
        fail("grid.counts", "more than 2^24 nodes");
        grid_ok = false;
    }
    GridSpec grid;
    if (grid_ok) grid = G.build();

    // model
    const auto& M = s.model;
    bool model_ok = true;
    if (!(M.mu > 0.0 && finite(M.mu))) {
        fail("model.mu", "must be positive");
        model_ok = false;
    }
    if (!finite(M.lambda) || !(2.0 * M.mu + M.lambda > 0.0)) {
        fail("model.lambda", "2 mu + lambda must be positive");
        model_ok = false;
    }
    auto check_coef = [&](const CoefficientConfig& c, const std::string& p) {
        static const std::set<std::string> kinds{"constant", "sinusoidal", "ramp"};
        if (!kinds.count(c.kind)) {
            fail(p + ".kind", "must be constant, sinusoidal or ramp");
            return false;
        }
        for (double x : {c.value, c.mean, c.amplitude, c.omega, c.phase, c.start, c.slope, c.lo, c.hi})
            if (!finite(x)) {
                fail(p, "parameters must be finite");
                return false;
            }
        try {
            c.build().validate(p);
        } catch (const ValidationError& e) {
            fail(p, e.what());
            return false;
        }
        return true;
    };
    model_ok &= check_coef(M.alpha, "model.alpha");
    model_ok &= check_coef(M.kappa, "model.kappa");

    const auto& N = M.nonlinearity;
    if (N.kind != "zero" && N.kind != "power") {
        fail("model.nonlinearity.kind", "must be zero or power");
        model_ok = false;
    } else if (N.kind == "power") {
        if (!(N.c >= 0.0 && finite(N.c))) fail("model.nonlinearity.c", "must be >= 0");
        if (!(N.rho > 1.0 && finite(N.rho))) fail("model.nonlinearity.rho", "must be > 1");
    }
    if (grid_ok && model_ok) {
        const double lam1 = first_eigenvalue(grid);
        const double upper = std::min(lam1 * (2.0 * M.mu + M.lambda) / 2.0, lam1);
        if (!(N.eta > 0.0 && N.eta < upper))
            fail("model.nonlinearity.eta", "must lie in (0, " + num(upper) + ")");
    }

    const auto& F = M.forcing;
    static const std::set<std::string> fkinds{"static", "time_periodic", "quasi_periodic", "pulse_train"};
    if (!fkinds.count(F.kind)) fail("model.forcing.kind", "must be static, time_periodic, quasi_periodic or pulse_train");
    if (F.profile != "zero" && F.profile != "mode") fail("model.forcing.profile", "must be zero or mode");
    for (std::size_t i = 0; i < F.mode.size(); ++i)
        if (F.mode[i] < 1) fail("model.forcing.mode[" + std::to_string(i) + "]", "must be >= 1");
    if (!finite(F.amplitude)) fail("model.forcing.amplitude", "must be finite");
    if (!(F.period > 0.0 && finite(F.period))) fail("model.forcing.period", "must be positive");
    if (!(F.duty > 0.0 && F.duty <= 1.0)) fail("model.forcing.duty", "must lie in (0, 1]");
    if (F.shifts.empty()) fail("model.forcing.shifts", "needs at least one shift");

    // scheme
    const auto& S = s.scheme;
    const bool dt_ok = S.dt > 0.0 && finite(S.dt);
    if (!dt_ok) fail("scheme.dt", "must be positive");
    if (!(S.cfl_safety > 0.0 && S.cfl_safety <= 1.0)) fail("scheme.cfl_safety", "must lie in (0, 1]");
    if (S.record_stride < 1) fail("scheme.record_stride", "must be >= 1");
    if (S.heat_solver != "sine_transform" && S.heat_solver != "conjugate_gradient")
        fail("scheme.heat_solver", "must be sine_transform or conjugate_gradient");
    if (!(S.solver_tolerance > 0.0 && S.solver_tolerance <= 1e-6))
        fail("scheme.solver_tolerance", "must lie in (0, 1e-6]");
    if (S.solver_max_iterations < 0 ||
        (grid_ok && S.solver_max_iterations > 0 && static_cast<std::size_t>(S.solver_max_iterations) < grid.size()))
        fail("scheme.solver_max_iterations", "must be 0 or at least the node count");
    if (dt_ok && grid_ok && model_ok && S.cfl_safety > 0.0 && S.cfl_safety <= 1.0) {
        const double limit = S.cfl_safety * grid.min_spacing() / std::sqrt(2.0 * M.mu + M.lambda);
        if (S.dt > limit * (1.0 + 1e-12))
            fail("scheme.dt", num(S.dt) + " violates the wave CFL limit " + num(limit) +
                                  " (cfl_safety * h_min / sqrt(2 mu + lambda))");
    }
    if (dt_ok)
        for (std::size_t i = 0; i < F.shifts.size(); ++i) {
            const std::string p = "model.forcing.shifts[" + std::to_string(i) + "]";
            if (!(F.shifts[i] >= 0.0 && finite(F.shifts[i])))
                fail(p, "must be >= 0");
            else if (!aligned(F.shifts[i], S.dt))
                fail(p, num(F.shifts[i]) + " is not a multiple of scheme.dt");
        }

    // initial state
    const auto& I = s.initial;
    if (I.kind != "zero" && I.kind != "mode" && I.kind != "random") fail("initial.kind", "must be zero, mode or random");
    for (auto [x, name] : {std::pair{I.displacement, "displacement"}, {I.velocity, "velocity"},
                           {I.temperature, "temperature"}})
        if (!finite(x)) fail(std::string("initial.") + name, "must be finite");
    if (!(I.hc_norm >= 0.0 && finite(I.hc_norm))) fail("initial.hc_norm", "must be >= 0");
    if (I.modes < 1) fail("initial.modes", "must be >= 1");

    // experiment
    const auto& X = s.experiment;
    if (!(X.tau >= 0.0 && finite(X.tau))) fail("experiment.tau", "must be >= 0");
    else if (dt_ok && !aligned(X.tau, S.dt)) fail("experiment.tau", "is not a multiple of scheme.dt");
    if (!(X.T >= X.tau && finite(X.T))) fail("experiment.T", "must be >= experiment.tau");
    else if (dt_ok && !aligned(X.T, S.dt)) fail("experiment.T", "is not a multiple of scheme.dt");
    if (!(X.lb2_horizon >= 2.0 && finite(X.lb2_horizon))) fail("experiment.lb2_horizon", "must be >= 2");
    if (!(X.fit_radius > 0.0 && finite(X.fit_radius))) fail("experiment.fit_radius", "must be positive");
    if (!(X.imposed_k >= 0.0 && finite(X.imposed_k))) fail("experiment.imposed_k", "must be >= 0 (0 estimates k)");
    if (X.samples < 1000) fail("experiment.samples", "must be >= 1000");
    if (!(X.sample_horizon > 0.0 && finite(X.sample_horizon))) fail("experiment.sample_horizon", "must be positive");
    if (X.ic_count < 1) fail("experiment.ic_count", "must be >= 1");
    if (!(X.ic_scale > 0.0 && finite(X.ic_scale))) fail("experiment.ic_scale", "must be positive");
    if (!(X.ic_norm >= 0.0 && finite(X.ic_norm))) fail("experiment.ic_norm", "must be >= 0");
    if (X.snapshot_count < 1 || X.snapshot_count > 60) fail("experiment.snapshot_count", "must lie in [1, 60]");
    if (X.sequence_length < 2) fail("experiment.sequence_length", "must be >= 2");
    if (X.first_index < 0 || X.first_index > 60) fail("experiment.first_index", "must lie in [0, 60]");
    if (!(X.base_norm >= 0.0 && finite(X.base_norm))) fail("experiment.base_norm", "must be >= 0");
    if (!(X.perturbation_norm > 0.0 && finite(X.perturbation_norm)))
        fail("experiment.perturbation_norm", "must be positive");
    if (X.levels < 2 || X.levels > 6) fail("experiment.levels", "must lie in [2, 6]");

    // output
    if (s.output.directory.empty()) fail("output.directory", "must not be empty");
    for (std::size_t i = 0; i < s.output.snapshot_times.size(); ++i) {
        const double t = s.output.snapshot_times[i];
        const std::string p = "output.snapshot_times[" + std::to_string(i) + "]";
        if (!(t >= X.tau && t <= X.T)) fail(p, "must lie in [experiment.tau, experiment.T]");
        else if (dt_ok && !aligned(t - X.tau, S.dt)) fail(p, "is not a multiple of scheme.dt");
    }
    return E;
}

Scenario parse_scenario_string(const std::string& text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(std::string_view(text), std::string_view(source));
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        throw ScenarioError({{"<syntax>", source + ":" + std::to_string(b.line) + ":" + std::to_string(b.column) +
                                              ": " + std::string(e.description())}});
    }
    std::vector<FieldError> errors;
    Scenario s = read_table(root, errors);
    if (errors.empty()) errors = validate_scenario(s);
    if (!errors.empty()) throw ScenarioError(std::move(errors));
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read scenario file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("error reading scenario file " + path.string());
    return parse_scenario_string(os.str(), path.string());
}

// --- resolved config -----------------------------------------------------------

namespace {

std::string fmt(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, end);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quote(const std::string& s) {
    // Basic TOML string: escape backslash, quote and control characters.
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char b[8];
            std::snprintf(b, sizeof b, "\\u%04x", c);
            out += b;
        } else {
            out += c;
        }
    }
    return out + "\"";
}

template <class T>
std::string list(const std::vector<T>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_integral_v<T>)
            s += std::to_string(v[i]);
        else
            s += fmt(v[i]);
    }
    return s + "]";
}

void coefficient(std::ostream& os, const char* name, const CoefficientConfig& c) {
    os << "\n[model." << name << "]\n"
       << "kind = " << quote(c.kind) << "\n"
       << "value = " << fmt(c.value) << "\n"
       << "mean = " << fmt(c.mean) << "\n"
       << "amplitude = " << fmt(c.amplitude) << "\n"
       << "omega = " << fmt(c.omega) << "\n"
       << "phase = " << fmt(c.phase) << "\n"
       << "start = " << fmt(c.start) << "\n"
       << "slope = " << fmt(c.slope) << "\n"
       << "lo = " << fmt(c.lo) << "\n"
       << "hi = " << fmt(c.hi) << "\n";
}

} // namespace

std::string resolved_config(const Scenario& s) {
    std::ostringstream os;
    os << "seed = " << s.seed << "\n";
    os << "\n[grid]\n"
       << "lengths = " << list(s.grid.lengths) << "\n"
       << "counts = " << list(s.grid.counts) << "\n";
    os << "\n[model]\n"
       << "mu = " << fmt(s.model.mu) << "\n"
       << "lambda = " << fmt(s.model.lambda) << "\n";
    coefficient(os, "alpha", s.model.alpha);
    coefficient(os, "kappa", s.model.kappa);
    const auto& N = s.model.nonlinearity;
    os << "\n[model.nonlinearity]\n"
       << "kind = " << quote(N.kind) << "\n"
       << "c = " << fmt(N.c) << "\n"
       << "rho = " << fmt(N.rho) << "\n"
       << "eta = " << fmt(N.eta) << "\n";
    const auto& F = s.model.forcing;
    os << "\n[model.forcing]\n"
       << "kind = " << quote(F.kind) << "\n"
       << "profile = " << quote(F.profile) << "\n"
       << "mode = " << list(F.mode) << "\n"
       << "amplitude = " << fmt(F.amplitude) << "\n"
       << "period = " << fmt(F.period) << "\n"
       << "duty = " << fmt(F.duty) << "\n"
       << "shifts = " << list(F.shifts) << "\n";
    const auto& S = s.scheme;
    os << "\n[scheme]\n"
       << "dt = " << fmt(S.dt) << "\n"
       << "cfl_safety = " << fmt(S.cfl_safety) << "\n"
       << "record_stride = " << S.record_stride << "\n"
       << "heat_solver = " << quote(S.heat_solver) << "\n"
       << "solver_tolerance = " << fmt(S.solver_tolerance) << "\n"
       << "solver_max_iterations = " << S.solver_max_iterations << "\n";
    const auto& I = s.initial;
    os << "\n[initial]\n"
       << "kind = " << quote(I.kind) << "\n"
       << "displacement = " << fmt(I.displacement) << "\n"
       << "velocity = " << fmt(I.velocity) << "\n"
       << "temperature = " << fmt(I.temperature) << "\n"
       << "hc_norm = " << fmt(I.hc_norm) << "\n"
       << "modes = " << I.modes << "\n";
    const auto& X = s.experiment;
    os << "\n[experiment]\n"
       << "kind = " << quote(to_string(X.kind)) << "\n"
       << "tau = " << fmt(X.tau) << "\n"
       << "T = " << fmt(X.T) << "\n"
       << "lb2_horizon = " << fmt(X.lb2_horizon) << "\n"
       << "fit_radius = " << fmt(X.fit_radius) << "\n"
       << "refit_radius = " << (X.refit_radius ? "true" : "false") << "\n"
       << "imposed_k = " << fmt(X.imposed_k) << "\n"
       << "samples = " << X.samples << "\n"
       << "sample_horizon = " << fmt(X.sample_horizon) << "\n"
       << "ic_count = " << X.ic_count << "\n"
       << "ic_scale = " << fmt(X.ic_scale) << "\n"
       << "ic_norm = " << fmt(X.ic_norm) << "\n"
       << "snapshot_count = " << X.snapshot_count << "\n"
       << "sequence_length = " << X.sequence_length << "\n"
       << "first_index = " << X.first_index << "\n"
       << "base_norm = " << fmt(X.base_norm) << "\n"
       << "perturbation_norm = " << fmt(X.perturbation_norm) << "\n"
       << "levels = " << X.levels << "\n";
    os << "\n[output]\n"
       << "directory = " << quote(s.output.directory) << "\n"
       << "snapshot_times = " << list(s.output.snapshot_times) << "\n"
       << "write_snapshots = " << (s.output.write_snapshots ? "true" : "false") << "\n";
    return os.str();
}

} // namespace lamelab
