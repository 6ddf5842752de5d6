#include "lamelab/execute.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>

#include "lamelab/attractor.hpp"
#include "lamelab/diagnostics.hpp"
#include "lamelab/ledger.hpp"
#include "lamelab/operator_constants.hpp"
#include "lamelab/snapshot.hpp"

#ifndef LAMELAB_VERSION
#define LAMELAB_VERSION "0.0.0"
#endif

namespace lamelab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* library_version() { return LAMELAB_VERSION; }

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
    return 3;
}

std::string format_number(double x, int digits) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    const fs::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

    void text(const std::string& rel, const std::string& content) {
        const fs::path p = dir_ / rel;
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + p.string());
        out << content;
        out.close();
        if (!out) throw IoError("error writing " + p.string());
        note(rel);
    }

    void snapshot(const std::string& rel, const State& s) {
        const fs::path p = dir_ / rel;
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        write_snapshot(p, s);
        note(rel);
    }

private:
    void note(const std::string& rel) {
        if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
    }

    fs::path dir_;
    std::vector<std::string> files_;
};

std::string csv_row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line += ',';
        line += format_number(values[i]);
    }
    return line + '\n';
}

std::string csv_header(std::initializer_list<const char*> names) {
    std::string line;
    for (const char* n : names) {
        if (!line.empty()) line += ',';
        line += n;
    }
    return line + '\n';
}

struct Setup {
    GridSpec grid;
    ModelSpec model;
    SchemeConfig scheme;
    ForcingSymbol base;
    std::vector<ForcingSymbol> symbols;
};

Setup prepare(const Scenario& sc, int refinement = 0) {
    Setup s;
    GridConfig gc = sc.grid;
    for (int& n : gc.counts) n = (n + 1) * (1 << refinement) - 1;
    s.grid = gc.build();
    s.model = sc.model.build();
    s.scheme = sc.scheme.build();
    s.scheme.dt = sc.scheme.dt / static_cast<double>(1 << refinement);
    s.scheme.validate(s.grid, s.model);
    s.base = sc.model.forcing.build(s.grid);
    s.symbols = hull_net(s.base, sc.model.forcing.shifts);
    return s;
}

ConstantLedger ledger_for(const Setup& s, const Scenario& sc) {
    LedgerInputs in;
    in.model = s.model;
    in.grid = s.grid;
    in.q = build_q(s.grid);
    // The box admits the exact sine-transform solve; the scheme's heat solver only drives stepping.
    in.operators = estimate_operator_constants(s.grid, PoissonSolverSpec{});
    in.g0_lb2_sq = lb2_norm_estimate(s.base, sc.experiment.lb2_horizon, s.scheme.dt);
    in.imposed_k = sc.experiment.imposed_k;
    in.r = sc.experiment.fit_radius;
    in.refit_radius = sc.experiment.refit_radius;
    return compute_constants(in);
}

json ledger_headline(const ConstantLedger& L) {
    return json{{"P", number(L.P)},       {"delta", number(L.delta)}, {"epsilon", number(L.epsilon)},
                {"N0", number(L.N0)},     {"xi1", number(L.xi1)},     {"rho0", number(L.rho0)},
                {"k", number(L.k)},       {"k_c", number(L.k_c)},     {"k_g", number(L.k_g)},
                {"C_tr", number(L.C_tr)}, {"beta0", number(L.beta0)}, {"g0_lb2_sq", number(L.g0_lb2_sq)}};
}

/// Diagnostics streamed during a run; keeps memory independent of the horizon.
struct Recorder {
    const Stepper& stepper;
    const ModelSpec& model;
    QField q;
    PoissonSolverSpec spec;
    double profile_sq;
    std::vector<DiagnosticRow> rows;

    void operator()(const State& s, long tick) {
        const double a = stepper.forcing_factor_at(tick);
        rows.push_back(diagnose(s, a * a * profile_sq, model, q, spec));
    }
};

std::string trajectory_csv(const std::vector<DiagnosticRow>& rows, const MarginsReport* margins) {
    std::string out;
    for (const char* c : trajectory_columns) {
        if (!out.empty()) out += ',';
        out += c;
    }
    out += '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const DiagnosticRow& r = rows[i];
        const MarginRow* m = margins ? &margins->rows[i] : nullptr;
        out += csv_row({r.time, r.E, r.E_c, r.F1, r.F2, r.F3, m ? m->L : nan, r.grad_theta_sq, r.g_norm_sq,
                        r.hc_norm_sq, m ? m->margin(0) : nan, m ? m->margin(1) : nan, m ? m->margin(2) : nan,
                        m ? m->margin(3) : nan, m ? m->margin(4) : nan, m ? m->envelope_rhs : nan});
    }
    return out;
}

std::string margins_csv(const MarginsReport& rep) {
    std::string out = "time";
    for (const char* id : inequality_ids) {
        std::string s(id);
        std::replace(s.begin(), s.end(), '.', '_');
        out += ",lhs_" + s + ",rhs_" + s + ",margin_" + s;
    }
    out += ",L,envelope_rhs,envelope_margin\n";
    for (const MarginRow& m : rep.rows) {
        std::vector<double> v{m.time};
        for (int k = 0; k < 5; ++k) {
            v.push_back(m.lhs[k]);
            v.push_back(m.rhs[k]);
            v.push_back(m.margin(k));
        }
        v.push_back(m.L);
        v.push_back(m.envelope_rhs);
        v.push_back(m.envelope_margin);
        out += csv_row(v);
    }
    return out;
}

json margins_summary(const MarginsReport& rep) {
    json j = json::object();
    for (const auto& s : rep.summary)
        j[s.id] = {{"min_margin", number(s.min_margin)}, {"violation", number(s.violation)}};
    j["approximate_q"] = rep.approximate_q;
    return j;
}

// --- experiments ---------------------------------------------------------------

struct Context {
    const Scenario& sc;
    std::uint64_t seed;
    int threads;
    Output& out;
    json& metrics;
    json& ledger;
    std::string& stage;
};

void write_ledger(Context& c, const ConstantLedger& L) {
    const std::string text = ledger_json(L);
    c.out.text("ledger.json", text + "\n");
    c.ledger = json::parse(text);
}

void experiment_run(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    const ForcingSymbol& g = s.symbols.front();
    const double tau = c.sc.experiment.tau, T = c.sc.experiment.T;
    const State U0 = c.sc.initial.build(s.grid, s.model, tau, c.seed);

    c.stage = "ledger";
    std::optional<ConstantLedger> L;
    try {
        L = ledger_for(s, c.sc);
        write_ledger(c, *L);
    } catch (const ValidationError& e) {
        c.metrics["ledger_error"] = e.what();
    } catch (const NumericalError& e) {
        c.metrics["ledger_error"] = e.what();
    }

    c.stage = "integrate";
    const Stepper st(s.model, g, s.scheme);
    Recorder rec{st, s.model, build_q(s.grid), s.scheme.heat_solver, l2_norm_sq(g.profile()), {}};
    RunOptions opts;
    opts.keep_states = false;
    opts.snapshot_times = c.sc.output.snapshot_times;
    opts.observer = std::ref(rec);
    TrajectoryRecord tr;
    try {
        tr = run(U0, tau, T, g, s.model, s.scheme, opts);
    } catch (const NumericalError&) {
        c.stage = "integrate";
        c.out.text("trajectory.csv", trajectory_csv(rec.rows, nullptr));
        throw;
    }

    c.stage = "diagnostics";
    std::optional<MarginsReport> margins;
    if (L) margins = inequality_ledger(rec.rows, *L);

    c.stage = "write";
    c.out.text("trajectory.csv", trajectory_csv(rec.rows, margins ? &*margins : nullptr));
    if (margins) {
        c.out.text("margins.csv", margins_csv(*margins));
        c.metrics["inequalities"] = margins_summary(*margins);
    }
    if (c.sc.output.write_snapshots && !tr.snapshots.empty()) {
        json index = json::array();
        for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshots/snapshot_%04zu.lths", i);
            c.out.snapshot(name, tr.snapshots[i]);
            index.push_back({{"time", tr.snapshot_times[i]}, {"file", name}});
        }
        c.out.text("snapshots/index.json", index.dump(2) + "\n");
    }

    double E_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : rec.rows) E_max = std::max(E_max, r.E);
    c.metrics["steps"] = tr.steps;
    c.metrics["rows"] = rec.rows.size();
    c.metrics["final_time"] = tr.final_state.t;
    c.metrics["E_initial"] = number(rec.rows.front().E);
    c.metrics["E_final"] = number(rec.rows.back().E);
    c.metrics["E_max"] = number(E_max);
    c.metrics["hc_norm_final"] = number(std::sqrt(rec.rows.back().hc_norm_sq));
}

void experiment_constants(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    c.stage = "ledger";
    const ConstantLedger L = ledger_for(s, c.sc);
    c.stage = "write";
    write_ledger(c, L);
    c.metrics = ledger_headline(L);
    c.metrics["identity_residuals"] = L.identity_residuals();
    c.metrics["coefficient_margins"] = L.coefficient_margins();
}

void experiment_assumptions(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    c.stage = "assumptions";
    const AssumptionReport rep =
        validate_assumptions(s.model, s.grid, c.sc.experiment.samples, c.sc.experiment.sample_horizon);
    c.stage = "write";
    json checks = json::array();
    for (const auto& ch : rep.checks)
        checks.push_back({{"name", ch.name},
                          {"passed", ch.passed},
                          {"hard", ch.hard},
                          {"max_violation", number(ch.max_violation)},
                          {"detail", ch.detail}});
    json j{{"passed", rep.passed()},
           {"fitted_growth_constant", number(rep.fitted_growth_constant)},
           {"fitted_second_derivative", number(rep.fitted_second_derivative)},
           {"checks", checks}};
    c.out.text("assumptions.json", j.dump(2) + "\n");
    c.metrics["passed"] = rep.passed();
    json failed = json::array();
    for (const auto& ch : rep.checks)
        if (!ch.passed) failed.push_back(ch.name);
    c.metrics["failed_checks"] = failed;
}

void experiment_absorbing(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    const auto& X = c.sc.experiment;
    c.stage = "ledger";
    const ConstantLedger L = ledger_for(s, c.sc);
    write_ledger(c, L);
    c.stage = "ensemble";
    EnsembleSpec ens = make_ensemble(s.grid, s.model, {X.ic_scale * L.rho0}, X.ic_count, s.symbols, X.tau, c.seed);
    ens.threads = c.threads;
    c.stage = "integrate";
    const AbsorbingReport rep = absorbing_check(ens, L, X.T, s.model, s.scheme);
    c.stage = "write";
    std::string csv = csv_header({"ic", "symbol", "initial_hc_norm", "initial_energy", "entry_time",
                                  "predicted_entry", "within_slack", "exits", "max_ratio_after_entry",
                                  "final_hc_norm", "failed"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    long exits = 0;
    double latest = 0.0;
    json errors = json::array();
    for (const auto& m : rep.members) {
        csv += csv_row({double(m.ic), double(m.symbol), std::sqrt(m.initial_hc_norm_sq), m.initial_energy,
                        m.entry_time ? *m.entry_time : nan, m.predicted_entry, m.within_slack ? 1.0 : 0.0,
                        double(m.exits), m.max_ratio_after_entry, std::sqrt(m.final_hc_norm_sq),
                        m.failed ? 1.0 : 0.0});
        exits += m.exits;
        if (m.entry_time) latest = std::max(latest, *m.entry_time);
        if (m.failed) errors.push_back(m.error);
    }
    c.out.text("absorbing.csv", csv);
    c.metrics["passed"] = rep.passed();
    c.metrics["rho0"] = number(L.rho0);
    c.metrics["members"] = rep.members.size();
    c.metrics["latest_entry"] = latest;
    c.metrics["predicted_entry"] = number(rep.members.empty() ? nan : rep.members.front().predicted_entry);
    c.metrics["exits"] = exits;
    c.metrics["member_errors"] = errors;
}

void experiment_attractor(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    const auto& X = c.sc.experiment;
    c.stage = "ensemble";
    EnsembleSpec ens = make_ensemble(s.grid, s.model, {X.ic_norm}, X.ic_count, s.symbols, X.tau, c.seed);
    ens.threads = c.threads;
    ens.snapshot_times = dyadic_times(X.tau, X.T, X.snapshot_count, s.scheme.dt);
    c.stage = "integrate";
    const AttractorApproximation A = attractor_approximate(ens, X.T, s.model, s.scheme);
    c.stage = "write";
    std::string csv = csv_header({"time", "decay", "cloud_size", "max_hc_norm"});
    for (std::size_t k = 0; k < A.times.size(); ++k) {
        const auto& norms = A.clouds[k].hc_norms;
        const double mx = norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
        csv += csv_row({A.times[k], A.decay_series[k], double(norms.size()), mx});
    }
    c.out.text("decay_series.csv", csv);
    if (c.sc.output.write_snapshots) {
        json index{{"time", A.final_cloud.time}, {"points", json::array()}};
        for (std::size_t i = 0; i < A.final_cloud.points.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "cloud/point_%04zu.lths", i);
            c.out.snapshot(name, A.final_cloud.points[i]);
            index["points"].push_back({{"file", name}, {"hc_norm", A.final_cloud.hc_norms[i]}});
        }
        c.out.text("cloud/index.json", index.dump(2) + "\n");
    }
    c.metrics["members"] = ens.member_count();
    c.metrics["excluded"] = A.excluded;
    c.metrics["decay_initial"] = number(A.decay_series.front());
    c.metrics["decay_final"] = number(A.decay_series.back());
    c.metrics["max_jitter"] = number(A.max_jitter);
    c.metrics["nonincreasing"] = A.nonincreasing();
}

void experiment_contraction(Context& c) {
    c.stage = "setup";
    const Setup s = prepare(c.sc);
    const auto& X = c.sc.experiment;
    const State U = random_smooth_state(s.grid, s.model, X.base_norm, c.seed, 3, X.tau);
    const State W = random_smooth_state(s.grid, s.model, X.perturbation_norm, c.seed + 1, 3, X.tau);
    const auto seq = geometric_sequence(U, W, X.sequence_length, X.first_index);
    const std::vector<ForcingSymbol> gs{s.symbols.front()};
    c.stage = "integrate";
    const ContractionReport rep = contraction_test(seq, gs, X.T, s.model, s.scheme, c.threads);
    const auto matrix = contraction_matrix(seq, gs, X.T, s.model, s.scheme, c.threads);
    c.stage = "write";
    std::string csv = csv_header({"i", "j", "E_Z", "phi", "C_B", "C_M", "bound", "inequality_holds"});
    for (const auto& p : rep.pairs)
        csv += csv_row({double(p.i), double(p.j), p.E_Z, p.phi, p.C_B, p.C_M, p.bound, p.inequality_holds ? 1.0 : 0.0});
    c.out.text("contraction.csv", csv);
    std::string mcsv;
    for (const auto& row : matrix) mcsv += csv_row(row);
    c.out.text("phi_matrix.csv", mcsv);
    c.metrics["horizon"] = rep.horizon;
    c.metrics["ratios"] = rep.ratios;
    c.metrics["monotone"] = rep.monotone;
    c.metrics["final_fraction"] = number(rep.final_fraction);
    c.metrics["all_inequalities_hold"] = rep.all_inequalities_hold();
    c.metrics["note"] = "designed geometric sequences only; a finite ensemble cannot certify contractivity "
                        "over all sequences";
}

void experiment_convergence(Context& c) {
    const auto& X = c.sc.experiment;
    std::string csv = csv_header({"level", "nodes", "dt", "energy_residual_max", "violation_3_28", "min_margin_3_1"});
    std::vector<double> res, viol;
    json levels = json::array();
    for (int lvl = 0; lvl < X.levels; ++lvl) {
        c.stage = "setup level " + std::to_string(lvl);
        const Setup s = prepare(c.sc, lvl);
        const ForcingSymbol& g = s.symbols.front();
        const State U0 = c.sc.initial.build(s.grid, s.model, X.tau, c.seed);
        c.stage = "energy identity level " + std::to_string(lvl);
        const auto r = energy_identity_residuals(U0, X.tau, X.T, g, s.model, s.scheme);
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        c.stage = "ledger level " + std::to_string(lvl);
        const ConstantLedger L = ledger_for(s, c.sc);
        c.stage = "integrate level " + std::to_string(lvl);
        const Stepper st(s.model, g, s.scheme);
        Recorder rec{st, s.model, build_q(s.grid), s.scheme.heat_solver, l2_norm_sq(g.profile()), {}};
        RunOptions opts;
        opts.keep_states = false;
        opts.observer = std::ref(rec);
        run(U0, X.tau, X.T, g, s.model, s.scheme, opts);
        const MarginsReport m = inequality_ledger(rec.rows, L);
        res.push_back(rmax);
        viol.push_back(m.summary[4].violation);
        csv += csv_row({double(lvl), double(s.grid.size()), s.scheme.dt, rmax, m.summary[4].violation,
                        m.summary[0].min_margin});
        levels.push_back({{"nodes", s.grid.size()},
                          {"dt", s.scheme.dt},
                          {"energy_residual_max", number(rmax)},
                          {"inequalities", margins_summary(m)}});
    }
    c.stage = "write";
    c.out.text("convergence.csv", csv);
    auto orders = [](const std::vector<double>& v) {
        json o = json::array();
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            o.push_back(v[i] > 0.0 && v[i + 1] > 0.0 ? number(std::log2(v[i] / v[i + 1])) : json(nullptr));
        return o;
    };
    c.metrics["levels"] = levels;
    c.metrics["energy_residual_orders"] = orders(res);
    c.metrics["violation_reduction"] = [&] {
        json o = json::array();
        for (std::size_t i = 0; i + 1 < viol.size(); ++i)
            o.push_back(viol[i + 1] > 0.0 ? number(viol[i] / viol[i + 1]) : json(nullptr));
        return o;
    }();
}

const char* error_kind(const std::exception& e) {
    switch (exit_code_for(e)) {
    case 2: return "validation";
    case 4: return "io";
    default: return "numerical";
    }
}

} // namespace

ExecutionResult execute(const Scenario& scenario, const ExecuteOptions& options) {
    ExecutionResult result;
    result.out_dir = options.out_dir ? *options.out_dir : fs::path(scenario.output.directory);
    Scenario sc = scenario;
    if (options.seed) sc.seed = *options.seed;
    if (options.out_dir) sc.output.directory = options.out_dir->string();

    std::unique_ptr<Output> out;
    try {
        out = std::make_unique<Output>(result.out_dir);
    } catch (const IoError& e) {
        result.exit_code = 4;
        result.failed_stage = "output";
        result.message = e.what();
        return result;
    }

    const auto t0 = std::chrono::steady_clock::now();
    json metrics = json::object();
    json ledger;
    std::string stage = "validate";
    try {
        const auto errors = validate_scenario(sc);
        if (!errors.empty()) throw ScenarioError(errors);
        out->text("resolved-config.toml", resolved_config(sc));
        Context ctx{sc, sc.seed, std::max(1, options.threads), *out, metrics, ledger, stage};
        switch (sc.experiment.kind) {
        case ExperimentKind::run: experiment_run(ctx); break;
        case ExperimentKind::constants: experiment_constants(ctx); break;
        case ExperimentKind::assumptions: experiment_assumptions(ctx); break;
        case ExperimentKind::absorbing: experiment_absorbing(ctx); break;
        case ExperimentKind::attractor: experiment_attractor(ctx); break;
        case ExperimentKind::contraction: experiment_contraction(ctx); break;
        case ExperimentKind::convergence: experiment_convergence(ctx); break;
        }
        stage.clear();
    } catch (const std::exception& e) {
        result.exit_code = exit_code_for(e);
        result.failed_stage = stage;
        result.message = e.what();
        metrics["error"] = {{"kind", error_kind(e)}, {"stage", stage}, {"message", e.what()}};
        if (const auto* se = dynamic_cast<const ScenarioError*>(&e)) {
            json list = json::array();
            for (const auto& fe : se->errors()) list.push_back({{"path", fe.path}, {"message", fe.message}});
            metrics["error"]["fields"] = list;
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    try {
        json summary;
        summary["experiment"] = to_string(sc.experiment.kind);
        summary["status"] = result.exit_code == 0 ? "complete" : "incomplete";
        summary["exit_code"] = result.exit_code;
        summary["seed"] = sc.seed;
        summary["threads"] = std::max(1, options.threads);
        summary["versions"] = {{"lamelab", library_version()}, {"fftw", std::string(fftw_version)}};
        summary["wall_clock"] = "timing.json";
        summary["metrics"] = metrics;
        if (!ledger.is_null()) summary["ledger"] = ledger;
        out->text("summary.json", summary.dump(2) + "\n");

        char secs[64];
        std::snprintf(secs, sizeof secs, "%.6f", seconds);
        out->text("timing.json", std::string("{\n  \"wall_clock_seconds\": ") + secs + "\n}\n");

        std::ostringstream mf;
        mf << "status: " << (result.exit_code == 0 ? "complete" : "incomplete") << "\n";
        if (result.exit_code != 0) mf << "failed_stage: " << result.failed_stage << "\n";
        mf << "experiment: " << to_string(sc.experiment.kind) << "\n";
        mf << "deterministic: all files except timing.json\n";
        mf << "files:\n";
        for (const auto& f : out->files()) {
            std::error_code ec;
            const auto size = fs::file_size(out->dir() / f, ec);
            mf << "  " << f << " " << (ec ? 0 : size) << "\n";
        }
        out->text("MANIFEST", mf.str());
    } catch (const std::exception& e) {
        if (result.exit_code == 0) {
            result.exit_code = 4;
            result.failed_stage = "write";
            result.message = e.what();
        }
    }
    result.artifacts = out->files();
    return result;
}

} // namespace lamelab
