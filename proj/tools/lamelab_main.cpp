#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lamelab/execute.hpp"
#include "lamelab/scenario.hpp"

namespace {

struct Flags {
    std::string scenario;
    std::string out;
    int threads = 1;
    long long seed = -1;
};

int dispatch(std::optional<lamelab::ExperimentKind> kind, const Flags& f) {
    lamelab::Scenario sc;
    try {
        sc = lamelab::parse_scenario(f.scenario);
    } catch (const lamelab::ScenarioError& e) {
        std::cerr << e.to_json() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lamelab::exit_code_for(e);
    }
    if (kind) sc.experiment.kind = *kind;

    lamelab::ExecuteOptions opts;
    opts.threads = f.threads;
    if (!f.out.empty()) opts.out_dir = f.out;
    if (f.seed >= 0) opts.seed = static_cast<std::uint64_t>(f.seed);

    const auto result = lamelab::execute(sc, opts);
    if (result.exit_code != 0) {
        std::cerr << "error in stage '" << result.failed_stage << "': " << result.message << "\n";
        std::cerr << "partial artifacts in " << result.out_dir.string() << " (see MANIFEST)\n";
    } else {
        std::cout << lamelab::to_string(sc.experiment.kind) << ": " << result.artifacts.size() << " artifacts in "
                  << result.out_dir.string() << "\n";
    }
    return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-autonomous Lame thermoelastic laboratory"};
    app.set_version_flag("--version", lamelab::library_version());
    app.require_subcommand(0, 1);
    app.footer("Without a subcommand the experiment kind comes from the scenario file.");

    Flags flags;
    app.add_option("--scenario", flags.scenario, "Scenario TOML file");
    app.add_option("--out", flags.out, "Output directory (overrides output.directory)");
    app.add_option("--threads", flags.threads, "Worker threads for ensembles and pairs")
        ->check(CLI::Range(1, 1024));
    app.add_option("--seed", flags.seed, "Seed override")->check(CLI::NonNegativeNumber);

    struct Entry {
        lamelab::ExperimentKind kind;
        const char* help;
    };
    const Entry entries[] = {
        {lamelab::ExperimentKind::run, "Integrate one trajectory with diagnostics and margins"},
        {lamelab::ExperimentKind::constants, "Compute the constant ledger"},
        {lamelab::ExperimentKind::assumptions, "Check the structural assumptions on the model"},
        {lamelab::ExperimentKind::absorbing, "Absorbing-set entry test over an ensemble"},
        {lamelab::ExperimentKind::attractor, "Ensemble approximation of the uniform attractor"},
        {lamelab::ExperimentKind::contraction, "Contraction function on a geometric sequence"},
        {lamelab::ExperimentKind::convergence, "Energy identity and margin refinement study"},
    };
    std::optional<lamelab::ExperimentKind> chosen;
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(lamelab::to_string(e.kind), e.help);
        sub->fallthrough();
        sub->add_option("--scenario", flags.scenario, "Scenario TOML file");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--threads", flags.threads, "Worker threads")->check(CLI::Range(1, 1024));
        sub->add_option("--seed", flags.seed, "Seed override")->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, kind = e.kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (flags.scenario.empty()) {
        std::cerr << "error: --scenario is required\n";
        return 2;
    }
    return dispatch(chosen, flags);
}
