#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lamelab/errors.hpp"
#include "lamelab/grid.hpp"
#include "lamelab/integrator.hpp"
#include "lamelab/model.hpp"

namespace lamelab {

enum class ExperimentKind { run, constants, assumptions, absorbing, attractor, contraction, convergence };

const char* to_string(ExperimentKind k);
/// Throws ValidationError for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

struct FieldError {
    std::string path;      ///< dotted path such as "scheme.dt" or "model.forcing.shifts[2]"
    std::string message;
    bool operator==(const FieldError&) const = default;
};

/// Rejected scenario; carries every problem found.
class ScenarioError : public ValidationError {
public:
    explicit ScenarioError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }
    /// {"errors": [{"path": ..., "message": ...}, ...]}
    std::string to_json() const;

private:
    std::vector<FieldError> errors_;
};

struct GridConfig {
    std::vector<double> lengths{1.0};
    std::vector<int> counts{31};
    GridSpec build() const;
    bool operator==(const GridConfig&) const = default;
};

/// constant {value}; sinusoidal {mean, amplitude, omega, phase}; ramp {start, slope, lo, hi}.
struct CoefficientConfig {
    std::string kind = "constant";
    double value = 1.0;
    double mean = 1.0, amplitude = 0.0, omega = 1.0, phase = 0.0;
    double start = 1.0, slope = 0.0, lo = 1.0, hi = 1.0;
    TimeCoefficient build() const;
    bool operator==(const CoefficientConfig&) const = default;
};

struct NonlinearityConfig {
    std::string kind = "zero";   ///< zero | power
    double c = 1.0;
    double rho = 2.0;
    double eta = 1.0;
    Nonlinearity build() const;
    bool operator==(const NonlinearityConfig&) const = default;
};

/// Forcing g(x, t) = amplitude * prod_i sin(m_i pi x_i / L_i) * temporal(t + shift).
struct ForcingConfig {
    std::string kind = "static";       ///< static | time_periodic | quasi_periodic | pulse_train
    std::string profile = "zero";      ///< zero | mode
    std::vector<int> mode{1};          ///< per-axis mode numbers (cycled over axes)
    double amplitude = 1.0;
    double period = 1.0;
    double duty = 0.5;
    std::vector<double> shifts{0.0};   ///< hull net translates
    ForcingSymbol build(const GridSpec& grid) const;
    bool operator==(const ForcingConfig&) const = default;
};

struct ModelConfig {
    double mu = 1.0;
    double lambda = 0.0;
    CoefficientConfig alpha, kappa;
    NonlinearityConfig nonlinearity;
    ForcingConfig forcing;
    ModelSpec build() const;
    bool operator==(const ModelConfig&) const = default;
};

struct SchemeSettings {
    double dt = 0.01;
    double cfl_safety = 0.5;
    int record_stride = 1;
    std::string heat_solver = "sine_transform";   ///< sine_transform | conjugate_gradient
    double solver_tolerance = 1e-12;
    long solver_max_iterations = 0;               ///< 0: 4 N
    SchemeConfig build() const;
    bool operator==(const SchemeSettings&) const = default;
};

/// Initial state: mode amplitudes of the first eigenfunction, or a seeded random smooth field.
struct InitialConfig {
    std::string kind = "mode";     ///< zero | mode | random
    double displacement = 1.0;     ///< coefficient of the first mode in every u component
    double velocity = 0.0;
    double temperature = 0.0;
    double hc_norm = 1.0;          ///< random: target |U|_{H_c}
    int modes = 3;                 ///< random: sine modes per axis
    State build(const GridSpec& grid, const ModelSpec& model, double t, std::uint64_t seed) const;
    bool operator==(const InitialConfig&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::run;
    double tau = 0.0;
    double T = 1.0;
    // ledger inputs (every experiment that computes constants)
    double lb2_horizon = 4.0;
    double fit_radius = 1.0;
    bool refit_radius = false;
    double imposed_k = 0.0;        ///< > 0 replaces the estimated k
    // assumptions
    int samples = 1000;
    double sample_horizon = 100.0;
    // absorbing / attractor ensembles
    int ic_count = 5;
    double ic_scale = 10.0;        ///< absorbing: initial |U| as a multiple of rho0
    double ic_norm = 1.0;          ///< attractor: initial |U|
    int snapshot_count = 8;        ///< dyadic snapshot times
    // contraction
    int sequence_length = 6;
    int first_index = 1;
    double base_norm = 1.0;
    double perturbation_norm = 1.0;
    // convergence
    int levels = 3;
    bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<double> snapshot_times;
    bool write_snapshots = true;
    bool operator==(const OutputConfig&) const = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    GridConfig grid;
    ModelConfig model;
    SchemeSettings scheme;
    InitialConfig initial;
    ExperimentConfig experiment;
    OutputConfig output;
    bool operator==(const Scenario&) const = default;
};

/// Parses TOML text. Syntax errors report line and column; semantic errors carry field paths.
/// Throws ScenarioError.
Scenario parse_scenario_string(const std::string& text, const std::string& source = "<string>");
/// Reads and parses a file; IoError when it cannot be read.
Scenario parse_scenario(const std::filesystem::path& path);

/// Cross-field checks (CFL, eta range, dt alignment, ranges). Empty when valid.
std::vector<FieldError> validate_scenario(const Scenario& s);

/// Every field, defaults included, as TOML that parses back to an equal Scenario.
std::string resolved_config(const Scenario& s);

} // namespace lamelab
