#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lamelab/scenario.hpp"

namespace lamelab {

const char* library_version();

struct ExecuteOptions {
    std::optional<std::filesystem::path> out_dir;   ///< overrides output.directory
    std::optional<std::uint64_t> seed;              ///< overrides the scenario seed
    int threads = 1;
};

struct ExecutionResult {
    int exit_code = 0;
    std::string failed_stage;     ///< empty on success
    std::string message;
    std::filesystem::path out_dir;
    std::vector<std::string> artifacts;   ///< relative paths, in write order
};

/// 0 success, 2 validation, 3 numerical, 4 I/O.
int exit_code_for(const std::exception& e);

/// Runs the scenario's experiment and writes its artifacts. Never throws for experiment failures:
/// summary.json and MANIFEST are written in every case, flagging incomplete runs.
ExecutionResult execute(const Scenario& scenario, const ExecuteOptions& options = {});

/// Writes `digits` significant digits, "nan"/"inf" for non-finite values.
std::string format_number(double x, int digits = 17);

inline constexpr const char* trajectory_columns[] = {
    "time", "E", "E_c", "F1", "F2", "F3", "L", "grad_theta_sq", "g_norm_sq", "hc_norm_sq",
    "margin_3_1", "margin_3_3", "margin_3_8", "margin_3_18", "margin_3_28", "envelope_rhs"};

} // namespace lamelab
