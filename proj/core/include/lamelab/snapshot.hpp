#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lamelab/grid.hpp"

namespace lamelab {

/// Binary field snapshot: "LTHS", u32 LE version, u64 LE header length,
/// JSON header {dim, lengths, interior_counts, field_names, time}, then
/// little-endian f64 data per field in header order.
inline constexpr unsigned snapshot_version = 1;

std::vector<std::string> snapshot_field_names(int dim);

std::string encode_snapshot(const State& s);
State decode_snapshot(const std::string& bytes);

void write_snapshot(const std::filesystem::path& path, const State& s);
State read_snapshot(const std::filesystem::path& path);

} // namespace lamelab
