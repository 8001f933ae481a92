#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kspattern/grid.hpp"
#include "kspattern/simulator.hpp"

namespace kspattern::cli {

/// "N" (square) or "NxM" (nx by ny), unit spacing.
grid_spec parse_grid(std::string_view text);

/// Comma-separated reals; an empty string gives an empty list.
std::vector<double> parse_reals(std::string_view text);

/// Comma-separated "i:j" pairs.
std::vector<probe> parse_probes(std::string_view text);

/// Shortest round-trip-safe text of a double.
std::string format_real(double x);

/// Compact tag used in file names, e.g. 0.6 -> "0.6", 180 -> "180".
std::string time_tag(double t);

/// Writes `rows` of already formatted cells under `header`.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_probe_csv(const std::filesystem::path& path, const probe_series& s);
void write_means_csv(const std::filesystem::path& path, const mean_series& m);

}  // namespace kspattern::cli
