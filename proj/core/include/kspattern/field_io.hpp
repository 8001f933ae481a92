#pragma once

#include <filesystem>
#include <iosfwd>

#include "kspattern/grid.hpp"
#include "kspattern/image_io.hpp"

namespace kspattern {

/// Plain-text matrix: ny lines of nx comma-separated values in %.17g, so a
/// round trip through text is exact.
void write_field_csv(std::ostream& os, const scalar_field& f);
void write_field_csv(const std::filesystem::path& path, const scalar_field& f);
scalar_field read_field_csv(const std::filesystem::path& path, double h = 1.0);

/// Linear gray map with `lo` as black and `hi` as white.
gray_image field_to_image(const scalar_field& f, double lo, double hi);

/// Grids of at most ascii_pgm_limit points are written as ASCII P2,
/// larger ones as binary P5.
inline constexpr std::size_t ascii_pgm_limit = 64 * 64;
void write_field_pgm(const std::filesystem::path& path, const scalar_field& f,
                     double lo, double hi);

}  // namespace kspattern
