#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace kspattern {

/// Grayscale raster with luminance in [0, 1], row-major from the top row.
struct gray_image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  double at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
};

/// Reads PNG (any color type; color is reduced to Rec. 601 luma) or binary
/// / ASCII PGM, detected from the file signature. Throws ingestion_fault.
gray_image read_image(const std::filesystem::path& path);
gray_image read_png(const std::filesystem::path& path);
gray_image read_pgm(const std::filesystem::path& path);

/// 8-bit writers; pixel values are clamped to [0, 1].
void write_png(const std::filesystem::path& path, const gray_image& img);
void write_pgm(const std::filesystem::path& path, const gray_image& img,
               bool binary);

}  // namespace kspattern
