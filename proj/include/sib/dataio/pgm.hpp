#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sib/numcore/tensor.hpp"

namespace sib::dataio {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<std::uint8_t> pixels;  // row-major, height × width
};

// Binary (P5) PGM with maxval ≤ 255. ASCII P2 and 16-bit files are rejected.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

// Tiles images (n × width·height, values in [0, 1]) into one P5 file:
// grid_cols tiles per row, 1-pixel separators of value 255 between tiles,
// pixel = round(value · 255).
void write_image_grid(const Tensor2D& images, std::size_t width, std::size_t height, std::size_t grid_cols,
                      const std::filesystem::path& path);

}  // namespace sib::dataio
