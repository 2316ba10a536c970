#include "sib/dataio/pgm.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "sib/numcore/archive.hpp"

namespace sib::dataio {
namespace {

class HeaderParser {
 public:
  HeaderParser(const std::vector<std::uint8_t>& bytes, std::string file) : bytes_(bytes), file_(std::move(file)) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw DataError(DataError::Kind::corrupt, file_ + ": malformed PGM header");
    }
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) v = v * 10 + (bytes_[pos_++] - '0');
    return v;
  }

  std::size_t& position() { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string file_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string file = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P') throw DataError(DataError::Kind::bad_magic, file + ": not a PNM file");
  if (bytes[1] != '5') {
    throw DataError(DataError::Kind::unsupported_format,
                    file + ": unsupported PNM variant P" + std::string(1, static_cast<char>(bytes[1])) +
                        " (only binary P5 is accepted)");
  }
  HeaderParser header(bytes, file);
  header.position() = 2;
  GrayImage image;
  image.width = header.number();
  image.height = header.number();
  image.maxval = static_cast<unsigned>(header.number());
  if (image.maxval == 0 || image.maxval > 255) {
    throw DataError(DataError::Kind::unsupported_format, file + ": maxval " + std::to_string(image.maxval) +
                                                             " is not supported (1..255)");
  }
  // Exactly one whitespace byte separates the header from the raster.
  std::size_t pos = header.position() + 1;
  const std::size_t count = image.width * image.height;
  if (pos + count > bytes.size()) throw DataError(DataError::Kind::truncated, file + ": truncated PGM raster");
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  for (auto p : image.pixels) {
    if (p > image.maxval) throw DataError(DataError::Kind::corrupt, file + ": pixel exceeds maxval");
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) throw DimensionError("write_pgm: pixel count mismatch");
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n" +
                    std::to_string(image.maxval) + "\n";
  out.append(image.pixels.begin(), image.pixels.end());
  write_file_atomic(path, out);
}

void write_image_grid(const Tensor2D& images, std::size_t width, std::size_t height, std::size_t grid_cols,
                      const std::filesystem::path& path) {
  if (images.cols() != width * height) {
    throw ValidationError("write_image_grid: image dim " + std::to_string(images.cols()) + " != " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (grid_cols == 0 || images.rows() == 0) throw ValidationError("write_image_grid: empty grid");
  for (float v : images.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("write_image_grid: value outside [0, 1]");
  }
  const std::size_t cols = std::min(grid_cols, images.rows());
  const std::size_t rows = (images.rows() + grid_cols - 1) / grid_cols;
  GrayImage grid;
  grid.width = cols * width + (cols - 1);
  grid.height = rows * height + (rows - 1);
  grid.pixels.assign(grid.width * grid.height, 255);
  for (std::size_t n = 0; n < images.rows(); ++n) {
    const std::size_t x0 = (n % grid_cols) * (width + 1);
    const std::size_t y0 = (n / grid_cols) * (height + 1);
    auto src = images.row(n);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        grid.pixels[(y0 + y) * grid.width + x0 + x] =
            static_cast<std::uint8_t>(std::lround(static_cast<double>(src[y * width + x]) * 255.0));
      }
    }
  }
  write_pgm(path, grid);
}

}  // namespace sib::dataio
