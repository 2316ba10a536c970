#include "sib/dataio/orl.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "sib/dataio/pgm.hpp"

namespace sib::dataio {
namespace {

// Numeric stems sort numerically ("2" < "10"), anything else lexicographically after them.
bool stem_less(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto sa = a.stem().string();
  const auto sb = b.stem().string();
  const bool na = !sa.empty() && std::all_of(sa.begin(), sa.end(), ::isdigit);
  const bool nb = !sb.empty() && std::all_of(sb.begin(), sb.end(), ::isdigit);
  if (na && nb) return std::stoull(sa) < std::stoull(sb) || (std::stoull(sa) == std::stoull(sb) && sa < sb);
  if (na != nb) return na;
  return sa < sb;
}

}  // namespace

Dataset load_orl(const std::filesystem::path& root) {
  Dataset out;
  out.class_count = kOrlSubjects;
  out.source = root.string();
  const std::size_t dim = kOrlWidth * kOrlHeight;
  out.images = Tensor2D(kOrlSubjects * kOrlImagesPerSubject, dim);
  std::size_t row = 0;
  for (std::size_t s = 1; s <= kOrlSubjects; ++s) {
    const auto dir = root / ("s" + std::to_string(s));
    if (!std::filesystem::is_directory(dir)) {
      throw DataError(DataError::Kind::missing_entry, "ORL subject directory " + dir.string() + " is missing");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), stem_less);
    if (files.size() != kOrlImagesPerSubject) {
      throw DataError(DataError::Kind::missing_entry, dir.string() + " holds " + std::to_string(files.size()) +
                                                          " .pgm files, expected " +
                                                          std::to_string(kOrlImagesPerSubject));
    }
    for (const auto& file : files) {
      const GrayImage image = read_pgm(file);
      if (image.width != kOrlWidth || image.height != kOrlHeight) {
        throw DataError(DataError::Kind::bad_dimensions, file.string() + " is " + std::to_string(image.width) + "x" +
                                                             std::to_string(image.height) + ", expected 92x112");
      }
      auto dst = out.images.row(row);
      for (std::size_t i = 0; i < dim; ++i) {
        dst[i] = static_cast<float>(image.pixels[i]) / static_cast<float>(image.maxval);
      }
      out.labels.push_back(s - 1);
      ++row;
    }
  }
  return out;
}

}  // namespace sib::dataio
