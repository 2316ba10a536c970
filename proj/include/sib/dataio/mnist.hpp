#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sib/dataio/dataset.hpp"

namespace sib::dataio {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads an IDX image/label pair (raw or gzip-compressed, detected by the
// 1f 8b signature). Pixels are scaled by 1/255; images are flattened row-major.
Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

// Raw file contents, transparently gunzipped.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

}  // namespace sib::dataio
