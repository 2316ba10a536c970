#pragma once

#include <filesystem>

#include "sib/dataio/dataset.hpp"

namespace sib::dataio {

inline constexpr std::size_t kOrlSubjects = 40;
inline constexpr std::size_t kOrlImagesPerSubject = 10;
inline constexpr std::size_t kOrlWidth = 92;
inline constexpr std::size_t kOrlHeight = 112;

// AT&T / ORL face tree: root/s1 .. root/s40, ten P5 files per subject at the
// native 92×112 resolution. Subject sK gets label K−1; files within a subject
// are visited in numeric-stem order, independent of directory iteration.
Dataset load_orl(const std::filesystem::path& root);

}  // namespace sib::dataio
