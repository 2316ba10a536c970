#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sib/numcore/tensor.hpp"

namespace sib::dataio {

struct Dataset {
  Tensor2D images;                  // n × d, every value in [0, 1]
  std::vector<std::size_t> labels;  // n labels in [0, class_count)
  std::size_t class_count = 0;
  std::string source;
  std::uint64_t split_seed = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return images.cols(); }

  // Throws ValidationError when an invariant is broken.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;
  // Indices of every sample with the given label, ascending.
  std::vector<std::size_t> indices_of(std::size_t label) const;
};

// Exactly test_per_class samples of each class go to the test side. Both
// sides keep the original sample order; the choice depends only on the seed.
std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, std::size_t test_per_class, std::uint64_t seed);

}  // namespace sib::dataio
