#include "sib/dataio/dataset.hpp"

#include <algorithm>

#include "sib/numcore/rng.hpp"

namespace sib::dataio {

void Dataset::validate() const {
  if (images.rows() != labels.size()) {
    throw ValidationError("dataset has " + std::to_string(images.rows()) + " images but " +
                          std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                            " is outside [0, " + std::to_string(class_count) + ")");
    }
  }
  for (float v : images.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("dataset pixel outside [0, 1]");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.images = Tensor2D(indices.size(), dim());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = images.row(indices[i]);
    std::copy(src.begin(), src.end(), out.images.row(i).begin());
    out.labels.push_back(labels[indices[i]]);
  }
  out.class_count = class_count;
  out.source = source;
  out.split_seed = split_seed;
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (auto l : labels) ++counts.at(l);
  return counts;
}

std::vector<std::size_t> Dataset::indices_of(std::size_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset, std::size_t test_per_class, std::uint64_t seed) {
  const Rng root(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < dataset.class_count; ++c) {
    const auto members = dataset.indices_of(c);
    if (members.size() <= test_per_class) {
      throw ValidationError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                            " samples, need more than " + std::to_string(test_per_class));
    }
    Rng rng = root.derive(Purpose::split, c);
    const auto perm = rng_permutation(rng, members.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      (k < test_per_class ? test_idx : train_idx).push_back(members[perm[k]]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  auto train = dataset.subset(train_idx);
  auto test = dataset.subset(test_idx);
  train.split_seed = test.split_seed = seed;
  return {std::move(train), std::move(test)};
}

}  // namespace sib::dataio
