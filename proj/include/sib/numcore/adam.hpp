#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sib/numcore/dense.hpp"

namespace sib {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

template <class T>
struct AdamState {
  AdamConfig config;
  std::vector<T> first_moment;
  std::vector<T> second_moment;
  std::uint64_t step_count = 0;

  AdamState() = default;
  AdamState(std::size_t size, AdamConfig cfg)
      : config(cfg), first_moment(size, T{0}), second_moment(size, T{0}) {}
};

// One bias-corrected adaptive-moment update of params in place.
template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state);

// Keeps one AdamState per parameter tensor, matched by position.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(const std::vector<ParamRef<T>>& params);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  const std::vector<AdamState<T>>& states() const noexcept { return states_; }

 private:
  AdamConfig config_;
  std::vector<AdamState<T>> states_;
  std::uint64_t steps_ = 0;
};

}  // namespace sib
