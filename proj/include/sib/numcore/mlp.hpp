#pragma once

#include <string>
#include <vector>

#include "sib/numcore/dense.hpp"

namespace sib {

enum class Activation { identity, relu, leaky_relu, sigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

// Stack of dense layers, each followed by its activation. Gradients are
// hand-derived; forward() caches per-layer outputs for backward().
template <class T>
class Mlp {
 public:
  static constexpr double kLeakySlope = 0.2;

  Mlp() = default;
  // widths = {in, h1, ..., out}; one activation per layer.
  Mlp(const std::vector<std::size_t>& widths, std::vector<Activation> activations, Rng& init);
  Mlp(std::vector<DenseLayer<T>> layers, std::vector<Activation> activations);

  Matrix<T> forward(const Matrix<T>& input);
  // Requires a preceding forward(); accumulates parameter gradients.
  Matrix<T> backward(const Matrix<T>& grad_output);

  Matrix<T> infer(const Matrix<T>& input) const;
  // dL/dinput for a frozen network (recomputes the forward pass internally).
  Matrix<T> input_gradient(const Matrix<T>& input, const Matrix<T>& grad_output) const;

  void zero_grad();
  std::vector<ParamRef<T>> parameters();

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  std::vector<std::size_t> widths() const;

  const std::vector<DenseLayer<T>>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer<T>>& layers() noexcept { return layers_; }
  const std::vector<Activation>& activations() const noexcept { return activations_; }

 private:
  std::vector<DenseLayer<T>> layers_;
  std::vector<Activation> activations_;
  std::vector<Matrix<T>> outputs_;
};

}  // namespace sib
