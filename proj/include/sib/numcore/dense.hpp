#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sib/numcore/rng.hpp"
#include "sib/numcore/tensor.hpp"

namespace sib {

// A trainable tensor and its gradient accumulator, viewed as flat spans.
template <class T>
struct ParamRef {
  std::span<T> value;
  std::span<T> grad;
};

// Fully connected layer: out = in · Wᵀ + b, W is out×in, b is 1×out.
template <class T>
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim);
  DenseLayer(Matrix<T> weights, Matrix<T> bias);

  // W ~ U(±√(6 / (in + out))), b = 0.
  static DenseLayer glorot_uniform(std::size_t in_dim, std::size_t out_dim, Rng& rng);

  std::size_t in_dim() const noexcept { return weights_.cols(); }
  std::size_t out_dim() const noexcept { return weights_.rows(); }

  // Stores the input for the following backward().
  Matrix<T> forward(const Matrix<T>& input);
  Matrix<T> infer(const Matrix<T>& input) const;

  // Accumulates dW, db from the cached input and returns dL/dinput.
  Matrix<T> backward(const Matrix<T>& grad_output);
  // dL/dinput only; parameters and gradients are untouched.
  Matrix<T> input_gradient(const Matrix<T>& grad_output) const;
  // dW += grad_outputᵀ · input, db += Σ rows of grad_output.
  void accumulate_gradients(const Matrix<T>& input, const Matrix<T>& grad_output);

  void zero_grad();
  bool has_cached_input() const noexcept { return cached_input_.has_value(); }
  void clear_cache() noexcept { cached_input_.reset(); }

  const Matrix<T>& weights() const noexcept { return weights_; }
  const Matrix<T>& bias() const noexcept { return bias_; }
  Matrix<T>& weights() noexcept { return weights_; }
  Matrix<T>& bias() noexcept { return bias_; }
  const Matrix<T>& weight_grad() const noexcept { return weight_grad_; }
  const Matrix<T>& bias_grad() const noexcept { return bias_grad_; }

  std::vector<ParamRef<T>> parameters();

 private:
  void check_input(const Matrix<T>& input) const;

  Matrix<T> weights_;
  Matrix<T> bias_;
  Matrix<T> weight_grad_;
  Matrix<T> bias_grad_;
  std::optional<Matrix<T>> cached_input_;
};

}  // namespace sib
