#include "sib/numcore/dense.hpp"

#include <cmath>

#include "sib/numcore/ops.hpp"

namespace sib {

template <class T>
DenseLayer<T>::DenseLayer(std::size_t in_dim, std::size_t out_dim)
    : weights_(out_dim, in_dim),
      bias_(1, out_dim),
      weight_grad_(out_dim, in_dim),
      bias_grad_(1, out_dim) {}

template <class T>
DenseLayer<T>::DenseLayer(Matrix<T> weights, Matrix<T> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (bias_.rows() != 1 || bias_.cols() != weights_.rows()) {
    throw DimensionError("DenseLayer: bias must be 1x" + std::to_string(weights_.rows()));
  }
  weight_grad_ = Matrix<T>(weights_.rows(), weights_.cols());
  bias_grad_ = Matrix<T>(1, bias_.cols());
}

template <class T>
DenseLayer<T> DenseLayer<T>::glorot_uniform(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  DenseLayer layer(in_dim, out_dim);
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (auto& w : layer.weights_.values()) {
    w = static_cast<T>((2.0 * rng.uniform01() - 1.0) * limit);
  }
  return layer;
}

template <class T>
void DenseLayer<T>::check_input(const Matrix<T>& input) const {
  if (input.cols() != in_dim()) {
    throw DimensionError("DenseLayer: input has " + std::to_string(input.cols()) +
                         " columns, layer expects " + std::to_string(in_dim()));
  }
}

template <class T>
Matrix<T> DenseLayer<T>::infer(const Matrix<T>& input) const {
  check_input(input);
  Matrix<T> out = matmul_abt(input, weights_);
  add_row_broadcast(out, bias_);
  return out;
}

template <class T>
Matrix<T> DenseLayer<T>::forward(const Matrix<T>& input) {
  Matrix<T> out = infer(input);
  cached_input_ = input;
  return out;
}

template <class T>
Matrix<T> DenseLayer<T>::backward(const Matrix<T>& grad_output) {
  if (!cached_input_) throw Error("DenseLayer::backward called without a preceding forward");
  accumulate_gradients(*cached_input_, grad_output);
  return input_gradient(grad_output);
}

template <class T>
Matrix<T> DenseLayer<T>::input_gradient(const Matrix<T>& grad_output) const {
  if (grad_output.cols() != out_dim()) throw DimensionError("DenseLayer: gradient width mismatch");
  return matmul_ab(grad_output, weights_);
}

template <class T>
void DenseLayer<T>::accumulate_gradients(const Matrix<T>& input, const Matrix<T>& grad_output) {
  check_input(input);
  if (grad_output.cols() != out_dim() || grad_output.rows() != input.rows()) {
    throw DimensionError("DenseLayer: gradient shape mismatch");
  }
  accumulate_atb(weight_grad_, grad_output, input);
  accumulate_column_sums(bias_grad_, grad_output);
}

template <class T>
void DenseLayer<T>::zero_grad() {
  weight_grad_.fill(T{0});
  bias_grad_.fill(T{0});
}

template <class T>
std::vector<ParamRef<T>> DenseLayer<T>::parameters() {
  return {{weights_.values(), weight_grad_.values()}, {bias_.values(), bias_grad_.values()}};
}

template class DenseLayer<float>;
template class DenseLayer<double>;

}  // namespace sib
