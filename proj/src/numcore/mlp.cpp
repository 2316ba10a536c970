#include "sib/numcore/mlp.hpp"

#include <cmath>

namespace sib {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

namespace {

template <class T>
void apply_activation(Matrix<T>& m, Activation a) {
  switch (a) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (auto& v : m.values()) v = v > T{0} ? v : T{0};
      break;
    case Activation::leaky_relu:
      for (auto& v : m.values()) v = v > T{0} ? v : static_cast<T>(Mlp<T>::kLeakySlope * v);
      break;
    case Activation::sigmoid:
      for (auto& v : m.values()) v = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
      break;
  }
}

// grad *= f'(pre) expressed through the post-activation output.
template <class T>
void multiply_activation_derivative(Matrix<T>& grad, const Matrix<T>& output, Activation a) {
  auto g = grad.values();
  auto y = output.values();
  switch (a) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = y[i] > T{0} ? g[i] : T{0};
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = y[i] > T{0} ? g[i] : static_cast<T>(Mlp<T>::kLeakySlope * g[i]);
      }
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] * y[i] * (T{1} - y[i]);
      break;
  }
}

}  // namespace

template <class T>
Mlp<T>::Mlp(const std::vector<std::size_t>& widths, std::vector<Activation> activations, Rng& init)
    : activations_(std::move(activations)) {
  if (widths.size() < 2 || activations_.size() != widths.size() - 1) {
    throw DimensionError("Mlp: need one activation per layer");
  }
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (widths[i] == 0 || widths[i + 1] == 0) throw DimensionError("Mlp: zero-width layer");
    layers_.push_back(DenseLayer<T>::glorot_uniform(widths[i], widths[i + 1], init));
  }
}

template <class T>
Mlp<T>::Mlp(std::vector<DenseLayer<T>> layers, std::vector<Activation> activations)
    : layers_(std::move(layers)), activations_(std::move(activations)) {
  if (layers_.empty() || layers_.size() != activations_.size()) {
    throw DimensionError("Mlp: need one activation per layer");
  }
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].in_dim() != layers_[i - 1].out_dim()) throw DimensionError("Mlp: layer widths do not chain");
  }
}

template <class T>
std::vector<std::size_t> Mlp<T>::widths() const {
  std::vector<std::size_t> w{input_dim()};
  for (const auto& l : layers_) w.push_back(l.out_dim());
  return w;
}

template <class T>
Matrix<T> Mlp<T>::forward(const Matrix<T>& input) {
  outputs_.clear();
  Matrix<T> x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(x);
    apply_activation(x, activations_[i]);
    outputs_.push_back(x);
  }
  return x;
}

template <class T>
Matrix<T> Mlp<T>::backward(const Matrix<T>& grad_output) {
  if (outputs_.size() != layers_.size()) throw Error("Mlp::backward called without a preceding forward");
  Matrix<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    multiply_activation_derivative(g, outputs_[i], activations_[i]);
    g = layers_[i].backward(g);
  }
  return g;
}

template <class T>
Matrix<T> Mlp<T>::infer(const Matrix<T>& input) const {
  Matrix<T> x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].infer(x);
    apply_activation(x, activations_[i]);
  }
  return x;
}

template <class T>
Matrix<T> Mlp<T>::input_gradient(const Matrix<T>& input, const Matrix<T>& grad_output) const {
  std::vector<Matrix<T>> outputs;
  outputs.reserve(layers_.size());
  Matrix<T> x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].infer(x);
    apply_activation(x, activations_[i]);
    outputs.push_back(x);
  }
  Matrix<T> g = grad_output;
  require_same_shape(g, outputs.back(), "Mlp::input_gradient");
  for (std::size_t i = layers_.size(); i-- > 0;) {
    multiply_activation_derivative(g, outputs[i], activations_[i]);
    g = layers_[i].input_gradient(g);
  }
  return g;
}

template <class T>
void Mlp<T>::zero_grad() {
  for (auto& l : layers_) l.zero_grad();
}

template <class T>
std::vector<ParamRef<T>> Mlp<T>::parameters() {
  std::vector<ParamRef<T>> out;
  for (auto& l : layers_) {
    auto p = l.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace sib
