#include "sib/spike/snn.hpp"

#include <cmath>

#include "sib/numcore/loss.hpp"

namespace sib::spike {

template <class T>
Matrix<T> SnnTrace<T>::logits_per_step(std::size_t sample) const {
  if (sample >= batch) throw DimensionError("SnnTrace: sample index out of range");
  Matrix<T> out(steps, output_membrane.cols());
  for (std::size_t t = 0; t < steps; ++t) {
    auto src = output_membrane.row(row(t, sample));
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

template <class T>
void lif_layer_forward(const Matrix<T>& currents, std::size_t steps, std::size_t batch, const LifParams& params,
                       SpikeFunction fn, Matrix<T>& membrane, Matrix<T>& spikes) {
  if (currents.rows() != steps * batch) throw DimensionError("lif_layer_forward: rows != steps * batch");
  const std::size_t block = batch * currents.cols();
  membrane = Matrix<T>(currents.rows(), currents.cols());
  spikes = Matrix<T>(currents.rows(), currents.cols());
  const T alpha = static_cast<T>(params.alpha);
  const T eta = static_cast<T>(params.eta);
  for (std::size_t t = 0; t < steps; ++t) {
    const T* in = currents.data() + t * block;
    T* v = membrane.data() + t * block;
    T* s = spikes.data() + t * block;
    if (t == 0) {
      for (std::size_t i = 0; i < block; ++i) v[i] = in[i];
    } else {
      const T* v_prev = v - block;
      const T* s_prev = s - block;
      for (std::size_t i = 0; i < block; ++i) {
        v[i] = alpha * v_prev[i] + in[i];
        if (s_prev[i] != T{0}) v[i] -= s_prev[i] * eta;  // skipped when silent so eta = inf stays finite
      }
    }
    if (fn == SpikeFunction::heaviside) {
      for (std::size_t i = 0; i < block; ++i) s[i] = v[i] > eta ? T{1} : T{0};
    } else {
      for (std::size_t i = 0; i < block; ++i) s[i] = static_cast<T>(spike_relaxation(v[i], params));
    }
  }
}

template <class T>
Matrix<T> lif_layer_backward(const Matrix<T>& membrane, const Matrix<T>& grad_spikes,
                             const Matrix<T>& grad_membrane, std::size_t steps, std::size_t batch,
                             const LifParams& params, SpikeFunction /*fn*/) {
  // Both spike functions share the same derivative: surrogate_grad is the
  // exact derivative of the fast-sigmoid relaxation and the stand-in for the
  // Heaviside step.
  if (membrane.rows() != steps * batch) throw DimensionError("lif_layer_backward: rows != steps * batch");
  const bool has_gs = !grad_spikes.empty();
  const bool has_gv = !grad_membrane.empty();
  if (has_gs) require_same_shape(grad_spikes, membrane, "lif_layer_backward spikes");
  if (has_gv) require_same_shape(grad_membrane, membrane, "lif_layer_backward membrane");

  const std::size_t block = batch * membrane.cols();
  Matrix<T> grad_current(membrane.rows(), membrane.cols());
  std::vector<double> g_next(block, 0.0);  // dL/dv at step t + 1
  const double eta = params.eta;
  const double slope = params.surrogate_slope;
  for (std::size_t t = steps; t-- > 0;) {
    const T* v = membrane.data() + t * block;
    const T* gs_ext = has_gs ? grad_spikes.data() + t * block : nullptr;
    const T* gv_ext = has_gv ? grad_membrane.data() + t * block : nullptr;
    T* gi = grad_current.data() + t * block;
    for (std::size_t i = 0; i < block; ++i) {
      const double g_spike = (gs_ext ? static_cast<double>(gs_ext[i]) : 0.0) - eta * g_next[i];
      const double denom = 1.0 + slope * std::abs(static_cast<double>(v[i]) - eta);
      const double gv = (gv_ext ? static_cast<double>(gv_ext[i]) : 0.0) + g_spike / (denom * denom) +
                        params.alpha * g_next[i];
      gi[i] = static_cast<T>(gv);
      g_next[i] = gv;
    }
  }
  return grad_current;
}

template <class T>
SnnNetwork<T>::SnnNetwork(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes, LifParams params,
                          Rng& init)
    : input_layer_(DenseLayer<T>::glorot_uniform(input_dim, hidden_dim, init)),
      output_layer_(DenseLayer<T>::glorot_uniform(hidden_dim, classes, init)),
      params_(params) {
  params_.validate();
}

template <class T>
SnnNetwork<T>::SnnNetwork(DenseLayer<T> input_layer, DenseLayer<T> output_layer, LifParams params)
    : input_layer_(std::move(input_layer)), output_layer_(std::move(output_layer)), params_(params) {
  params_.validate();
  if (input_layer_.out_dim() != output_layer_.in_dim()) throw DimensionError("SnnNetwork: layer widths do not chain");
}

template <class T>
void SnnNetwork<T>::set_lif(const LifParams& params) {
  params.validate();
  params_ = params;
}

template <class T>
SnnTrace<T> SnnNetwork<T>::forward(const Matrix<T>& encoded, std::size_t steps, SpikeFunction fn) const {
  if (steps == 0 || encoded.rows() % steps != 0) {
    throw DimensionError("SnnNetwork::forward: " + std::to_string(encoded.rows()) +
                         " rows is not a multiple of " + std::to_string(steps) + " steps");
  }
  SnnTrace<T> trace;
  trace.steps = steps;
  trace.batch = encoded.rows() / steps;
  trace.input = encoded;
  const Matrix<T> hidden_current = input_layer_.infer(encoded);
  lif_layer_forward(hidden_current, steps, trace.batch, params_, fn, trace.hidden_membrane, trace.hidden_spikes);
  const Matrix<T> output_current = output_layer_.infer(trace.hidden_spikes);
  lif_layer_forward(output_current, steps, trace.batch, params_, fn, trace.output_membrane, trace.output_spikes);
  return trace;
}

template <class T>
void SnnNetwork<T>::backward(const SnnTrace<T>& trace, const Matrix<T>& grad_output_membrane, SpikeFunction fn) {
  require_same_shape(grad_output_membrane, trace.output_membrane, "SnnNetwork::backward");
  const Matrix<T> none;
  const Matrix<T> grad_output_current =
      lif_layer_backward(trace.output_membrane, none, grad_output_membrane, trace.steps, trace.batch, params_, fn);
  output_layer_.accumulate_gradients(trace.hidden_spikes, grad_output_current);
  const Matrix<T> grad_hidden_spikes = output_layer_.input_gradient(grad_output_current);
  const Matrix<T> grad_hidden_current =
      lif_layer_backward(trace.hidden_membrane, grad_hidden_spikes, none, trace.steps, trace.batch, params_, fn);
  input_layer_.accumulate_gradients(trace.input, grad_hidden_current);
}

template <class T>
void SnnNetwork<T>::zero_grad() {
  input_layer_.zero_grad();
  output_layer_.zero_grad();
}

template <class T>
std::vector<ParamRef<T>> SnnNetwork<T>::parameters() {
  auto out = input_layer_.parameters();
  auto second = output_layer_.parameters();
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

template <class T>
SnnLoss<T> snn_loss(const Matrix<T>& output_membrane, std::size_t steps, const Matrix<T>& targets) {
  const std::size_t batch = targets.rows();
  if (steps == 0 || output_membrane.rows() != steps * batch || output_membrane.cols() != targets.cols()) {
    throw DimensionError("snn_loss: membranes must be (steps*batch) x classes");
  }
  SnnLoss<T> result{0.0, Matrix<T>(output_membrane.rows(), output_membrane.cols())};
  for (std::size_t t = 0; t < steps; ++t) {
    auto step = softmax_cross_entropy(output_membrane.slice_rows(t * batch, batch), targets);
    result.loss += step.loss;
    std::copy(step.grad.values().begin(), step.grad.values().end(),
              result.grad_output_membrane.values().begin() + static_cast<std::ptrdiff_t>(t * batch * targets.cols()));
  }
  return result;
}

template <class T>
SnnForwardResult<T> snn_forward(const SnnNetwork<T>& network, const SpikeTrain& train, SpikeFunction fn) {
  if (train.dim != network.input_dim()) {
    throw DimensionError("snn_forward: spike train has dim " + std::to_string(train.dim) + ", network expects " +
                         std::to_string(network.input_dim()));
  }
  SnnForwardResult<T> result;
  result.trace = network.forward(train.bits.template cast<T>(), train.steps, fn);
  result.logits_per_step = result.trace.logits_per_step(0);
  return result;
}

std::string to_string(DecodeMode mode) {
  return mode == DecodeMode::membrane_sum ? "membrane-sum" : "spike-count";
}

DecodeMode parse_decode_mode(const std::string& name) {
  if (name == "membrane-sum") return DecodeMode::membrane_sum;
  if (name == "spike-count") return DecodeMode::spike_count;
  throw ConfigError("unknown decode mode '" + name + "' (expected membrane-sum or spike-count)");
}

template <class T>
Matrix<T> decode(const Matrix<T>& per_step, std::size_t steps) {
  if (steps == 0 || per_step.rows() % steps != 0) throw DimensionError("decode: need at least one step");
  const std::size_t batch = per_step.rows() / steps;
  Matrix<double> sums(batch, per_step.cols());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      auto src = per_step.row(t * batch + b);
      auto dst = sums.row(b);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += static_cast<double>(src[c]);
    }
  }
  return softmax_rows(sums).template cast<T>();
}

template <class T>
Matrix<T> decode(const SnnTrace<T>& trace, DecodeMode mode) {
  return decode(mode == DecodeMode::membrane_sum ? trace.output_membrane : trace.output_spikes, trace.steps);
}

#define SIB_INSTANTIATE(T)                                                                                      \
  template struct SnnTrace<T>;                                                                                  \
  template class SnnNetwork<T>;                                                                                 \
  template void lif_layer_forward(const Matrix<T>&, std::size_t, std::size_t, const LifParams&, SpikeFunction,  \
                                  Matrix<T>&, Matrix<T>&);                                                      \
  template Matrix<T> lif_layer_backward(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, std::size_t,      \
                                        std::size_t, const LifParams&, SpikeFunction);                          \
  template SnnForwardResult<T> snn_forward(const SnnNetwork<T>&, const SpikeTrain&, SpikeFunction);            \
  template SnnLoss<T> snn_loss(const Matrix<T>&, std::size_t, const Matrix<T>&);                                \
  template Matrix<T> decode(const Matrix<T>&, std::size_t);                                                     \
  template Matrix<T> decode(const SnnTrace<T>&, DecodeMode);

SIB_INSTANTIATE(float)
SIB_INSTANTIATE(double)
#undef SIB_INSTANTIATE

}  // namespace sib::spike
