#pragma once

#include <string>
#include <vector>

#include "sib/numcore/dense.hpp"
#include "sib/spike/encode.hpp"
#include "sib/spike/lif.hpp"

namespace sib::spike {

// Per-step record of one batched forward pass. Every matrix is time-major:
// row t·batch + b belongs to sample b at step t.
template <class T>
struct SnnTrace {
  std::size_t steps = 0;
  std::size_t batch = 0;
  Matrix<T> input;            // encoded spikes
  Matrix<T> hidden_membrane;  // v[n] before the next step's reset term
  Matrix<T> hidden_spikes;
  Matrix<T> output_membrane;  // logits per step (pre-reset output membranes)
  Matrix<T> output_spikes;

  std::size_t row(std::size_t t, std::size_t b) const noexcept { return t * batch + b; }
  // steps × classes block of one sample.
  Matrix<T> logits_per_step(std::size_t sample) const;
};

// dense → LIF(hidden) → dense → LIF(classes), zero state at t = 0.
template <class T>
class SnnNetwork {
 public:
  SnnNetwork() = default;
  SnnNetwork(std::size_t input_dim, std::size_t hidden_dim, std::size_t classes, LifParams params, Rng& init);
  SnnNetwork(DenseLayer<T> input_layer, DenseLayer<T> output_layer, LifParams params);

  // encoded: (steps·batch) × input_dim, time-major.
  SnnTrace<T> forward(const Matrix<T>& encoded, std::size_t steps,
                      SpikeFunction fn = SpikeFunction::heaviside) const;

  // BPTT from dL/d(output membrane); accumulates into the layer gradients.
  // The threshold's derivative is surrogate_grad, and the soft-reset path
  // (−eta·spike feeding the next step) is differentiated as well.
  void backward(const SnnTrace<T>& trace, const Matrix<T>& grad_output_membrane,
                SpikeFunction fn = SpikeFunction::heaviside);

  void zero_grad();
  std::vector<ParamRef<T>> parameters();

  std::size_t input_dim() const { return input_layer_.in_dim(); }
  std::size_t hidden_dim() const { return input_layer_.out_dim(); }
  std::size_t num_classes() const { return output_layer_.out_dim(); }
  const LifParams& lif() const noexcept { return params_; }
  void set_lif(const LifParams& params);

  const DenseLayer<T>& input_layer() const noexcept { return input_layer_; }
  const DenseLayer<T>& output_layer() const noexcept { return output_layer_; }
  DenseLayer<T>& input_layer() noexcept { return input_layer_; }
  DenseLayer<T>& output_layer() noexcept { return output_layer_; }

 private:
  DenseLayer<T> input_layer_;
  DenseLayer<T> output_layer_;
  LifParams params_;
};

// Runs the LIF recursion over time-major input currents.
template <class T>
void lif_layer_forward(const Matrix<T>& currents, std::size_t steps, std::size_t batch, const LifParams& params,
                       SpikeFunction fn, Matrix<T>& membrane, Matrix<T>& spikes);

// Reverse-time sweep of the LIF recursion. grad_spikes / grad_membrane are the
// external gradients on each step's spikes and membranes (either may be empty).
// Returns dL/d(input current) per step.
template <class T>
Matrix<T> lif_layer_backward(const Matrix<T>& membrane, const Matrix<T>& grad_spikes,
                             const Matrix<T>& grad_membrane, std::size_t steps, std::size_t batch,
                             const LifParams& params, SpikeFunction fn);

template <class T>
struct SnnLoss {
  double loss = 0.0;
  Matrix<T> grad_output_membrane;
};

// Σ_t softmax-CE(logits_t, targets), averaged over the batch.
// output_membrane is (steps·batch) × classes, targets batch × classes.
template <class T>
SnnLoss<T> snn_loss(const Matrix<T>& output_membrane, std::size_t steps, const Matrix<T>& targets);

// Single-sample convenience: runs one spike train through the network using
// the network's own LIF parameters. logits_per_step is steps × classes.
template <class T>
struct SnnForwardResult {
  SnnTrace<T> trace;
  Matrix<T> logits_per_step;
};

template <class T>
SnnForwardResult<T> snn_forward(const SnnNetwork<T>& network, const SpikeTrain& train,
                                SpikeFunction fn = SpikeFunction::heaviside);

enum class DecodeMode { membrane_sum, spike_count };

std::string to_string(DecodeMode mode);
DecodeMode parse_decode_mode(const std::string& name);

// softmax of the per-sample time sum of a time-major (steps·batch) × k matrix.
template <class T>
Matrix<T> decode(const Matrix<T>& per_step, std::size_t steps);

// membrane_sum uses output membranes, spike_count uses output spikes.
template <class T>
Matrix<T> decode(const SnnTrace<T>& trace, DecodeMode mode);

}  // namespace sib::spike
