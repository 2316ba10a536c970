#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sib::spike {

struct LifParams {
  double alpha = 0.7;            // membrane leak factor
  double eta = 1.0;              // firing threshold
  double surrogate_slope = 40.0; // fast-sigmoid slope used by the backward pass

  void validate() const;
};

// How the forward pass turns a membrane potential into a spike.
//   heaviside:    1 if v > eta else 0 (the real neuron)
//   fast_sigmoid: the smooth relaxation whose derivative is surrogate_grad;
//                 makes the whole network differentiable for gradient checks
enum class SpikeFunction { heaviside, fast_sigmoid };

struct LifState {
  std::vector<double> membrane;
  std::vector<std::uint8_t> spikes;

  static LifState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)}; }
};

// v[n] = alpha·v[n-1] + input[n] − spikes[n-1]·eta, then spike iff v[n] > eta.
// The returned membrane is v[n] itself; the reset shows up in the next step.
LifState lif_step(const LifState& previous, std::span<const double> weighted_input, const LifParams& params);

// 1 / (1 + slope·|v − eta|)²
double surrogate_grad(double v, const LifParams& params);

// 0.5 + (v − eta) / (1 + slope·|v − eta|); its derivative is surrogate_grad.
double spike_relaxation(double v, const LifParams& params);

inline double spike_value(double v, const LifParams& params, SpikeFunction fn) {
  if (fn == SpikeFunction::heaviside) return v > params.eta ? 1.0 : 0.0;
  return spike_relaxation(v, params);
}

}  // namespace sib::spike
