#include "sib/spike/lif.hpp"

#include <cmath>
#include <string>

#include "sib/error.hpp"

namespace sib::spike {

void LifParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("lif: alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (!(eta > 0.0)) throw ConfigError("lif: eta must be positive");
  if (!(surrogate_slope > 0.0)) throw ConfigError("lif: surrogate_slope must be positive");
}

LifState lif_step(const LifState& previous, std::span<const double> weighted_input, const LifParams& params) {
  const std::size_t n = previous.membrane.size();
  if (previous.spikes.size() != n || weighted_input.size() != n) {
    throw DimensionError("lif_step: state has " + std::to_string(n) + " neurons, input has " +
                         std::to_string(weighted_input.size()));
  }
  LifState next = LifState::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = params.alpha * previous.membrane[i] + weighted_input[i];
    if (previous.spikes[i] != 0) v -= params.eta;
    next.membrane[i] = v;
    next.spikes[i] = v > params.eta ? 1 : 0;
  }
  return next;
}

double surrogate_grad(double v, const LifParams& params) {
  const double denom = 1.0 + params.surrogate_slope * std::abs(v - params.eta);
  return 1.0 / (denom * denom);
}

double spike_relaxation(double v, const LifParams& params) {
  const double x = v - params.eta;
  return 0.5 + x / (1.0 + params.surrogate_slope * std::abs(x));
}

}  // namespace sib::spike
