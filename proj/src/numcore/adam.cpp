#include "sib/numcore/adam.hpp"

#include <cmath>

namespace sib {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = cfg.beta1 * state.first_moment[i] + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * state.second_moment[i] + (1.0 - cfg.beta2) * g * g;
    state.first_moment[i] = static_cast<T>(m);
    state.second_moment[i] = static_cast<T>(v);
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] = static_cast<T>(params[i] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
  }
}

template <class T>
Adam<T>::Adam(AdamConfig config) : config_(config) {
  config_.validate();
}

template <class T>
void Adam<T>::step(const std::vector<ParamRef<T>>& params) {
  if (states_.empty()) {
    states_.reserve(params.size());
    for (const auto& p : params) states_.emplace_back(p.value.size(), config_);
  }
  if (states_.size() != params.size()) throw DimensionError("Adam: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step(params[i].value, std::span<const T>(params[i].grad), states_[i]);
  }
  ++steps_;
}

template void adam_step(std::span<float>, std::span<const float>, AdamState<float>&);
template void adam_step(std::span<double>, std::span<const double>, AdamState<double>&);
template class Adam<float>;
template class Adam<double>;

}  // namespace sib
