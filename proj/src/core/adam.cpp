#include "forcediff/core/adam.hpp"

#include <cmath>

namespace forcediff {

template <typename T>
void adam_step(std::span<Array<T>> params, std::span<const Array<T>> grads, AdamState<T>& state,
               const AdamConfig& config) {
  if (!(config.lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (params.size() != grads.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.shape());
      state.second_moment.emplace_back(p.shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam: optimizer state does not match parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(grads[i].shape(), params[i].shape(), "adam gradient");
    require_shape(state.first_moment[i].shape(), params[i].shape(), "adam state");
  }

  ++state.step;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const T step_size = static_cast<T>(config.lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T eps = static_cast<T>(config.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T{1} - b1) * g[j];
      v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

template void adam_step(std::span<Array<float>>, std::span<const Array<float>>, AdamState<float>&,
                        const AdamConfig&);
template void adam_step(std::span<Array<double>>, std::span<const Array<double>>,
                        AdamState<double>&, const AdamConfig&);

}  // namespace forcediff
