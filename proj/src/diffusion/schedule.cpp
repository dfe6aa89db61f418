#include "forcediff/diffusion/schedule.hpp"

#include <string>

#include "forcediff/errors.hpp"

namespace forcediff::diffusion {

void MaskSpec::validate() const {
  if (sensor.empty()) throw ConfigError("mask: sensor channel set is empty");
  std::vector<bool> seen(channels(), false);
  for (const auto* set : {&sensor, &conditioning}) {
    for (std::size_t i : *set) {
      if (i >= seen.size() || seen[i]) {
        throw ConfigError("mask: channel index " + std::to_string(i) +
                          " is out of range or listed twice");
      }
      seen[i] = true;
    }
  }
}

MaskSpec MaskSpec::from_layout(const data::ChannelLayout& layout) {
  MaskSpec m{layout.sensor_indices(), layout.conditioning_indices()};
  m.validate();
  return m;
}

void DiffusionConfig::validate() const {
  if (steps < 1) throw ConfigError("diffusion: step count must be at least 1");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0)) {
    throw ConfigError("diffusion: need 0 < beta_start < beta_end < 1");
  }
}

void NoiseSchedule::require_step(int t) const {
  if (t < 1 || t > steps()) {
    throw ConfigError("diffusion step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }
}

std::size_t NoiseSchedule::checked(int t, int lowest) const {
  if (t < lowest || t > steps()) {
    throw ConfigError("diffusion step " + std::to_string(t) + " outside [" + std::to_string(lowest) + ", " +
                      std::to_string(steps()) + "]");
  }
  return static_cast<std::size_t>(t);
}

NoiseSchedule build_linear_schedule(const DiffusionConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.steps);
  NoiseSchedule s;
  s.beta_.assign(n + 1, 0.0);
  s.alpha_bar_.assign(n + 1, 1.0);
  for (std::size_t t = 1; t <= n; ++t) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(n - 1);
    s.beta_[t] = config.beta_start + (config.beta_end - config.beta_start) * frac;
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * (1.0 - s.beta_[t]);
  }
  return s;
}

}  // namespace forcediff::diffusion
