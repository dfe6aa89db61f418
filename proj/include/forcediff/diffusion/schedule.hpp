#pragma once

#include <cstddef>
#include <vector>

#include "forcediff/data/channel_spec.hpp"

namespace forcediff::diffusion {

// Partition of the processed channels: sensor channels are noised and
// predicted, conditioning channels are fed clean.
struct MaskSpec {
  std::vector<std::size_t> sensor;
  std::vector<std::size_t> conditioning;

  std::size_t channels() const { return sensor.size() + conditioning.size(); }
  // Throws ConfigError unless the sets are disjoint, cover 0..channels-1 and sensor is nonempty.
  void validate() const;

  static MaskSpec from_layout(const data::ChannelLayout& layout);
  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

struct DiffusionConfig {
  int steps = 100;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  MaskSpec mask;

  // Checks the schedule range only; the mask is validated where it is used.
  void validate() const;
};

// Linear beta schedule. Indices are 1-based: beta(t), alpha(t) for t in
// [1, T]; alpha_bar(t) for t in [0, T] with alpha_bar(0) == 1.
class NoiseSchedule {
 public:
  int steps() const { return static_cast<int>(beta_.size()) - 1; }
  double beta(int t) const { return beta_.at(checked(t, 1)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(checked(t, 0)); }
  std::vector<double> betas() const { return {beta_.begin() + 1, beta_.end()}; }

  // Throws ConfigError unless 1 <= t <= T.
  void require_step(int t) const;

  friend NoiseSchedule build_linear_schedule(const DiffusionConfig& config);

 private:
  std::size_t checked(int t, int lowest) const;

  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

NoiseSchedule build_linear_schedule(const DiffusionConfig& config);

}  // namespace forcediff::diffusion
