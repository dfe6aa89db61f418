#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "forcediff/core/rng.hpp"
#include "forcediff/data/channel_spec.hpp"
#include "forcediff/data/trajectory.hpp"

namespace forcediff::data {

enum class TaskKind { kPlacement, kPrying };

// Generator settings for one synthetic forceful task. Sensor noise is
// Gaussian with a per-channel sigma; bursts are additive sensor perturbations
// whose L2 size across the six sensor channels, in units of those sigmas,
// is drawn from [burst_amplitude_min, burst_amplitude_max].
struct TaskProfile {
  std::string name = "placement";
  TaskKind kind = TaskKind::kPlacement;
  std::size_t steps = 200;
  double sample_period = 0.01;
  double force_noise = 0.8;
  double torque_noise = 0.06;
  double burst_amplitude_min = 5.0;
  double burst_amplitude_max = 5.0;
  std::size_t burst_min_steps = 16;
  std::size_t burst_max_steps = 48;

  void validate() const;
  static TaskProfile placement();
  static TaskProfile prying();
  static TaskProfile by_name(const std::string& name);
};

struct SynthTrajectory {
  Trajectory raw;
  // Noise-free sensor values, steps x 6, for test oracles.
  std::vector<double> clean_sensor;
  // Sensor noise sigma per sensor channel.
  std::vector<double> sensor_sigma;
  std::size_t burst_onset = 0;
  std::size_t burst_steps = 0;
  double burst_amplitude = 0.0;
};

// Raw channels of generated data: gripper position (state), gripper
// orientation quaternion (state, one quaternion group), force-torque (sensor),
// and two per-trajectory constants (condition).
ChannelSpec synth_channel_spec();
inline constexpr std::size_t kSynthSensorOffset = 7;
inline constexpr std::size_t kSynthSensorCount = 6;

// Each trajectory independently receives one burst with probability
// `anomaly_rate`. Deterministic for a given generator state.
std::vector<SynthTrajectory> synth_generate(const TaskProfile& profile, std::size_t n_trajectories,
                                            double anomaly_rate, Rng& rng);

}  // namespace forcediff::data
