#include "forcediff/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "forcediff/errors.hpp"

namespace forcediff::data {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

struct Oscillator {
  double offset, amplitude, frequency, phase, trend;
  double value(double t) const {
    return offset + amplitude * std::sin(kTwoPi * frequency * t + phase) + trend * t;
  }
};

Oscillator random_oscillator(Rng& rng, double offset_span, double amp_lo, double amp_hi,
                             double trend_span) {
  return Oscillator{uniform(rng, -offset_span, offset_span), uniform(rng, amp_lo, amp_hi),
                    uniform(rng, 0.3, 1.0), uniform(rng, 0.0, kTwoPi),
                    uniform(rng, -trend_span, trend_span)};
}

// ZYX Euler angles to a unit quaternion (w, x, y, z).
std::array<double, 4> euler_to_quat(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll / 2), sr = std::sin(roll / 2);
  const double cp = std::cos(pitch / 2), sp = std::sin(pitch / 2);
  const double cy = std::cos(yaw / 2), sy = std::sin(yaw / 2);
  return {cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy, cr * sp * cy + sr * cp * sy,
          cr * cp * sy - sr * sp * cy};
}

SynthTrajectory generate_one(const TaskProfile& p, std::size_t index, bool with_burst, Rng& rng) {
  const double duration = static_cast<double>(p.steps) * p.sample_period;
  const Oscillator ox = random_oscillator(rng, 0.05, 0.005, 0.02, 0.02);
  const Oscillator oy = random_oscillator(rng, 0.05, 0.005, 0.02, 0.02);
  const Oscillator oroll = random_oscillator(rng, 0.05, 0.05, 0.3, 0.0);
  const Oscillator opitch = random_oscillator(rng, 0.05, 0.05, 0.3, 0.0);
  const Oscillator oyaw = random_oscillator(rng, 0.1, 0.05, 0.3, 0.0);
  const double stiffness = uniform(rng, 300.0, 900.0);
  const double contact = uniform(rng, 0.0, 0.02);
  const double approach = uniform(rng, 0.01, 0.03);
  const double depth = uniform(rng, 0.005, 0.02);
  const double ramp_end = uniform(rng, 0.5, 0.8);
  const double wobble_phase = uniform(rng, 0.0, kTwoPi);
  const double quat_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;

  // Lateral spring rate about the target axis, N/m.
  constexpr double kLateral = 120.0;
  constexpr double kLever = 0.1;
  // Angular spring rates, N m/rad.
  constexpr double kTilt = 1.0;
  constexpr double kTwist = 0.5;

  SynthTrajectory out;
  Trajectory& traj = out.raw;
  traj.id = p.name + "_" + std::to_string(index);
  traj.sample_period = p.sample_period;
  traj.channels = 15;
  traj.flags.assign(p.steps, 0);
  out.sensor_sigma = {p.force_noise, p.force_noise, p.force_noise,
                      p.torque_noise, p.torque_noise, p.torque_noise};

  for (std::size_t i = 0; i < p.steps; ++i) {
    const double t = static_cast<double>(i) * p.sample_period;
    const double px = ox.value(t), py = oy.value(t);
    const double roll = oroll.value(t), pitch = opitch.value(t), yaw = oyaw.value(t);

    std::array<double, 6> ft{};
    double pz = 0.0;
    if (p.kind == TaskKind::kPlacement) {
      // Descend onto a compliant surface at height `contact`, then hold.
      const double z_start = contact + approach;
      const double z_end = contact - depth;
      pz = z_start + (z_end - z_start) * smoothstep(t / (ramp_end * duration)) +
           0.001 * std::sin(kTwoPi * 2.0 * t + wobble_phase);
      const double press = std::max(0.0, contact - pz);
      const double fz = stiffness * press;
      const double fx = -kLateral * px;
      const double fy = -kLateral * py;
      ft = {fx, fy, fz, kLever * fy - kTilt * roll, -kLever * fx - kTilt * pitch, -kTwist * yaw};
    } else {
      // Lever prying: the tool tip is pulled along x past a catch point; the
      // separating force grows with the pull and reacts as torque about y.
      pz = contact + 0.002 * std::sin(kTwoPi * 2.0 * t + wobble_phase);
      const double pull = (approach + depth) * smoothstep(t / (ramp_end * duration));
      const double catch_point = approach;
      const double stretch = std::max(0.0, pull - catch_point);
      const double fx = stiffness * stretch;
      const double fy = -kLateral * py;
      const double fz = -kLateral * (pz - contact);
      ft = {fx, fy, fz, kLever * fy - kTilt * roll, kLever * fx - kTilt * pitch, -kTwist * yaw};
    }

    const auto q = euler_to_quat(roll, pitch, yaw);
    traj.time.push_back(t);
    const double row_state[] = {px, py, pz,
                                quat_sign * q[0], quat_sign * q[1], quat_sign * q[2], quat_sign * q[3]};
    traj.values.insert(traj.values.end(), std::begin(row_state), std::end(row_state));
    for (std::size_t c = 0; c < 6; ++c) {
      out.clean_sensor.push_back(ft[c]);
      traj.values.push_back(ft[c] + out.sensor_sigma[c] * rng.normal());
    }
    traj.values.push_back(stiffness);
    traj.values.push_back(contact);
  }

  if (with_burst) {
    const std::size_t dur = p.burst_min_steps +
                            static_cast<std::size_t>(rng.uniform_int(p.burst_max_steps - p.burst_min_steps + 1));
    const std::size_t margin = 8;
    const std::size_t latest = p.steps - dur;
    const std::size_t onset = margin + static_cast<std::size_t>(rng.uniform_int(latest - margin + 1));
    std::array<double, 6> dir{};
    double norm = 0.0;
    while (norm < 1e-6) {
      norm = 0.0;
      for (auto& d : dir) {
        d = rng.normal();
        norm += d * d;
      }
      norm = std::sqrt(norm);
    }
    const double amp = uniform(rng, p.burst_amplitude_min, p.burst_amplitude_max);
    constexpr double kRamp = 3.0;
    for (std::size_t i = onset; i < onset + dur; ++i) {
      const double k = static_cast<double>(i - onset);
      const double envelope = std::min({1.0, (k + 1.0) / kRamp, (static_cast<double>(dur) - k) / kRamp});
      for (std::size_t c = 0; c < 6; ++c) {
        traj.values[i * traj.channels + kSynthSensorOffset + c] +=
            amp * out.sensor_sigma[c] * dir[c] / norm * envelope;
      }
      traj.flags[i] = 1;
    }
    out.burst_onset = onset;
    out.burst_steps = dur;
    out.burst_amplitude = amp;
  }
  traj.validate();
  return out;
}

}  // namespace

void TaskProfile::validate() const {
  if (steps < 2 || !(sample_period > 0)) throw ConfigError("task profile: invalid time base");
  if (!(force_noise > 0) || !(torque_noise > 0)) throw ConfigError("task profile: noise must be positive");
  if (!(burst_amplitude_min > 0) || burst_amplitude_max < burst_amplitude_min) {
    throw ConfigError("task profile: invalid burst amplitude range");
  }
  if (burst_min_steps == 0 || burst_max_steps < burst_min_steps || burst_max_steps + 8 > steps) {
    throw ConfigError("task profile: invalid burst duration range");
  }
}

TaskProfile TaskProfile::placement() { return TaskProfile{}; }

TaskProfile TaskProfile::prying() {
  TaskProfile p;
  p.name = "prying";
  p.kind = TaskKind::kPrying;
  return p;
}

TaskProfile TaskProfile::by_name(const std::string& name) {
  if (name == "placement") return placement();
  if (name == "prying") return prying();
  throw ConfigError("unknown task profile '" + name + "' (expected placement or prying)");
}

ChannelSpec synth_channel_spec() {
  using R = ChannelRole;
  return ChannelSpec(
      {"px", "py", "pz", "qw", "qx", "qy", "qz", "fx", "fy", "fz", "tx", "ty", "tz", "stiffness",
       "contact"},
      {R::kState, R::kState, R::kState, R::kState, R::kState, R::kState, R::kState, R::kSensor,
       R::kSensor, R::kSensor, R::kSensor, R::kSensor, R::kSensor, R::kCondition, R::kCondition},
      {QuaternionGroup{"grip_q", {"qw", "qx", "qy", "qz"}}});
}

std::vector<SynthTrajectory> synth_generate(const TaskProfile& profile, std::size_t n_trajectories,
                                            double anomaly_rate, Rng& rng) {
  profile.validate();
  if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) {
    throw ConfigError("anomaly rate must lie in [0, 1]");
  }
  std::vector<SynthTrajectory> out;
  out.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    const bool burst = rng.uniform() < anomaly_rate;
    Rng traj_rng(mix_seed(rng.next_u64(), i));
    out.push_back(generate_one(profile, i, burst, traj_rng));
  }
  return out;
}

}  // namespace forcediff::data
