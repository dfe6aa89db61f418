#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "forcediff/data/split.hpp"
#include "forcediff/denoiser/unet.hpp"
#include "forcediff/diffusion/schedule.hpp"
#include "forcediff/diffusion/train.hpp"
#include "forcediff/eval/metrics.hpp"
#include "forcediff/scoring/score.hpp"

namespace forcediff::cli {

struct Paths {
  // Trajectory CSV file or a directory of them.
  std::string data;
  // Channel spec; defaults to spec.json next to the data.
  std::string spec;
  std::string checkpoint;
  // Calibration record read by score, eval and stream.
  std::string calibration;
  // Output file or directory; empty means standard output where that makes sense.
  std::string output;
};

struct SynthOptions {
  std::string profile = "placement";
  std::size_t trajectories = 50;
  std::size_t steps = 200;
  double anomaly_rate = 0.3;
  // Burst amplitude in units of sensor noise sigma.
  double burst_amplitude = 5.0;
};

struct DataOptions {
  // Window stride for calibration, scoring and evaluation. 1 matches the stream.
  std::size_t stride = 1;
  // all, train, calibration or test; empty picks the command default.
  std::string split;
  data::SplitRatios ratios;
  // Uniform subsample of calibration windows; 0 keeps every window.
  std::size_t max_calibration_windows = 0;
};

struct TrainOptions {
  diffusion::TrainConfig fit;
  std::size_t stride = 2;
  // Uniform subsample of training windows; 0 keeps every window.
  std::size_t max_windows = 4000;
};

struct EvalOptions {
  // Test set normal:anomalous ratio; 0:0 keeps every window.
  std::size_t normal_parts = 2;
  std::size_t anomaly_parts = 3;
  std::size_t max_windows = 0;
  // Evaluate parallel and iterative scoring from the same checkpoint.
  bool both_modes = false;
};

struct StreamOptions {
  // "-" for standard input or tcp://host:port.
  std::string input = "-";
  // Consecutive exceedances needed for a STOP record.
  std::size_t patience = 1;
  // Stop reading after the first STOP.
  bool halt = true;
};

struct RunConfig {
  static constexpr std::string_view kFormat = "forcediff-config";
  static constexpr int kVersion = 1;

  Paths paths;
  diffusion::DiffusionConfig diffusion;
  // Channel counts are filled in from the channel spec at training time.
  denoiser::UNetConfig unet;
  scoring::ScoreConfig score;
  TrainOptions train;
  eval::ThresholdMode calibration = eval::ThresholdMode::kMeanHalfStd;
  std::uint64_t seed = 0;
  SynthOptions synth;
  DataOptions data;
  EvalOptions eval;
  StreamOptions stream;

  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(std::string_view text);
  static RunConfig load(const std::string& path);
  std::string to_json() const;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// K noise levels {1, s, 2s, ..., (K-1)s} with s = T / K; K = 10, T = 100 gives
// the default list 1, 10, ..., 90.
std::vector<int> spaced_steps(std::size_t k, int total_steps);

// Comma-separated integers.
std::vector<int> parse_step_list(std::string_view text);

}  // namespace forcediff::cli
