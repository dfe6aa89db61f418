#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forcediff/cli/config.hpp"
#include "forcediff/data/channel_spec.hpp"
#include "forcediff/data/scaler.hpp"
#include "forcediff/data/trajectory.hpp"
#include "forcediff/data/windows.hpp"
#include "forcediff/denoiser/checkpoint.hpp"
#include "forcediff/eval/metrics.hpp"
#include "forcediff/scoring/score.hpp"

namespace forcediff::cli {

// Raw trajectories from paths.data (a CSV file or every *.csv in a
// directory, sorted by name) and the channel spec that reads them.
struct RawData {
  data::ChannelSpec spec;
  std::vector<data::Trajectory> trajectories;
};
// A checkpoint's spec, when given, takes precedence over paths.spec.
RawData load_raw_data(const RunConfig& config, const data::ChannelSpec* spec = nullptr);

// Trajectories of split `name` under the config seed; "all" keeps everything.
std::vector<data::Trajectory> select_split(std::vector<data::Trajectory> trajectories, std::string_view name,
                                           const RunConfig& config);

// Rotation conversion, scaling and windowing of raw trajectories.
data::WindowDataset prepare_windows(std::span<const data::Trajectory> raw, const data::ChannelSpec& spec,
                                    const data::Scaler& scaler, std::size_t length, std::size_t stride);

struct SynthSummary {
  std::vector<std::string> files;
  std::size_t flagged_steps = 0;
};
// Writes <id>.csv per trajectory, spec.json and manifest.json into paths.output.
SynthSummary cmd_synth(const RunConfig& config, std::ostream& log);

struct TrainSummary {
  std::size_t windows = 0;
  std::vector<double> epoch_loss;
};
// Fits the scaler and the denoiser on the train split and writes paths.checkpoint.
TrainSummary cmd_train(const RunConfig& config, std::ostream& log);

struct CalibrationRecord {
  static constexpr std::string_view kFormat = "forcediff-calibration";
  static constexpr int kVersion = 1;

  eval::ThresholdMode mode = eval::ThresholdMode::kMeanHalfStd;
  double threshold = 0.0;
  scoring::ScoreMode score_mode = scoring::ScoreMode::kParallel;
  std::vector<int> steps;
  int iterative_start = 0;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;

  std::string to_json() const;
  static CalibrationRecord from_json(std::string_view text);
  static CalibrationRecord load(const std::string& path);
};

CalibrationRecord make_calibration_record(std::span<const double> scores, eval::ThresholdMode mode,
                                          const scoring::ScoreConfig& score, std::uint64_t seed);

// Scores the normal-only calibration split; the record goes to paths.output,
// or to `out` when no output is set.
CalibrationRecord cmd_calibrate(const RunConfig& config, std::ostream& out, std::ostream& log);

// One JSON line per window on `out`, with a decision when paths.calibration is set.
std::vector<scoring::ScoreReport> cmd_score(const RunConfig& config, std::ostream& out, std::ostream& log);

struct EvalRow {
  scoring::ScoreMode mode = scoring::ScoreMode::kParallel;
  eval::EvalReport report;
  double millis_per_window = 0.0;
};
// Scores the labeled test split, prints the table to `out` and writes the
// record to paths.output when set.
std::vector<EvalRow> cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& log);
std::string eval_table(std::span<const EvalRow> rows);
std::string eval_record(std::span<const EvalRow> rows);

// The checkpoint at paths.checkpoint. Scoring commands use its schedule, mask,
// scaler and spec rather than the config's.
denoiser::Checkpoint load_model(const RunConfig& config);

}  // namespace forcediff::cli
