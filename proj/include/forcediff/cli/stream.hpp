#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forcediff/cli/config.hpp"
#include "forcediff/denoiser/checkpoint.hpp"
#include "forcediff/denoiser/predictor.hpp"
#include "forcediff/diffusion/schedule.hpp"
#include "forcediff/scoring/score.hpp"

namespace forcediff::cli {

struct StreamDecision {
  double t = 0.0;
  // Index of the first step of the scored window among accepted steps.
  std::size_t start = 0;
  double score = 0.0;
  int decision = 0;
  // Set once `patience` consecutive decisions have been 1.
  bool stop = false;
};

// Rolling window over raw rows. Once L rows are buffered every new row scores
// the latest window with the generator of its start index, so the scores match
// batch scoring of the same trajectory with stride 1.
class StreamDetector {
 public:
  StreamDetector(const denoiser::Checkpoint& checkpoint, scoring::ScoreConfig score, double tau,
                 std::uint64_t seed, std::size_t patience);

  // `raw_row` is one step in raw spec order. No decision until the buffer is full.
  std::optional<StreamDecision> push(double t, std::span<const double> raw_row);

  std::size_t accepted() const { return accepted_; }
  std::size_t raw_channels() const { return checkpoint_.channels.size(); }

 private:
  const denoiser::Checkpoint& checkpoint_;
  denoiser::UNetPredictor<float> model_;
  diffusion::NoiseSchedule schedule_;
  scoring::ScoreConfig score_;
  double tau_;
  std::uint64_t seed_;
  std::size_t patience_;
  std::size_t length_;
  std::deque<std::vector<float>> buffer_;
  std::size_t accepted_ = 0;
  std::size_t run_ = 0;
};

// Returns false at end of input.
using LineSource = std::function<bool(std::string&)>;

LineSource istream_lines(std::istream& in);
// Connects to tcp://host:port and reads newline-delimited records.
LineSource tcp_lines(const std::string& address);

struct StreamSummary {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t decisions = 0;
  std::optional<double> first_stop;
  std::vector<StreamDecision> history;
};

// Input lines are {"t": number, "values": [raw channels]}; output lines are
// {"t", "score", "decision"} plus {"t", "event": "STOP"} records. Malformed
// lines produce a warning on `log` and leave the buffer unchanged.
StreamSummary run_stream(const denoiser::Checkpoint& checkpoint, const RunConfig& config, double tau,
                         const LineSource& input, std::ostream& out, std::ostream& log);

// Loads the checkpoint and calibration record named by the config and reads
// stream.input ("-" is standard input).
StreamSummary cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& log);

}  // namespace forcediff::cli
