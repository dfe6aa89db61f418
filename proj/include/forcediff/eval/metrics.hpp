#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace forcediff::eval {

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion counts;
};

// Labels are 0 (normal) or 1 (anomalous); scores must be finite and the
// spans of equal, nonzero length. Violations throw DataError.
void validate_labeled(std::span<const double> scores, std::span<const int> labels);

// Predictions are score > tau. Zero denominators give 0.
Metrics precision_recall_f1(std::span<const double> scores, std::span<const int> labels, double tau);

enum class ThresholdMode { kMeanHalfStd, kMax };
std::string_view threshold_mode_name(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view name);

// mean + 0.5 * population std, or the maximum, of normal-only scores.
double calibrate_threshold(std::span<const double> calibration_scores, ThresholdMode mode);

struct BestF1 {
  double f1 = 0.0;
  double threshold = 0.0;
};

// Best F1 over the thresholds between consecutive distinct scores plus one
// below the minimum and one above the maximum; ties keep the smallest
// threshold. Requires both labels.
BestF1 best_f1_search(std::span<const double> scores, std::span<const int> labels);

// Probability that an anomalous score exceeds a normal one, ties counting
// one half, via average ranks. Requires both labels.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  double tau_c = 0.0;
  Metrics calibrated;
  BestF1 best;
  Metrics at_best;
  double auroc = 0.0;
  std::size_t normal = 0;
  std::size_t anomalous = 0;

  std::string to_json() const;
  std::string to_table() const;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double tau_c);

}  // namespace forcediff::eval
