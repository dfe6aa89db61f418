#include "forcediff/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "forcediff/errors.hpp"
#include "json.hpp"

namespace forcediff::eval {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Metrics from_counts(const Confusion& c) {
  Metrics m;
  m.counts = c;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

void require_both_labels(std::span<const int> labels, const char* what) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
    throw DataError(std::string(what) + " needs both normal and anomalous samples");
  }
}

// Indices sorted by ascending score.
std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

nlohmann::json metrics_json(const Metrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"tp", m.counts.tp},
          {"fp", m.counts.fp},
          {"fn", m.counts.fn},
          {"tn", m.counts.tn}};
}

}  // namespace

void validate_labeled(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw DataError("no scores to evaluate");
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("score " + std::to_string(i) + " is not finite");
    if (labels[i] != 0 && labels[i] != 1) throw DataError("label " + std::to_string(i) + " is not 0 or 1");
  }
}

Metrics precision_recall_f1(std::span<const double> scores, std::span<const int> labels, double tau) {
  validate_labeled(scores, labels);
  if (!std::isfinite(tau)) throw ConfigError("threshold must be finite");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > tau;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn)++;
    } else {
      (predicted ? c.fp : c.tn)++;
    }
  }
  return from_counts(c);
}

std::string_view threshold_mode_name(ThresholdMode mode) {
  return mode == ThresholdMode::kMeanHalfStd ? "mean_half_std" : "max";
}

ThresholdMode parse_threshold_mode(std::string_view name) {
  if (name == "mean_half_std") return ThresholdMode::kMeanHalfStd;
  if (name == "max") return ThresholdMode::kMax;
  throw ConfigError("unknown threshold mode '" + std::string(name) + "' (expected mean_half_std or max)");
}

double calibrate_threshold(std::span<const double> scores, ThresholdMode mode) {
  if (scores.empty()) throw DataError("calibration needs at least one score");
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("calibration score is not finite");
  }
  if (mode == ThresholdMode::kMax) return *std::max_element(scores.begin(), scores.end());
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return mean + 0.5 * std::sqrt(ss / n);
}

BestF1 best_f1_search(std::span<const double> scores, std::span<const int> labels) {
  validate_labeled(scores, labels);
  require_both_labels(labels, "best-F1 search");
  const auto idx = order_by_score(scores);
  const std::size_t positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));

  // Threshold below the minimum: everything is predicted anomalous.
  Confusion c{positives, scores.size() - positives, 0, 0};
  BestF1 best{from_counts(c).f1, scores[idx.front()] - 1.0};
  for (std::size_t i = 0; i < idx.size();) {
    // Move every sample tied at this score to the predicted-normal side.
    const double v = scores[idx[i]];
    for (; i < idx.size() && scores[idx[i]] == v; ++i) {
      if (labels[idx[i]] == 1) {
        --c.tp;
        ++c.fn;
      } else {
        --c.fp;
        ++c.tn;
      }
    }
    const double tau = i < idx.size() ? v + (scores[idx[i]] - v) / 2.0 : v + 1.0;
    const double f1 = from_counts(c).f1;
    if (f1 > best.f1) best = {f1, tau};
  }
  return best;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  validate_labeled(scores, labels);
  require_both_labels(labels, "AUROC");
  const auto idx = order_by_score(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    // Ranks i+1..j share their average.
    const double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) rank_sum += avg;
    }
    i = j;
  }
  const double np = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double nn = static_cast<double>(labels.size()) - np;
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double tau_c) {
  EvalReport r;
  r.tau_c = tau_c;
  r.calibrated = precision_recall_f1(scores, labels, tau_c);
  r.best = best_f1_search(scores, labels);
  r.at_best = precision_recall_f1(scores, labels, r.best.threshold);
  r.auroc = auroc(scores, labels);
  r.anomalous = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.normal = labels.size() - r.anomalous;
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::json j = {{"tau_c", tau_c},
                      {"f1_c", calibrated.f1},
                      {"calibrated", metrics_json(calibrated)},
                      {"tau_best", best.threshold},
                      {"f1_best", best.f1},
                      {"best", metrics_json(at_best)},
                      {"auroc", auroc},
                      {"normal", normal},
                      {"anomalous", anomalous}};
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "windows   %zu (normal %zu, anomalous %zu)\n", normal + anomalous, normal,
                anomalous);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10s %12s %9s %9s %9s %6s %6s %6s %6s\n", "threshold", "tau", "precision",
                "recall", "F1", "TP", "FP", "FN", "TN");
  out += buf;
  auto row = [&](const char* name, double tau, const Metrics& m) {
    std::snprintf(buf, sizeof buf, "%-10s %12.6g %9.4f %9.4f %9.4f %6zu %6zu %6zu %6zu\n", name, tau, m.precision,
                  m.recall, m.f1, m.counts.tp, m.counts.fp, m.counts.fn, m.counts.tn);
    out += buf;
  };
  row("calibrated", tau_c, calibrated);
  row("best", best.threshold, at_best);
  std::snprintf(buf, sizeof buf, "AUROC     %.4f\n", auroc);
  out += buf;
  return out;
}

}  // namespace forcediff::eval
