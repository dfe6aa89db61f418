#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "forcediff/core/rng.hpp"
#include "forcediff/errors.hpp"
#include "forcediff/eval/metrics.hpp"
#include "json.hpp"

using namespace forcediff;
using namespace forcediff::eval;

namespace {

// F1 at tau recomputed by direct counting.
double f1_oracle(const std::vector<double>& s, const std::vector<int>& y, double tau) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool p = s[i] > tau;
    tp += p && y[i] == 1;
    fp += p && y[i] == 0;
    fn += !p && y[i] == 1;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Best F1 over every score value and one point below all of them.
double best_f1_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double best = f1_oracle(s, y, *std::min_element(s.begin(), s.end()) - 1.0);
  for (double tau : s) best = std::max(best, f1_oracle(s, y, tau));
  return best;
}

// Pair counting with ties worth one half.
double auroc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

struct Labeled {
  std::vector<double> scores;
  std::vector<int> labels;
};

Labeled random_labeled(std::size_t n, Rng& rng, int levels = 0) {
  Labeled d;
  while (true) {
    d.scores.clear();
    d.labels.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const int y = rng.uniform() < 0.4 ? 1 : 0;
      double s = rng.normal() + y;
      if (levels > 0) s = std::round(s * levels) / levels;
      d.scores.push_back(s);
      d.labels.push_back(y);
    }
    const auto pos = std::count(d.labels.begin(), d.labels.end(), 1);
    if (pos > 0 && pos < static_cast<long>(n)) return d;
  }
}

}  // namespace

TEST_CASE("precision, recall and F1 on hand cases") {
  SUBCASE("TP=2 FP=1 FN=1") {
    const std::vector<double> s = {0.9, 0.8, 0.7, 0.1, 0.2};
    const std::vector<int> y = {1, 1, 0, 1, 0};
    const auto m = precision_recall_f1(s, y, 0.5);
    CHECK(m.counts.tp == 2);
    CHECK(m.counts.fp == 1);
    CHECK(m.counts.fn == 1);
    CHECK(m.counts.tn == 1);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("perfect") {
    const std::vector<double> s = {0.1, 0.9};
    const std::vector<int> y = {0, 1};
    const auto m = precision_recall_f1(s, y, 0.5);
    CHECK(m.f1 == 1.0);
  }
  SUBCASE("nothing predicted and no positives give zeros") {
    const std::vector<double> s = {0.1, 0.2};
    const std::vector<int> y = {0, 0};
    const auto m = precision_recall_f1(s, y, 0.5);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
  }
  SUBCASE("score equal to tau is normal") {
    const std::vector<double> s = {0.5};
    const std::vector<int> y = {1};
    CHECK(precision_recall_f1(s, y, 0.5).counts.fn == 1);
  }
}

TEST_CASE("input validation") {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> bad = {0, 2};
  const std::vector<int> short_labels = {0};
  CHECK_THROWS_AS(precision_recall_f1(s, bad, 0.1), DataError);
  CHECK_THROWS_AS(precision_recall_f1(s, short_labels, 0.1), DataError);
  const std::vector<double> nan = {0.1, std::nan("")};
  const std::vector<int> y = {0, 1};
  CHECK_THROWS_AS(auroc(nan, y), DataError);
  const std::vector<int> one_class = {0, 0};
  CHECK_THROWS_AS(auroc(s, one_class), DataError);
  CHECK_THROWS_AS(best_f1_search(s, one_class), DataError);
}

TEST_CASE("threshold calibration") {
  const std::vector<double> s = {1.0, 2.0, 3.0};
  CHECK(calibrate_threshold(s, ThresholdMode::kMeanHalfStd) ==
        doctest::Approx(2.0 + 0.5 * std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(calibrate_threshold(s, ThresholdMode::kMeanHalfStd) == doctest::Approx(2.408).epsilon(1e-3));
  CHECK(calibrate_threshold(s, ThresholdMode::kMax) == 3.0);
  const std::vector<double> flat = {0.7, 0.7, 0.7};
  CHECK(calibrate_threshold(flat, ThresholdMode::kMeanHalfStd) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK_THROWS_AS(calibrate_threshold(std::vector<double>{}, ThresholdMode::kMax), DataError);
  CHECK(parse_threshold_mode("max") == ThresholdMode::kMax);
  CHECK(threshold_mode_name(parse_threshold_mode("mean_half_std")) == "mean_half_std");
  CHECK_THROWS_AS(parse_threshold_mode("median"), ConfigError);
}

TEST_CASE("best-F1 search on a separable set") {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.8, 0.9};
  const std::vector<int> y = {0, 0, 0, 1, 1};
  const auto b = best_f1_search(s, y);
  CHECK(b.f1 == 1.0);
  CHECK(b.threshold > 0.3);
  CHECK(b.threshold < 0.8);
  CHECK(precision_recall_f1(s, y, b.threshold).f1 == 1.0);
}

TEST_CASE("best-F1 search matches an exhaustive sweep") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = random_labeled(20, rng, trial % 2 == 0 ? 4 : 0);
    const auto b = best_f1_search(d.scores, d.labels);
    CHECK(b.f1 == doctest::Approx(best_f1_oracle(d.scores, d.labels)).epsilon(1e-12));
    // The reported threshold achieves the reported F1.
    CHECK(f1_oracle(d.scores, d.labels, b.threshold) == doctest::Approx(b.f1).epsilon(1e-12));
  }
}

TEST_CASE("best-F1 ties keep the smallest threshold") {
  // Flagging everything and flagging only the top score both give F1 = 2/3.
  const std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
  const std::vector<int> y = {1, 0, 0, 1};
  const auto b = best_f1_search(s, y);
  CHECK(b.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(b.threshold == 0.0);
  CHECK(f1_oracle(s, y, 3.5) == doctest::Approx(b.f1));
}

TEST_CASE("AUROC hand cases") {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  CHECK(auroc(s, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auroc(s, std::vector<int>{1, 1, 0, 0}) == 0.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) == 0.5);
  CHECK(auroc(s, std::vector<int>{0, 1, 0, 1}) == doctest::Approx(0.75));
}

TEST_CASE("AUROC matches pair counting with ties") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_labeled(200, rng, trial % 2 == 0 ? 3 : 0);
    CHECK(auroc(d.scores, d.labels) == doctest::Approx(auroc_oracle(d.scores, d.labels)).epsilon(1e-12));
  }
}

TEST_CASE("AUROC and best F1 are invariant to strictly increasing transforms") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = random_labeled(60, rng, trial % 2 == 0 ? 4 : 0);
    std::vector<double> g;
    for (double v : d.scores) g.push_back(std::exp(2.0 * v) + 5.0);
    CHECK(auroc(g, d.labels) == doctest::Approx(auroc(d.scores, d.labels)).epsilon(1e-12));
    const auto a = best_f1_search(d.scores, d.labels);
    const auto b = best_f1_search(g, d.labels);
    CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
    // Both optimal thresholds induce the same partition.
    for (std::size_t i = 0; i < g.size(); ++i) CHECK((d.scores[i] > a.threshold) == (g[i] > b.threshold));
  }
}

TEST_CASE("evaluation report") {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.8, 0.9, 0.25};
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  const auto r = evaluate(s, y, 0.5);
  CHECK(r.normal == 3);
  CHECK(r.anomalous == 3);
  CHECK(r.calibrated.f1 == doctest::Approx(0.8));
  CHECK(r.best.f1 >= r.calibrated.f1);
  CHECK(r.at_best.f1 == doctest::Approx(r.best.f1));
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["auroc"].get<double>() == doctest::Approx(auroc_oracle(s, y)));
  CHECK(j["f1_c"].get<double>() == doctest::Approx(0.8));
  CHECK(j["calibrated"]["tp"] == 2);
  const auto table = r.to_table();
  CHECK(table.find("AUROC") != std::string::npos);
  CHECK(table.find("calibrated") != std::string::npos);
}
