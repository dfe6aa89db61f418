#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "forcediff/denoiser/predictor.hpp"
#include "forcediff/diffusion/schedule.hpp"
#include "forcediff/errors.hpp"
#include "forcediff/scoring/score.hpp"
#include "json.hpp"
#include "support/oracles.hpp"
#include "support/toy_model.hpp"

using namespace forcediff;
using namespace forcediff::scoring;
using diffusion::ModelInput;

namespace {

const diffusion::NoiseSchedule& default_schedule() {
  static const diffusion::NoiseSchedule s = diffusion::build_linear_schedule(diffusion::DiffusionConfig{});
  return s;
}

template <typename T>
Array<T> row(const Array<T>& a, std::size_t r) {
  Shape s = a.shape();
  const std::size_t n = a.size() / s[0];
  s[0] = 1;
  Array<T> out(s);
  std::copy(a.data().begin() + r * n, a.data().begin() + (r + 1) * n, out.data().begin());
  return out;
}

double l2(const Array<double>& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("decision rule is strict and rejects non-finite input") {
  CHECK(decide(0.5, 0.5) == 0);
  CHECK(decide(0.6, 0.5) == 1);
  CHECK(decide(0.4, 0.5) == 0);
  CHECK_THROWS_AS(decide(std::nan(""), 0.5), NumericError);
  CHECK_THROWS_AS(decide(1.0, std::numeric_limits<double>::infinity()), NumericError);
}

TEST_CASE("mode names round trip") {
  CHECK(parse_mode("parallel") == ScoreMode::kParallel);
  CHECK(parse_mode(mode_name(ScoreMode::kIterative)) == ScoreMode::kIterative);
  CHECK_THROWS_AS(parse_mode("fast"), ConfigError);
}

TEST_CASE("config validation") {
  ScoreConfig c;
  CHECK(c.k() == 10);
  CHECK_NOTHROW(c.validate(default_schedule()));
  c.steps = {0, 5};
  CHECK_THROWS_AS(c.validate(default_schedule()), ConfigError);
  c.steps = {};
  CHECK_THROWS_AS(c.validate(default_schedule()), ConfigError);
  c = ScoreConfig{};
  c.iterative_start = 101;
  CHECK_THROWS_AS(c.validate(default_schedule()), ConfigError);
}

TEST_CASE("one-step score under the true-noise predictor") {
  Rng rng(5);
  const auto win = testing::random_toy_batch<double>(1, rng);
  const auto& sched = default_schedule();

  SUBCASE("zero noise gives zero") {
    const Array<double> eps(win.sensor.shape());
    testing::TrueNoisePredictor<double> oracle(eps);
    for (int t : {1, 2, 50, 100}) CHECK(one_step_score(oracle, win, t, eps, sched) <= 1e-12);
  }
  SUBCASE("general noise gives |c(t)| * ||eps||") {
    const auto eps = diffusion::standard_normal<double>(win.sensor.shape(), rng);
    testing::TrueNoisePredictor<double> oracle(eps);
    const double norm = l2(eps);
    for (int t = 1; t <= 100; ++t) {
      const double want = std::abs(testing::c_oracle(t)) * norm;
      const double got = one_step_score(oracle, win, t, eps, sched);
      CHECK(std::abs(got - want) <= 1e-9 * want + 1e-12 * norm);
    }
  }
}

TEST_CASE("one-step score with a zero predictor matches the closed form") {
  Rng rng(6);
  const auto win = testing::random_toy_batch<double>(1, rng);
  const auto eps = diffusion::standard_normal<double>(win.sensor.shape(), rng);
  const auto& sched = default_schedule();
  testing::TrueNoisePredictor<double> zero{Array<double>(win.sensor.shape())};
  for (int t : {1, 7, 60, 100}) {
    // x_{t-1} - x_t / sqrt(alpha_t) computed independently.
    const long double ab = testing::alpha_bar_oracle(t), ab_prev = testing::alpha_bar_oracle(t - 1);
    const long double alpha = 1.0L - testing::beta_oracle(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const long double x0 = win.sensor[i], e = eps[i];
      const long double xt = std::sqrt(ab) * x0 + std::sqrt(1.0L - ab) * e;
      const long double xp = std::sqrt(ab_prev) * x0 + std::sqrt(1.0L - ab_prev) * e;
      const double d = static_cast<double>(xp - xt / std::sqrt(alpha));
      acc += d * d;
    }
    CHECK(one_step_score(zero, win, t, eps, sched) == doctest::Approx(std::sqrt(acc)).epsilon(1e-10));
  }
}

TEST_CASE("parallel score under the oracle is the mean of |c(t_i)| ||eps_i||") {
  Rng rng(7);
  const auto win = testing::random_toy_batch<double>(1, rng);
  ScoreConfig cfg;
  const auto eps = diffusion::standard_normal<double>(Shape{cfg.k(), 2, 8}, rng);
  testing::TrueNoisePredictor<double> oracle(eps);
  const auto r = parallel_score(oracle, win, default_schedule(), cfg, eps);
  REQUIRE(r.samples.size() == cfg.k());
  double want = 0.0;
  for (std::size_t i = 0; i < cfg.k(); ++i) want += std::abs(testing::c_oracle(cfg.steps[i])) * l2(row(eps, i));
  want /= static_cast<double>(cfg.k());
  CHECK(r.score == doctest::Approx(want).epsilon(1e-9));
  CHECK(r.mode == ScoreMode::kParallel);
}

TEST_CASE("batched parallel score equals sequential one-step scores") {
  Rng rng(8);
  const auto params = testing::random_toy_params<float>(rng, 0.3);
  denoiser::UNetPredictor<float> model(params);
  const auto win = testing::random_toy_batch<float>(1, rng);
  ScoreConfig cfg;
  Rng noise(99);
  const auto r = parallel_score(model, win, default_schedule(), cfg, noise);

  // Same draws, replica by replica.
  Rng replay(99);
  const auto eps = diffusion::standard_normal<float>(Shape{cfg.k(), 2, 8}, replay);
  double mean = 0.0;
  for (std::size_t i = 0; i < cfg.k(); ++i) {
    const double s = one_step_score(model, win, cfg.steps[i], row(eps, i), default_schedule());
    CHECK(std::abs(r.samples[i] - s) <= 1e-5 * std::max(s, 1e-3));
    mean += s;
  }
  mean /= static_cast<double>(cfg.k());
  CHECK(std::abs(r.score - mean) <= 1e-5 * mean);

  SUBCASE("replica order does not change the mean") {
    std::vector<std::size_t> perm(cfg.k());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    ScoreConfig shuffled = cfg;
    Array<float> eps_shuffled(eps.shape());
    for (std::size_t i = 0; i < cfg.k(); ++i) {
      shuffled.steps[i] = cfg.steps[perm[i]];
      const auto src = row(eps, perm[i]);
      std::copy(src.data().begin(), src.data().end(), eps_shuffled.data().begin() + i * src.size());
    }
    const auto a = parallel_score(model, win, default_schedule(), cfg, eps);
    const auto b = parallel_score(model, win, default_schedule(), shuffled, eps_shuffled);
    CHECK(std::abs(a.score - b.score) <= 1e-5 * a.score);
  }
}

TEST_CASE("scores are deterministic per seed") {
  Rng rng(9);
  const auto params = testing::random_toy_params<float>(rng, 0.3);
  denoiser::UNetPredictor<float> model(params);
  const auto win = testing::random_toy_batch<float>(1, rng);
  ScoreConfig cfg;
  Rng a = window_rng(17, 40), b = window_rng(17, 40), c = window_rng(17, 42);
  const double sa = parallel_score(model, win, default_schedule(), cfg, a).score;
  CHECK(sa == parallel_score(model, win, default_schedule(), cfg, b).score);
  CHECK(sa != parallel_score(model, win, default_schedule(), cfg, c).score);
}

TEST_CASE("iterative score reconstructs exactly with zero noise and the oracle") {
  Rng rng(10);
  const auto win = testing::random_toy_batch<double>(1, rng);
  const Array<double> eps(win.sensor.shape());
  testing::TrueNoisePredictor<double> oracle(eps);
  ScoreConfig cfg;
  cfg.mode = ScoreMode::kIterative;
  CHECK(iterative_score(oracle, win, default_schedule(), cfg, eps).score <= 1e-12);
  cfg.iterative_start = 1;
  CHECK(iterative_score(oracle, win, default_schedule(), cfg, eps).score <= 1e-12);
  cfg.iterative_start = 37;
  CHECK(iterative_score(oracle, win, default_schedule(), cfg, eps).score <= 1e-12);
}

TEST_CASE("iterative score calls the model once per step from T_s down to 1") {
  Rng rng(11);
  const auto win = testing::random_toy_batch<float>(1, rng);
  testing::SpyPredictor<float> spy;
  ScoreConfig cfg;
  cfg.mode = ScoreMode::kIterative;
  Rng noise(1);
  score_window(spy, win, default_schedule(), cfg, noise);
  REQUIRE(spy.steps_.size() == 100);
  CHECK(spy.steps_.front() == std::vector<int>{100});
  CHECK(spy.steps_.back() == std::vector<int>{1});
}

TEST_CASE("scoring keeps conditioning clean and scores only sensor channels") {
  Rng rng(12);
  auto win = testing::random_toy_batch<float>(1, rng);
  ScoreConfig cfg;
  testing::SpyPredictor<float> spy;
  Rng n1(3);
  const double before = parallel_score(spy, win, default_schedule(), cfg, n1).score;
  REQUIRE(spy.conditioning_.size() == 1);
  const auto& seen = spy.conditioning_[0];
  REQUIRE(seen.dim(0) == cfg.k());
  for (std::size_t r = 0; r < cfg.k(); ++r) {
    for (std::size_t i = 0; i < win.conditioning.size(); ++i) {
      CHECK(seen[r * win.conditioning.size() + i] == win.conditioning[i]);
    }
  }
  CHECK(spy.steps_[0] == cfg.steps);

  // Perturbing conditioning cannot move the score of a conditioning-blind model.
  for (auto& v : win.conditioning.data()) v += 3.0f;
  Rng n2(3);
  CHECK(parallel_score(spy, win, default_schedule(), cfg, n2).score == before);
}

TEST_CASE("score report JSON line") {
  ScoreReport r;
  r.id = "traj_3@12";
  r.score = 0.25;
  r.samples = {0.2, 0.3};
  r.threshold = 0.2;
  r.decision = 1;
  const std::string line = r.to_json_line();
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["id"] == "traj_3@12");
  CHECK(j["score"].get<double>() == 0.25);
  CHECK(j["decision"] == 1);
  CHECK(j["mode"] == "parallel");
  CHECK(j["samples"].size() == 2);

  ScoreReport bare;
  const auto k = nlohmann::json::parse(bare.to_json_line());
  CHECK(k["threshold"].is_null());
  CHECK(k["decision"].is_null());
}

TEST_CASE("scoring rejects batched input") {
  Rng rng(13);
  const auto two = testing::random_toy_batch<float>(2, rng);
  testing::SpyPredictor<float> spy;
  Rng noise(0);
  CHECK_THROWS_AS(parallel_score(spy, two, default_schedule(), ScoreConfig{}, noise), DimensionError);
}
