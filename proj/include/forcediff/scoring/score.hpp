#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forcediff/core/rng.hpp"
#include "forcediff/data/windows.hpp"
#include "forcediff/denoiser/predictor.hpp"
#include "forcediff/diffusion/process.hpp"
#include "forcediff/diffusion/schedule.hpp"

namespace forcediff::scoring {

enum class ScoreMode { kParallel, kIterative };

std::string_view mode_name(ScoreMode mode);
ScoreMode parse_mode(std::string_view name);

struct ScoreConfig {
  ScoreMode mode = ScoreMode::kParallel;
  // One replica per entry in parallel mode, so K == steps.size().
  std::vector<int> steps = {1, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  // Starting noise level of iterative scoring; 0 means T.
  int iterative_start = 0;

  std::size_t k() const { return steps.size(); }
  void validate(const diffusion::NoiseSchedule& schedule) const;
};

struct ScoreReport {
  std::string id;
  double score = 0.0;
  // Per-replica one-step scores (parallel mode only).
  std::vector<double> samples;
  std::optional<double> threshold;
  std::optional<int> decision;
  ScoreMode mode = ScoreMode::kParallel;
  double millis = 0.0;

  // One JSON object on a single line.
  std::string to_json_line() const;
};

// Decision rule: 1 iff score > tau. Throws NumericError on a non-finite score or threshold.
int decide(double score, double tau);

// ||x_{t-1} - reverse_mean(x_t)||_2 over the sensor block of one window.
// `window` holds a single window (batch 1); eps matches its sensor block.
template <typename T>
double one_step_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window, int t,
                      const Array<T>& eps, const diffusion::NoiseSchedule& schedule);

// K replicas at config.steps, noise drawn from `rng` in replica order, one
// batched model call; score is the mean of the K one-step scores.
template <typename T>
ScoreReport parallel_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                           const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng);
// Same with the replica noise supplied as [K, F, L].
template <typename T>
ScoreReport parallel_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                           const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, const Array<T>& eps);

// Noise to T_s, then reverse means for t = T_s..1; score ||f - f_hat_0||_2.
template <typename T>
ScoreReport iterative_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                            const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng);
// Same with the starting noise supplied as [1, F, L].
template <typename T>
ScoreReport iterative_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                            const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, const Array<T>& eps);

// Dispatch on config.mode.
template <typename T>
ScoreReport score_window(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                         const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng);

// Generator used for the window starting at `start`: scores depend only on
// the global seed and the window position, so replaying a stream reproduces
// batch scores.
Rng window_rng(std::uint64_t seed, std::size_t start);

std::string window_id(const data::Window& window);

// Scores every window of a dataset with its positional generator.
std::vector<ScoreReport> score_dataset(const denoiser::NoisePredictor<float>& model,
                                       const data::WindowDataset& dataset, const diffusion::MaskSpec& mask,
                                       const diffusion::NoiseSchedule& schedule, const ScoreConfig& config,
                                       std::uint64_t seed);

}  // namespace forcediff::scoring
