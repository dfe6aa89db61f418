#include "forcediff/scoring/score.hpp"

#include <chrono>
#include <cmath>

#include "forcediff/errors.hpp"
#include "json.hpp"

namespace forcediff::scoring {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename T>
void require_single(const diffusion::ModelInput<T>& window) {
  if (window.sensor.rank() != 3 || window.sensor.dim(0) != 1 || window.conditioning.rank() != 3 ||
      window.conditioning.dim(0) != 1) {
    throw DimensionError("scoring expects a single window [1, F, L]");
  }
}

// Copies row 0 of `a` into `copies` rows.
template <typename T>
Array<T> tile(const Array<T>& a, std::size_t copies) {
  Shape s = a.shape();
  s[0] = copies;
  Array<T> out(s);
  for (std::size_t r = 0; r < copies; ++r) std::copy(a.data().begin(), a.data().end(), out.data().begin() + r * a.size());
  return out;
}

// L2 norm of a - b over row r, accumulated in double.
template <typename T>
double row_distance(const Array<T>& a, const Array<T>& b, std::size_t r, std::size_t row_size) {
  double acc = 0.0;
  for (std::size_t i = r * row_size; i < (r + 1) * row_size; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

std::string_view mode_name(ScoreMode mode) { return mode == ScoreMode::kParallel ? "parallel" : "iterative"; }

ScoreMode parse_mode(std::string_view name) {
  if (name == "parallel") return ScoreMode::kParallel;
  if (name == "iterative") return ScoreMode::kIterative;
  throw ConfigError("unknown scoring mode '" + std::string(name) + "' (expected parallel or iterative)");
}

void ScoreConfig::validate(const diffusion::NoiseSchedule& schedule) const {
  if (mode == ScoreMode::kParallel && steps.empty()) throw ConfigError("parallel scoring needs at least one step");
  for (int t : steps) schedule.require_step(t);
  if (iterative_start != 0) schedule.require_step(iterative_start);
}

std::string ScoreReport::to_json_line() const {
  nlohmann::json j = {{"id", id}, {"score", score}, {"mode", mode_name(mode)}, {"millis", millis}};
  j["threshold"] = threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr);
  j["decision"] = decision ? nlohmann::json(*decision) : nlohmann::json(nullptr);
  if (!samples.empty()) j["samples"] = samples;
  return j.dump();
}

int decide(double score, double tau) {
  if (!std::isfinite(score)) throw NumericError("anomaly score is not finite");
  if (!std::isfinite(tau)) throw NumericError("threshold is not finite");
  return score > tau ? 1 : 0;
}

template <typename T>
double one_step_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window, int t,
                      const Array<T>& eps, const diffusion::NoiseSchedule& schedule) {
  require_single(window);
  const auto pair = diffusion::q_sample_pair(window.sensor, t, eps, schedule);
  const auto mu = diffusion::reverse_mean(model, pair.x_t, window.conditioning, std::vector<int>{t}, schedule);
  return row_distance(pair.x_prev, mu, 0, mu.size());
}

template <typename T>
ScoreReport parallel_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                           const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng) {
  require_single(window);
  Shape shape = window.sensor.shape();
  shape[0] = config.k();
  return parallel_score(model, window, schedule, config, diffusion::standard_normal<T>(shape, rng));
}

template <typename T>
ScoreReport parallel_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                           const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, const Array<T>& eps) {
  const auto start = Clock::now();
  require_single(window);
  config.validate(schedule);
  const std::size_t k = config.k();
  const Array<T> x0 = tile(window.sensor, k);
  const Array<T> cond = tile(window.conditioning, k);
  require_shape(eps.shape(), x0.shape(), "parallel score noise");
  const auto pair = diffusion::q_sample_pair(x0, config.steps, eps, schedule);
  const auto mu = diffusion::reverse_mean(model, pair.x_t, cond, config.steps, schedule);

  ScoreReport r;
  r.mode = ScoreMode::kParallel;
  const std::size_t row = window.sensor.size();
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    r.samples.push_back(row_distance(pair.x_prev, mu, i, row));
    total += r.samples.back();
  }
  r.score = total / static_cast<double>(k);
  r.millis = elapsed_ms(start);
  return r;
}

template <typename T>
ScoreReport iterative_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                            const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng) {
  require_single(window);
  return iterative_score(model, window, schedule, config, diffusion::standard_normal<T>(window.sensor.shape(), rng));
}

template <typename T>
ScoreReport iterative_score(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                            const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, const Array<T>& eps) {
  const auto start = Clock::now();
  require_single(window);
  config.validate(schedule);
  const int t_start = config.iterative_start == 0 ? schedule.steps() : config.iterative_start;
  Array<T> x = diffusion::q_sample(window.sensor, std::vector<int>{t_start}, eps, schedule);
  for (int t = t_start; t >= 1; --t) {
    x = diffusion::reverse_mean(model, x, window.conditioning, std::vector<int>{t}, schedule);
  }
  ScoreReport r;
  r.mode = ScoreMode::kIterative;
  r.score = row_distance(window.sensor, x, 0, x.size());
  r.millis = elapsed_ms(start);
  return r;
}

template <typename T>
ScoreReport score_window(const denoiser::NoisePredictor<T>& model, const diffusion::ModelInput<T>& window,
                         const diffusion::NoiseSchedule& schedule, const ScoreConfig& config, Rng& rng) {
  return config.mode == ScoreMode::kParallel ? parallel_score(model, window, schedule, config, rng)
                                             : iterative_score(model, window, schedule, config, rng);
}

Rng window_rng(std::uint64_t seed, std::size_t start) { return Rng(mix_seed(seed, start)); }

std::string window_id(const data::Window& window) {
  return window.trajectory_id + "@" + std::to_string(window.start);
}

std::vector<ScoreReport> score_dataset(const denoiser::NoisePredictor<float>& model,
                                       const data::WindowDataset& dataset, const diffusion::MaskSpec& mask,
                                       const diffusion::NoiseSchedule& schedule, const ScoreConfig& config,
                                       std::uint64_t seed) {
  std::vector<ScoreReport> out;
  out.reserve(dataset.size());
  for (const auto& w : dataset.windows) {
    Rng rng = window_rng(seed, w.start);
    ScoreReport r = score_window(model, diffusion::gather_window<float>(w, mask), schedule, config, rng);
    r.id = window_id(w);
    out.push_back(std::move(r));
  }
  return out;
}

#define FORCEDIFF_INSTANTIATE(T)                                                                                 \
  template double one_step_score<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&, int,   \
                                    const Array<T>&, const diffusion::NoiseSchedule&);                         \
  template ScoreReport parallel_score<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&,   \
                                         const diffusion::NoiseSchedule&, const ScoreConfig&, Rng&);           \
  template ScoreReport parallel_score<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&,   \
                                         const diffusion::NoiseSchedule&, const ScoreConfig&, const Array<T>&); \
  template ScoreReport iterative_score<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&,  \
                                          const diffusion::NoiseSchedule&, const ScoreConfig&, const Array<T>&); \
  template ScoreReport iterative_score<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&,  \
                                          const diffusion::NoiseSchedule&, const ScoreConfig&, Rng&);          \
  template ScoreReport score_window<T>(const denoiser::NoisePredictor<T>&, const diffusion::ModelInput<T>&,     \
                                       const diffusion::NoiseSchedule&, const ScoreConfig&, Rng&);

FORCEDIFF_INSTANTIATE(float)
FORCEDIFF_INSTANTIATE(double)

}  // namespace forcediff::scoring
