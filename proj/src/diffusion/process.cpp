#include "forcediff/diffusion/process.hpp"

#include <cmath>

#include "forcediff/errors.hpp"

namespace forcediff::diffusion {
namespace {

// Per-sample step for row b: a single step applies to every row.
struct StepMap {
  std::span<const int> steps;
  std::size_t rows;
  std::size_t row_size;

  StepMap(const Shape& shape, std::span<const int> s, const char* what) : steps(s) {
    if (steps.empty()) throw ConfigError(std::string(what) + ": no diffusion step given");
    rows = steps.size() == 1 ? 1 : (shape.empty() ? 0 : shape[0]);
    if (steps.size() != 1 && steps.size() != rows) {
      throw DimensionError(std::string(what) + ": " + std::to_string(steps.size()) + " steps for leading extent " +
                           std::to_string(rows));
    }
    row_size = shape_size(shape) / rows;
  }
  int operator[](std::size_t row) const { return steps[steps.size() == 1 ? 0 : row]; }
};

}  // namespace

template <typename T>
ModelInput<T> gather_windows(std::span<const data::Window> windows, const MaskSpec& mask) {
  if (windows.empty()) throw DataError("no windows to gather");
  const std::size_t length = windows[0].values.dim(0);
  const std::size_t f = mask.sensor.size(), c = mask.conditioning.size(), b = windows.size();
  ModelInput<T> out{Array<T>(Shape{b, f, length}), Array<T>(Shape{b, c, length})};
  for (std::size_t i = 0; i < b; ++i) {
    const Array<float>& v = windows[i].values;
    if (v.rank() != 2 || v.dim(0) != length || v.dim(1) != mask.channels()) {
      throw DimensionError("window " + windows[i].trajectory_id + "@" + std::to_string(windows[i].start) +
                           " has shape " + shape_string(v.shape()) + ", expected [" + std::to_string(length) +
                           "," + std::to_string(mask.channels()) + "]");
    }
    for (std::size_t l = 0; l < length; ++l) {
      for (std::size_t j = 0; j < f; ++j) out.sensor.at(i, j, l) = static_cast<T>(v.at(l, mask.sensor[j]));
      for (std::size_t j = 0; j < c; ++j) {
        out.conditioning.at(i, j, l) = static_cast<T>(v.at(l, mask.conditioning[j]));
      }
    }
  }
  return out;
}

template <typename T>
ModelInput<T> gather_window(const data::Window& window, const MaskSpec& mask) {
  return gather_windows<T>(std::span<const data::Window>(&window, 1), mask);
}

template <typename T>
ModelInput<T> select_rows(const ModelInput<T>& all, std::span<const std::size_t> indices) {
  auto pick = [&](const Array<T>& a) {
    Shape s = a.shape();
    const std::size_t row = shape_size(s) / s[0];
    s[0] = indices.size();
    Array<T> out(s);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= a.dim(0)) throw DimensionError("row index out of range");
      std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(indices[i] * row), row,
                  out.data().begin() + static_cast<std::ptrdiff_t>(i * row));
    }
    return out;
  };
  return {pick(all.sensor), pick(all.conditioning)};
}

template <typename T>
Array<T> standard_normal(const Shape& shape, Rng& rng) {
  Array<T> out(shape);
  for (auto& v : out.data()) v = static_cast<T>(rng.normal());
  return out;
}

template <typename T>
Array<T> q_sample(const Array<T>& x0, std::span<const int> steps, const Array<T>& eps,
                  const NoiseSchedule& schedule) {
  require_shape(eps.shape(), x0.shape(), "q_sample noise");
  const StepMap map(x0.shape(), steps, "q_sample");
  Array<T> out(x0.shape());
  for (std::size_t r = 0; r < map.rows; ++r) {
    schedule.require_step(map[r]);
    const double a = std::sqrt(schedule.alpha_bar(map[r]));
    const double s = std::sqrt(1.0 - schedule.alpha_bar(map[r]));
    for (std::size_t i = r * map.row_size; i < (r + 1) * map.row_size; ++i) {
      out[i] = static_cast<T>(a * x0[i] + s * eps[i]);
    }
  }
  out.require_finite("q_sample");
  return out;
}

template <typename T>
NoisedPair<T> q_sample_pair(const Array<T>& x0, std::span<const int> steps, const Array<T>& eps,
                            const NoiseSchedule& schedule) {
  for (int t : steps) schedule.require_step(t);
  NoisedPair<T> out{q_sample(x0, steps, eps, schedule), Array<T>(x0.shape())};
  const StepMap map(x0.shape(), steps, "q_sample_pair");
  for (std::size_t r = 0; r < map.rows; ++r) {
    const int t = map[r] - 1;
    const double a = std::sqrt(schedule.alpha_bar(t));
    const double s = std::sqrt(1.0 - schedule.alpha_bar(t));
    for (std::size_t i = r * map.row_size; i < (r + 1) * map.row_size; ++i) {
      out.x_prev[i] = static_cast<T>(a * x0[i] + s * eps[i]);
    }
  }
  return out;
}

template <typename T>
Array<T> reverse_mean_from_noise(const Array<T>& x_t, const Array<T>& eps_hat, std::span<const int> steps,
                                 const NoiseSchedule& schedule) {
  require_shape(eps_hat.shape(), x_t.shape(), "reverse_mean noise estimate");
  const StepMap map(x_t.shape(), steps, "reverse_mean");
  Array<T> out(x_t.shape());
  for (std::size_t r = 0; r < map.rows; ++r) {
    const int t = map[r];
    schedule.require_step(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
    const double coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    for (std::size_t i = r * map.row_size; i < (r + 1) * map.row_size; ++i) {
      out[i] = static_cast<T>(inv_sqrt_alpha * (static_cast<double>(x_t[i]) - coef * eps_hat[i]));
    }
  }
  out.require_finite("reverse_mean");
  return out;
}

template <typename T>
Array<T> reverse_mean(const denoiser::NoisePredictor<T>& model, const Array<T>& x_t,
                      const Array<T>& conditioning, std::span<const int> steps, const NoiseSchedule& schedule) {
  for (int t : steps) schedule.require_step(t);
  std::vector<int> per_row(steps.begin(), steps.end());
  if (per_row.size() == 1 && x_t.rank() == 3) per_row.assign(x_t.dim(0), steps[0]);
  const Array<T> eps_hat = model.predict_noise(x_t, conditioning, per_row);
  return reverse_mean_from_noise(x_t, eps_hat, per_row, schedule);
}

#define FORCEDIFF_INSTANTIATE(T)                                                                              \
  template ModelInput<T> gather_windows<T>(std::span<const data::Window>, const MaskSpec&);                  \
  template ModelInput<T> gather_window<T>(const data::Window&, const MaskSpec&);                             \
  template ModelInput<T> select_rows<T>(const ModelInput<T>&, std::span<const std::size_t>);                 \
  template Array<T> standard_normal<T>(const Shape&, Rng&);                                                   \
  template Array<T> q_sample<T>(const Array<T>&, std::span<const int>, const Array<T>&, const NoiseSchedule&); \
  template NoisedPair<T> q_sample_pair<T>(const Array<T>&, std::span<const int>, const Array<T>&,              \
                                          const NoiseSchedule&);                                              \
  template Array<T> reverse_mean_from_noise<T>(const Array<T>&, const Array<T>&, std::span<const int>,        \
                                               const NoiseSchedule&);                                         \
  template Array<T> reverse_mean<T>(const denoiser::NoisePredictor<T>&, const Array<T>&, const Array<T>&,     \
                                    std::span<const int>, const NoiseSchedule&);

FORCEDIFF_INSTANTIATE(float)
FORCEDIFF_INSTANTIATE(double)

}  // namespace forcediff::diffusion
