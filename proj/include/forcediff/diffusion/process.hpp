#pragma once

#include <span>
#include <vector>

#include "forcediff/core/array.hpp"
#include "forcediff/core/rng.hpp"
#include "forcediff/data/windows.hpp"
#include "forcediff/denoiser/predictor.hpp"
#include "forcediff/diffusion/schedule.hpp"

namespace forcediff::diffusion {

// Channel-major model inputs gathered from time-major windows.
template <typename T>
struct ModelInput {
  Array<T> sensor;        // [B, F, L]
  Array<T> conditioning;  // [B, C, L]

  std::size_t batch() const { return sensor.dim(0); }
};

template <typename T>
ModelInput<T> gather_windows(std::span<const data::Window> windows, const MaskSpec& mask);
template <typename T>
ModelInput<T> gather_window(const data::Window& window, const MaskSpec& mask);

// Rows `indices` of a gathered batch.
template <typename T>
ModelInput<T> select_rows(const ModelInput<T>& all, std::span<const std::size_t> indices);

// Standard normal array drawn in storage order.
template <typename T>
Array<T> standard_normal(const Shape& shape, Rng& rng);

template <typename T>
struct NoisedPair {
  Array<T> x_t;
  Array<T> x_prev;
};

// x_t and x_{t-1} from the same eps. With a single step the whole array uses
// it; otherwise steps.size() must equal the leading extent.
template <typename T>
NoisedPair<T> q_sample_pair(const Array<T>& x0, std::span<const int> steps, const Array<T>& eps,
                            const NoiseSchedule& schedule);
template <typename T>
NoisedPair<T> q_sample_pair(const Array<T>& x0, int t, const Array<T>& eps, const NoiseSchedule& schedule) {
  return q_sample_pair(x0, std::span<const int>(&t, 1), eps, schedule);
}

template <typename T>
Array<T> q_sample(const Array<T>& x0, std::span<const int> steps, const Array<T>& eps,
                  const NoiseSchedule& schedule);

// (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t), per sample.
template <typename T>
Array<T> reverse_mean_from_noise(const Array<T>& x_t, const Array<T>& eps_hat, std::span<const int> steps,
                                 const NoiseSchedule& schedule);

template <typename T>
Array<T> reverse_mean(const denoiser::NoisePredictor<T>& model, const Array<T>& x_t,
                      const Array<T>& conditioning, std::span<const int> steps, const NoiseSchedule& schedule);

}  // namespace forcediff::diffusion
