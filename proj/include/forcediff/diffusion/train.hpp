#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "forcediff/core/rng.hpp"
#include "forcediff/core/tape.hpp"
#include "forcediff/data/windows.hpp"
#include "forcediff/denoiser/unet.hpp"
#include "forcediff/diffusion/process.hpp"
#include "forcediff/diffusion/schedule.hpp"

namespace forcediff::diffusion {

// Differentiable noise model: (tape, noisy sensor, clean conditioning, steps) -> predicted noise.
template <typename T>
using TapeModel = std::function<Var(Tape<T>&, Var, Var, std::span<const int>)>;

template <typename T>
TapeModel<T> unet_model(const denoiser::DenoiserParams<T>& params, std::span<const Var> bound);

// Steps uniform on [1, T] and standard normal noise on the sensor block only.
template <typename T>
struct TrainingDraw {
  std::vector<int> steps;
  Array<T> eps;
  Array<T> noisy;
};

template <typename T>
TrainingDraw<T> draw_training_noise(const Array<T>& x0_sensor, const NoiseSchedule& schedule, Rng& rng);

// Mean squared error between the drawn noise and the model's prediction,
// averaged over batch, sensor channels and time.
template <typename T>
Var training_loss(Tape<T>& tape, const TapeModel<T>& model, const ModelInput<T>& clean,
                  const NoiseSchedule& schedule, Rng& rng);

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  // Anneals the rate from learning_rate to zero along a half cosine over all steps.
  bool cosine_decay = false;
  std::uint64_t seed = 0;
};

struct TrainResult {
  // Mean minibatch loss per epoch.
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Minibatch Adam over shuffled windows. A zero learning rate leaves the
// parameters untouched. Deterministic for a given seed.
template <typename T>
TrainResult fit(denoiser::DenoiserParams<T>& params, const data::WindowDataset& dataset, const MaskSpec& mask,
                const NoiseSchedule& schedule, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace forcediff::diffusion
