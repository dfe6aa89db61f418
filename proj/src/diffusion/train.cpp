#include "forcediff/diffusion/train.hpp"

#include <cmath>
#include <numeric>
#include <numbers>

#include "forcediff/core/adam.hpp"
#include "forcediff/errors.hpp"

namespace forcediff::diffusion {

template <typename T>
TapeModel<T> unet_model(const denoiser::DenoiserParams<T>& params, std::span<const Var> bound) {
  return [&params, bound](Tape<T>& tape, Var noisy, Var cond, std::span<const int> steps) {
    return denoiser::forward(tape, params, bound, noisy, cond, steps);
  };
}

template <typename T>
TrainingDraw<T> draw_training_noise(const Array<T>& x0_sensor, const NoiseSchedule& schedule, Rng& rng) {
  if (x0_sensor.rank() != 3) throw DimensionError("training batch must be [B, F, L]");
  TrainingDraw<T> d;
  d.steps.resize(x0_sensor.dim(0));
  for (int& t : d.steps) t = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(schedule.steps())));
  d.eps = standard_normal<T>(x0_sensor.shape(), rng);
  d.noisy = q_sample(x0_sensor, d.steps, d.eps, schedule);
  return d;
}

template <typename T>
Var training_loss(Tape<T>& tape, const TapeModel<T>& model, const ModelInput<T>& clean,
                  const NoiseSchedule& schedule, Rng& rng) {
  TrainingDraw<T> d = draw_training_noise(clean.sensor, schedule, rng);
  const Var pred = model(tape, tape.constant(std::move(d.noisy)), tape.constant(clean.conditioning), d.steps);
  return tape.mse(pred, d.eps);
}

template <typename T>
TrainResult fit(denoiser::DenoiserParams<T>& params, const data::WindowDataset& dataset, const MaskSpec& mask,
                const NoiseSchedule& schedule, const TrainConfig& config, const EpochCallback& on_epoch) {
  if (dataset.empty()) throw DataError("training set is empty");
  if (config.batch_size == 0 || config.epochs == 0) throw ConfigError("batch size and epochs must be positive");
  if (!(config.learning_rate >= 0.0)) throw ConfigError("learning rate must be nonnegative");
  mask.validate();
  if (params.config.out_channels != mask.sensor.size() || params.config.in_channels != mask.channels() ||
      params.config.window_length != dataset.length) {
    throw ConfigError("denoiser config does not match the dataset channels or window length");
  }

  const ModelInput<T> all = gather_windows<T>(dataset.windows, mask);
  const Rng root(config.seed);
  Rng order_rng = root.derive(1);
  Rng noise_rng = root.derive(2);
  AdamState<T> adam;
  AdamConfig adam_config{config.learning_rate};
  const std::size_t per_epoch = (all.batch() + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(per_epoch * config.epochs);
  std::size_t step = 0;

  std::vector<std::size_t> order(all.batch());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(order_rng.uniform_int(i))]);
    }
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const ModelInput<T> batch =
          select_rows(all, std::span<const std::size_t>(order.data() + begin, end - begin));
      Tape<T> tape;
      const auto bound = bind_params(tape, params, true);
      const Var loss = training_loss(tape, unet_model(params, bound), batch, schedule, noise_rng);
      total += static_cast<double>(tape.value(loss)[0]);
      ++batches;
      if (config.learning_rate > 0.0) {
        tape.backward(loss);
        std::vector<Array<T>> grads;
        grads.reserve(bound.size());
        for (Var v : bound) grads.push_back(tape.grad(v));
        if (config.cosine_decay) {
          adam_config.lr = 0.5 * config.learning_rate *
                           (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
        }
        ++step;
        adam_step<T>(params.arrays, grads, adam, adam_config);
      }
    }
    result.epoch_loss.push_back(total / static_cast<double>(batches));
    if (on_epoch) on_epoch(epoch, result.epoch_loss.back());
  }
  return result;
}

#define FORCEDIFF_INSTANTIATE(T)                                                                           \
  template TapeModel<T> unet_model<T>(const denoiser::DenoiserParams<T>&, std::span<const Var>);           \
  template TrainingDraw<T> draw_training_noise<T>(const Array<T>&, const NoiseSchedule&, Rng&);           \
  template Var training_loss<T>(Tape<T>&, const TapeModel<T>&, const ModelInput<T>&, const NoiseSchedule&, \
                                Rng&);                                                                     \
  template TrainResult fit<T>(denoiser::DenoiserParams<T>&, const data::WindowDataset&, const MaskSpec&,   \
                              const NoiseSchedule&, const TrainConfig&, const EpochCallback&);

FORCEDIFF_INSTANTIATE(float)
FORCEDIFF_INSTANTIATE(double)

}  // namespace forcediff::diffusion
