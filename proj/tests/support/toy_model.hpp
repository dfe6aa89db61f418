#pragma once

// Small denoiser fixtures: 2 sensor channels, 2 conditioning channels, L_w = 8.

#include <algorithm>

#include "forcediff/core/rng.hpp"
#include "forcediff/denoiser/unet.hpp"
#include "forcediff/diffusion/process.hpp"
#include "forcediff/diffusion/schedule.hpp"
#include "forcediff/diffusion/train.hpp"
#include "support/gradcheck.hpp"

namespace forcediff::testing {

inline denoiser::UNetConfig toy_unet_config() {
  denoiser::UNetConfig c;
  c.in_channels = 4;
  c.out_channels = 2;
  c.base_width = 4;
  c.depth = 2;
  c.kernel_size = 3;
  c.embed_dim = 4;
  c.window_length = 8;
  return c;
}

// Random parameters everywhere, including the output head, so every
// parameter receives gradient.
template <typename T>
denoiser::DenoiserParams<T> random_toy_params(Rng& rng, double scale = 0.5) {
  auto p = denoiser::init_params<T>(toy_unet_config(), rng);
  for (auto& a : p.arrays) {
    for (auto& v : a.data()) v = static_cast<T>(scale * (2.0 * rng.uniform() - 1.0));
  }
  return p;
}

template <typename T>
diffusion::ModelInput<T> random_toy_batch(std::size_t batch, Rng& rng) {
  diffusion::ModelInput<T> in{Array<T>(Shape{batch, 2, 8}), Array<T>(Shape{batch, 2, 8})};
  for (auto& v : in.sensor.data()) v = static_cast<T>(rng.uniform());
  for (auto& v : in.conditioning.data()) v = static_cast<T>(rng.uniform());
  return in;
}

// Training loss with a fixed noise draw, evaluated without recording gradients.
template <typename T>
double toy_loss(const denoiser::DenoiserParams<T>& params, const diffusion::ModelInput<T>& batch,
                const diffusion::NoiseSchedule& schedule, std::uint64_t noise_seed) {
  Tape<T> tape;
  const auto bound = denoiser::bind_params(tape, params, false);
  Rng rng(noise_seed);
  const Var loss = diffusion::training_loss(tape, diffusion::unet_model(params, bound), batch, schedule, rng);
  return static_cast<double>(tape.value(loss)[0]);
}

struct ParamGradCheck {
  std::string worst_name;
  double worst_error = 0.0;
};

// Analytic gradients of the training loss in precision T against central
// differences of the same loss evaluated in 64-bit.
template <typename T>
ParamGradCheck gradcheck_training_loss(const denoiser::DenoiserParams<T>& params,
                                       const diffusion::ModelInput<T>& batch,
                                       const diffusion::NoiseSchedule& schedule, std::uint64_t noise_seed) {
  Tape<T> tape;
  const auto bound = denoiser::bind_params(tape, params, true);
  Rng rng(noise_seed);
  const Var loss = diffusion::training_loss(tape, diffusion::unet_model(params, bound), batch, schedule, rng);
  tape.backward(loss);

  auto reference = params.template cast<double>();
  const diffusion::ModelInput<double> batch64{batch.sensor.template cast<double>(),
                                              batch.conditioning.template cast<double>()};
  ParamGradCheck out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto numeric = numeric_gradient<double>(
        [&] { return toy_loss(reference, batch64, schedule, noise_seed); }, reference.arrays[i],
        GradCheckPolicy<T>::step);
    const auto report = compare_gradients(tape.grad(bound[i]).template cast<double>(), numeric,
                                          GradCheckPolicy<T>::floor_fraction);
    if (report.max_rel_error >= out.worst_error) {
      out.worst_error = report.max_rel_error;
      out.worst_name = params.names[i];
    }
  }
  return out;
}

}  // namespace forcediff::testing
