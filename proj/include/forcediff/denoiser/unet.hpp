#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forcediff/core/array.hpp"
#include "forcediff/core/rng.hpp"
#include "forcediff/core/tape.hpp"

namespace forcediff::denoiser {

struct UNetConfig {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t base_width = 32;
  std::size_t depth = 2;
  std::size_t kernel_size = 3;
  std::size_t embed_dim = 64;
  std::size_t window_length = 32;

  // Kernel odd, embed_dim even, window_length divisible by 2^depth,
  // 0 < out_channels <= in_channels.
  void validate() const;
  std::size_t width(std::size_t level) const { return base_width << level; }
  std::size_t conditioning_channels() const { return in_channels - out_channels; }

  friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

// Named parameter arrays in a fixed order determined by the config.
template <typename T>
struct DenoiserParams {
  UNetConfig config;
  std::vector<std::string> names;
  std::vector<Array<T>> arrays;

  std::size_t size() const { return arrays.size(); }
  std::size_t count() const;
  // Index of `name`; throws ConfigError when absent.
  std::size_t index(const std::string& name) const;
  const Array<T>& operator[](const std::string& name) const { return arrays[index(name)]; }
  Array<T>& operator[](const std::string& name) { return arrays[index(name)]; }

  template <typename U>
  DenoiserParams<U> cast() const {
    DenoiserParams<U> out{config, names, {}};
    for (const auto& a : arrays) out.arrays.push_back(a.template cast<U>());
    return out;
  }
};

// Parameter names and shapes implied by a config, in storage order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const UNetConfig& config);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
// convolution is zero.
template <typename T>
DenoiserParams<T> init_params(const UNetConfig& config, Rng& rng);

// Interleaved [sin(t w_0), cos(t w_0), sin(t w_1), ...] with w_i = 10000^(-2i/dim).
template <typename T>
Array<T> sinusoidal_embed(double t, std::size_t dim);

struct ForwardOptions {
  // Replace the skip tensor of this encoder level with zeros (structural tests).
  std::optional<std::size_t> drop_skip;
};

// Tape handles for every parameter, in DenoiserParams order.
template <typename T>
std::vector<Var> bind_params(Tape<T>& tape, const DenoiserParams<T>& params, bool requires_grad);

// Predicted noise [B, F, L] from noisy sensor channels [B, F, L] and clean
// conditioning [B, C, L] (C may be zero) at per-sample diffusion steps.
template <typename T>
Var forward(Tape<T>& tape, const DenoiserParams<T>& params, std::span<const Var> bound, Var noisy,
            Var conditioning, std::span<const int> steps, const ForwardOptions& options = {});

// Inference without gradients.
template <typename T>
Array<T> predict(const DenoiserParams<T>& params, const Array<T>& noisy, const Array<T>& conditioning,
                 std::span<const int> steps, const ForwardOptions& options = {});

}  // namespace forcediff::denoiser
