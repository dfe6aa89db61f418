#pragma once

#include <span>

#include "forcediff/core/array.hpp"
#include "forcediff/denoiser/unet.hpp"

namespace forcediff::denoiser {

// The noise model as seen by sampling and scoring: noisy sensor channels
// [B, F, L] and clean conditioning [B, C, L] in, predicted noise [B, F, L] out.
template <typename T>
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Array<T> predict_noise(const Array<T>& noisy, const Array<T>& conditioning,
                                 std::span<const int> steps) const = 0;
};

template <typename T>
class UNetPredictor final : public NoisePredictor<T> {
 public:
  explicit UNetPredictor(const DenoiserParams<T>& params) : params_(params) {}
  Array<T> predict_noise(const Array<T>& noisy, const Array<T>& conditioning,
                         std::span<const int> steps) const override {
    return predict(params_, noisy, conditioning, steps);
  }

 private:
  const DenoiserParams<T>& params_;
};

}  // namespace forcediff::denoiser
