#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "forcediff/core/array.hpp"

namespace forcediff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<Array<T>> first_moment;
  std::vector<Array<T>> second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam update applied in place, in parameter order.
// Moment buffers are created on the first call.
template <typename T>
void adam_step(std::span<Array<T>> params, std::span<const Array<T>> grads, AdamState<T>& state,
               const AdamConfig& config);

}  // namespace forcediff
