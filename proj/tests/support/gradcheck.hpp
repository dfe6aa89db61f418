#pragma once

// Central finite-difference oracle for gradients. Test-only: it drives the
// forward computation through a caller-supplied loss function and never looks
// at the tape's backward pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "forcediff/core/array.hpp"

namespace forcediff::testing {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Perturbs each element of `x` in turn by +-h and differentiates `loss`
// numerically. The effective step is the representable difference, which
// matters in 32-bit mode.
template <typename T>
Array<T> numeric_gradient(const std::function<double()>& loss, Array<T>& x, double h) {
  Array<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T orig = x[i];
    const T up = static_cast<T>(orig + h);
    const T down = static_cast<T>(orig - h);
    x[i] = up;
    const double f_up = loss();
    x[i] = down;
    const double f_down = loss();
    x[i] = orig;
    g[i] = static_cast<T>((f_up - f_down) / (static_cast<double>(up) - static_cast<double>(down)));
  }
  return g;
}

// Elementwise relative error |a - n| / max(|a|, |n|, floor), where the floor
// is `floor_fraction` of the largest gradient magnitude in the array. The
// floor keeps near-zero entries from dominating through cancellation noise.
template <typename T>
GradCheckReport compare_gradients(const Array<T>& analytic, const Array<T>& numeric,
                                  double floor_fraction) {
  GradCheckReport r;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(static_cast<double>(analytic[i])),
                      std::abs(static_cast<double>(numeric[i]))});
  }
  const double floor = std::max(floor_fraction * scale, 1e-30);
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i];
    const double n = numeric[i];
    const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_index = i;
      r.worst_analytic = a;
      r.worst_numeric = n;
    }
  }
  return r;
}

// Tolerances and steps used across the suites.
template <typename T>
struct GradCheckPolicy;
template <>
struct GradCheckPolicy<float> {
  static constexpr double step = 1e-3;
  static constexpr double tolerance = 1e-3;
  static constexpr double floor_fraction = 1e-2;
};
template <>
struct GradCheckPolicy<double> {
  // Roundoff, not truncation, dominates below this step for the denoiser loss.
  static constexpr double step = 1e-4;
  static constexpr double tolerance = 1e-6;
  static constexpr double floor_fraction = 1e-2;
};

}  // namespace forcediff::testing
