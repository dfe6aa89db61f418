#pragma once

#include <span>
#include <vector>

#include "forcediff/data/trajectory.hpp"

namespace forcediff::data {

// Per-channel Min-Max scaler fitted on the training split. Values outside the
// fitted range extrapolate linearly (no clipping). Constant channels map to 0.
struct Scaler {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t channels() const { return min.size(); }
  void validate() const;

  double scale(std::size_t channel, double v) const;
  double invert(std::size_t channel, double v) const;
  void apply_row(std::span<double> row) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

// Fits on processed-layout trajectories. Throws DataError when empty.
Scaler fit_scaler(std::span<const Trajectory> train);
Trajectory apply_scaler(const Scaler& scaler, const Trajectory& processed);

}  // namespace forcediff::data
