#include "forcediff/data/scaler.hpp"

#include <algorithm>
#include <cmath>

#include "forcediff/errors.hpp"

namespace forcediff::data {

void Scaler::validate() const {
  if (min.size() != max.size() || min.empty()) throw DataError("scaler: malformed channel statistics");
  for (std::size_t c = 0; c < min.size(); ++c) {
    if (!(std::isfinite(min[c]) && std::isfinite(max[c]) && max[c] >= min[c])) {
      throw DataError("scaler: channel " + std::to_string(c) + " has max < min");
    }
  }
}

double Scaler::scale(std::size_t c, double v) const {
  const double range = max[c] - min[c];
  if (range == 0.0) return 0.0;
  return (v - min[c]) / range;
}

double Scaler::invert(std::size_t c, double v) const { return v * (max[c] - min[c]) + min[c]; }

void Scaler::apply_row(std::span<double> row) const {
  if (row.size() != channels()) throw DimensionError("scaler: row width does not match fitted channels");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = scale(c, row[c]);
}

Scaler fit_scaler(std::span<const Trajectory> train) {
  if (train.empty() || train.front().steps() == 0) {
    throw DataError("cannot fit a scaler on an empty training set");
  }
  const std::size_t n = train.front().channels;
  Scaler s;
  s.min.assign(n, INFINITY);
  s.max.assign(n, -INFINITY);
  for (const auto& traj : train) {
    if (traj.channels != n) throw DataError("fit_scaler: trajectories disagree on channel count");
    for (std::size_t step = 0; step < traj.steps(); ++step) {
      for (std::size_t c = 0; c < n; ++c) {
        const double v = traj.at(step, c);
        s.min[c] = std::min(s.min[c], v);
        s.max[c] = std::max(s.max[c], v);
      }
    }
  }
  s.validate();
  return s;
}

Trajectory apply_scaler(const Scaler& scaler, const Trajectory& processed) {
  if (processed.channels != scaler.channels()) {
    throw DataError("trajectory '" + processed.id + "' has " + std::to_string(processed.channels) +
                    " channels, scaler was fitted on " + std::to_string(scaler.channels()));
  }
  Trajectory out = processed;
  for (std::size_t step = 0; step < out.steps(); ++step) {
    scaler.apply_row({out.values.data() + step * out.channels, out.channels});
  }
  return out;
}

}  // namespace forcediff::data
