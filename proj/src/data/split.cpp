#include "forcediff/data/split.hpp"

#include <cmath>

#include "forcediff/errors.hpp"

namespace forcediff::data {

void SplitRatios::validate() const {
  if (train < 0 || calibration < 0 || test < 0 || std::abs(train + calibration + test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
}

TrajectorySplit split_trajectories(std::vector<Trajectory> trajectories, const SplitRatios& ratios,
                                   Rng& rng) {
  ratios.validate();
  TrajectorySplit out;
  std::vector<Trajectory> normal;
  for (auto& t : trajectories) {
    (t.any_flagged() ? out.test : normal).push_back(std::move(t));
  }
  for (std::size_t i = normal.size(); i > 1; --i) {
    std::swap(normal[i - 1], normal[static_cast<std::size_t>(rng.uniform_int(i))]);
  }
  const auto n = static_cast<double>(normal.size());
  const std::size_t n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
  const std::size_t n_cal =
      std::min(normal.size() - n_train, static_cast<std::size_t>(std::llround(ratios.calibration * n)));
  for (std::size_t i = 0; i < normal.size(); ++i) {
    auto& dst = i < n_train ? out.train : (i < n_train + n_cal ? out.calibration : out.test);
    dst.push_back(std::move(normal[i]));
  }
  return out;
}

}  // namespace forcediff::data
