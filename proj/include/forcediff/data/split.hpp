#pragma once

#include <vector>

#include "forcediff/core/rng.hpp"
#include "forcediff/data/trajectory.hpp"

namespace forcediff::data {

struct SplitRatios {
  double train = 0.7;
  double calibration = 0.15;
  double test = 0.15;

  void validate() const;
};

struct TrajectorySplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> calibration;
  std::vector<Trajectory> test;
};

// Unflagged trajectories are shuffled and divided by `ratios` (train and
// calibration counts rounded to nearest, test takes the remainder). Any
// trajectory with a flagged step goes to test only.
TrajectorySplit split_trajectories(std::vector<Trajectory> trajectories, const SplitRatios& ratios,
                                   Rng& rng);

}  // namespace forcediff::data
