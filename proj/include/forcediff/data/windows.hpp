#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forcediff/core/array.hpp"
#include "forcediff/core/rng.hpp"
#include "forcediff/data/trajectory.hpp"

namespace forcediff::data {

// Fixed-length slice of a processed trajectory, stored time-major [L_w, N].
struct Window {
  Array<float> values;
  std::string trajectory_id;
  std::size_t start = 0;
  // 1 when any covered step is flagged; empty for unlabeled sources.
  std::optional<std::uint8_t> label;
};

struct WindowDataset {
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<Window> windows;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  bool fully_labeled() const;
  std::size_t count_label(std::uint8_t label) const;
  void append(const WindowDataset& other);
};

// Windows start at 0, stride, 2*stride, ... up to steps - length inclusive.
WindowDataset slide_windows(const Trajectory& traj, std::size_t length, std::size_t stride);

// Uniform subsample without replacement, original order kept.
WindowDataset subsample(const WindowDataset& data, std::size_t max_windows, Rng& rng);

// Subsample to a normal:anomalous ratio of normal_parts:anomaly_parts, using
// as many windows as the scarcer class allows (at most max_windows total when
// nonzero). Requires every window to be labeled.
WindowDataset balance_labels(const WindowDataset& data, std::size_t normal_parts,
                             std::size_t anomaly_parts, std::size_t max_windows, Rng& rng);

}  // namespace forcediff::data
