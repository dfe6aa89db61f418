#include "forcediff/data/windows.hpp"

#include <algorithm>
#include <numeric>

#include "forcediff/errors.hpp"

namespace forcediff::data {
namespace {

// First `count` entries of a Fisher-Yates shuffle of `indices`, sorted.
std::vector<std::size_t> pick(std::vector<std::size_t> indices, std::size_t count, Rng& rng) {
  count = std::min(count, indices.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  std::sort(indices.begin(), indices.end());
  return indices;
}

WindowDataset select(const WindowDataset& data, const std::vector<std::size_t>& keep) {
  WindowDataset out;
  out.length = data.length;
  out.channels = data.channels;
  out.windows.reserve(keep.size());
  for (std::size_t i : keep) out.windows.push_back(data.windows[i]);
  return out;
}

}  // namespace

bool WindowDataset::fully_labeled() const {
  return std::all_of(windows.begin(), windows.end(), [](const Window& w) { return w.label.has_value(); });
}

std::size_t WindowDataset::count_label(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count_if(windows.begin(), windows.end(), [&](const Window& w) {
    return w.label.has_value() && *w.label == label;
  }));
}

void WindowDataset::append(const WindowDataset& other) {
  if (other.empty()) return;
  if (empty() && length == 0) {
    length = other.length;
    channels = other.channels;
  }
  if (other.length != length || other.channels != channels) {
    throw DataError("cannot merge window sets of different shapes");
  }
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
}

WindowDataset slide_windows(const Trajectory& traj, std::size_t length, std::size_t stride) {
  if (length == 0 || stride == 0) throw ConfigError("window length and stride must be positive");
  if (length > traj.steps()) {
    throw DataError("trajectory '" + traj.id + "' has " + std::to_string(traj.steps()) +
                    " steps, shorter than window length " + std::to_string(length));
  }
  WindowDataset out;
  out.length = length;
  out.channels = traj.channels;
  for (std::size_t start = 0; start + length <= traj.steps(); start += stride) {
    Window w;
    w.trajectory_id = traj.id;
    w.start = start;
    std::vector<float> vals(length * traj.channels);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] = static_cast<float>(traj.values[start * traj.channels + i]);
    }
    w.values = Array<float>(Shape{length, traj.channels}, std::move(vals));
    if (traj.labeled()) {
      const auto first = traj.flags.begin() + static_cast<std::ptrdiff_t>(start);
      w.label = std::any_of(first, first + static_cast<std::ptrdiff_t>(length),
                            [](std::uint8_t f) { return f != 0; })
                    ? 1
                    : 0;
    }
    out.windows.push_back(std::move(w));
  }
  return out;
}

WindowDataset subsample(const WindowDataset& data, std::size_t max_windows, Rng& rng) {
  if (max_windows == 0 || data.size() <= max_windows) return data;
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return select(data, pick(std::move(all), max_windows, rng));
}

WindowDataset balance_labels(const WindowDataset& data, std::size_t normal_parts,
                             std::size_t anomaly_parts, std::size_t max_windows, Rng& rng) {
  if (normal_parts == 0 || anomaly_parts == 0) throw ConfigError("label ratio parts must be positive");
  if (!data.fully_labeled()) throw DataError("balancing requires labeled windows");
  std::vector<std::size_t> normal, anomalous;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (*data.windows[i].label ? anomalous : normal).push_back(i);
  }
  std::size_t k = std::min(normal.size() / normal_parts, anomalous.size() / anomaly_parts);
  if (max_windows) k = std::min(k, max_windows / (normal_parts + anomaly_parts));
  if (k == 0) {
    throw DataError("not enough windows to build a " + std::to_string(normal_parts) + ":" +
                    std::to_string(anomaly_parts) + " normal:anomaly set (" +
                    std::to_string(normal.size()) + " normal, " + std::to_string(anomalous.size()) +
                    " anomalous)");
  }
  auto keep = pick(std::move(normal), k * normal_parts, rng);
  const auto keep_anomalous = pick(std::move(anomalous), k * anomaly_parts, rng);
  keep.insert(keep.end(), keep_anomalous.begin(), keep_anomalous.end());
  std::sort(keep.begin(), keep.end());
  return select(data, keep);
}

}  // namespace forcediff::data
