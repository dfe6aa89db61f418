#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forcediff/data/channel_spec.hpp"

namespace forcediff::data {

// A multivariate time series, T steps by N channels, row-major. Used both in
// the raw file layout and in the processed layout (after rotation conversion
// and scaling); the channel order is whatever layout produced it.
struct Trajectory {
  std::string id;
  double sample_period = 0.0;
  std::size_t channels = 0;
  std::vector<double> time;
  std::vector<double> values;
  // Per-step anomaly flags; empty when the source carried none.
  std::vector<std::uint8_t> flags;
  // Per-step task-success labels, kept when present in the file. Not used for detection.
  std::vector<std::uint8_t> success;

  std::size_t steps() const { return time.size(); }
  bool labeled() const { return !flags.empty(); }
  bool any_flagged() const;
  std::span<const double> row(std::size_t step) const {
    return {values.data() + step * channels, channels};
  }
  double at(std::size_t step, std::size_t channel) const { return values[step * channels + channel]; }

  // Throws DataError on shape inconsistency or non-finite values.
  void validate() const;
};

// Reads a trajectory CSV: header `t,<channels...>[,anomaly]` with channel
// columns named per `spec` (any order). Values are stored in spec order.
// An optional `success` column is accepted and kept.
Trajectory load_csv(const std::string& path, const ChannelSpec& spec);
Trajectory parse_csv(std::string_view text, const ChannelSpec& spec, std::string id);
std::string to_csv(const Trajectory& raw, const ChannelSpec& spec);
void write_csv(const std::string& path, const Trajectory& raw, const ChannelSpec& spec);

// Raw layout -> processed layout: quaternion groups become 6-D rotation channels.
Trajectory convert_rotations(const Trajectory& raw, const ChannelSpec& spec);

// Converts one raw row (spec order) to the processed layout.
std::vector<double> convert_row(std::span<const double> raw_row, const ChannelSpec& spec);

}  // namespace forcediff::data
