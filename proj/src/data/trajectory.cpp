#include "forcediff/data/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include "forcediff/data/rotation.hpp"
#include "forcediff/errors.hpp"
#include "forcediff/io.hpp"

namespace forcediff::data {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

bool Trajectory::any_flagged() const {
  for (auto f : flags) {
    if (f) return true;
  }
  return false;
}

void Trajectory::validate() const {
  if (channels == 0) throw DataError("trajectory '" + id + "' has no channels");
  if (values.size() != time.size() * channels) {
    throw DataError("trajectory '" + id + "': value count does not match steps x channels");
  }
  if (!flags.empty() && flags.size() != time.size()) {
    throw DataError("trajectory '" + id + "': flag count does not match steps");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("trajectory '" + id + "' contains a non-finite value");
  }
}

Trajectory parse_csv(std::string_view text, const ChannelSpec& spec, std::string id) {
  Trajectory traj;
  traj.id = std::move(id);
  traj.channels = spec.size();

  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view header_line;
  if (!next_line(header_line)) throw DataError(traj.id + ": empty trajectory file");
  const auto header = split_fields(header_line);
  if (header.empty() || header[0] != "t") {
    throw DataError(traj.id + ": first column must be 't'");
  }
  constexpr std::size_t kAnomaly = static_cast<std::size_t>(-1);
  constexpr std::size_t kSuccess = static_cast<std::size_t>(-2);
  std::vector<std::size_t> column_target(header.size(), 0);
  std::vector<bool> present(spec.size(), false);
  bool has_anomaly = false, has_success = false;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name(header[c]);
    if (name == "anomaly") {
      if (has_anomaly) throw DataError(traj.id + ": duplicate column 'anomaly'");
      has_anomaly = true;
      column_target[c] = kAnomaly;
      continue;
    }
    if (name == "success") {
      if (has_success) throw DataError(traj.id + ": duplicate column 'success'");
      has_success = true;
      column_target[c] = kSuccess;
      continue;
    }
    const std::size_t idx = spec.find(name);
    if (idx == spec.size()) throw DataError(traj.id + ": unknown channel '" + name + "' in header");
    if (present[idx]) throw DataError(traj.id + ": duplicate channel '" + name + "' in header");
    present[idx] = true;
    column_target[c] = idx;
  }
  std::string missing;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!present[i]) missing += (missing.empty() ? "" : ", ") + spec.names()[i];
  }
  if (!missing.empty()) throw DataError(traj.id + ": header is missing channel(s) " + missing);

  std::string_view line;
  std::vector<double> row(spec.size());
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(traj.id + ": ragged row at line " + std::to_string(line_no) + " (" +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()) + ")");
    }
    double t = 0.0;
    if (!parse_number(fields[0], t)) {
      throw DataError(traj.id + ": non-numeric cell '" + std::string(fields[0]) + "' at line " +
                      std::to_string(line_no) + ", column 't'");
    }
    traj.time.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw DataError(traj.id + ": non-numeric cell '" + std::string(fields[c]) + "' at line " +
                        std::to_string(line_no) + ", column '" + std::string(header[c]) + "'");
      }
      if (column_target[c] == kAnomaly || column_target[c] == kSuccess) {
        if (v != 0.0 && v != 1.0) {
          throw DataError(traj.id + ": column '" + std::string(header[c]) + "' at line " +
                          std::to_string(line_no) + " must be 0 or 1");
        }
        (column_target[c] == kAnomaly ? traj.flags : traj.success).push_back(v != 0.0);
      } else {
        row[column_target[c]] = v;
      }
    }
    traj.values.insert(traj.values.end(), row.begin(), row.end());
  }
  if (traj.time.empty()) throw DataError(traj.id + ": trajectory has no rows");
  traj.sample_period = traj.time.size() > 1 ? traj.time[1] - traj.time[0] : 0.0;
  traj.validate();
  return traj;
}

Trajectory load_csv(const std::string& path, const ChannelSpec& spec) {
  return parse_csv(read_text_file(path), spec, std::filesystem::path(path).stem().string());
}

std::string to_csv(const Trajectory& raw, const ChannelSpec& spec) {
  if (raw.channels != spec.size()) throw DataError("to_csv: trajectory does not match channel spec");
  std::string out = "t";
  for (const auto& n : spec.names()) out += "," + n;
  if (raw.labeled()) out += ",anomaly";
  out += '\n';
  for (std::size_t s = 0; s < raw.steps(); ++s) {
    out += format_double(raw.time[s]);
    for (double v : raw.row(s)) {
      out += ',';
      out += format_double(v);
    }
    if (raw.labeled()) out += raw.flags[s] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const Trajectory& raw, const ChannelSpec& spec) {
  write_text_file(path, to_csv(raw, spec));
}

std::vector<double> convert_row(std::span<const double> raw_row, const ChannelSpec& spec) {
  if (raw_row.size() != spec.size()) throw DimensionError("convert_row: row width does not match spec");
  const auto& groups = spec.quaternion_groups();
  std::vector<std::array<double, 6>> rot(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::array<double, 4> q{};
    for (std::size_t c = 0; c < 4; ++c) q[c] = raw_row[spec.find(groups[g].channels[c])];
    try {
      rot[g] = quat_to_6d(q);
    } catch (const DataError& e) {
      throw DataError("quaternion group '" + groups[g].name + "': " + e.what());
    }
  }
  std::vector<double> out;
  for (const auto& src : spec.processed_sources()) {
    out.push_back(src.from_rotation ? rot[src.group][src.component] : raw_row[src.raw_index]);
  }
  return out;
}

Trajectory convert_rotations(const Trajectory& raw, const ChannelSpec& spec) {
  if (raw.channels != spec.size()) {
    throw DataError("trajectory '" + raw.id + "' does not match the channel spec");
  }
  Trajectory out = raw;
  out.channels = spec.processed_sources().size();
  out.values.clear();
  out.values.reserve(raw.steps() * out.channels);
  for (std::size_t s = 0; s < raw.steps(); ++s) {
    try {
      const auto row = convert_row(raw.row(s), spec);
      out.values.insert(out.values.end(), row.begin(), row.end());
    } catch (const DataError& e) {
      throw DataError("trajectory '" + raw.id + "' step " + std::to_string(s) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forcediff::data
