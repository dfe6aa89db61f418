#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace forcediff::data {

enum class ChannelRole { kState, kSensor, kCondition };

std::string_view role_name(ChannelRole role);
ChannelRole parse_role(std::string_view name);

// Four state channels holding one orientation quaternion in (w, x, y, z) order.
struct QuaternionGroup {
  std::string name;
  std::array<std::string, 4> channels;

  friend bool operator==(const QuaternionGroup&, const QuaternionGroup&) = default;
};

// Channel layout after quaternion groups have been replaced by their 6-D
// rotation channels. This is the layout every window and model sees.
struct ChannelLayout {
  std::vector<std::string> names;
  std::vector<ChannelRole> roles;

  std::size_t size() const { return names.size(); }
  std::vector<std::size_t> indices_with_role(ChannelRole role) const;
  std::vector<std::size_t> sensor_indices() const { return indices_with_role(ChannelRole::kSensor); }
  // State and condition channels, in layout order.
  std::vector<std::size_t> conditioning_indices() const;
};

// One processed channel: either a copy of a raw channel or one component of
// a quaternion group's 6-D rotation.
struct ChannelSource {
  bool from_rotation = false;
  std::size_t raw_index = 0;
  std::size_t group = 0;
  std::size_t component = 0;
};

// Roles of the raw columns of a trajectory file.
class ChannelSpec {
 public:
  static constexpr int kFormatVersion = 1;

  ChannelSpec() = default;
  ChannelSpec(std::vector<std::string> names, std::vector<ChannelRole> roles,
              std::vector<QuaternionGroup> groups = {});

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ChannelRole>& roles() const { return roles_; }
  const std::vector<QuaternionGroup>& quaternion_groups() const { return groups_; }
  std::size_t size() const { return names_.size(); }

  // Index of `name`, or size() when absent.
  std::size_t find(std::string_view name) const;

  // Throws DataError naming the offending channel when roles are missing,
  // names repeat, or quaternion groups reference unknown or non-state channels.
  void validate() const;

  // Each quaternion group's six channels take the slot of its first raw
  // channel; the other three raw channels are dropped.
  ChannelLayout processed_layout() const;
  std::vector<ChannelSource> processed_sources() const;

  std::string to_json() const;
  // Parse errors report the 1-based line of the offending text.
  static ChannelSpec from_json(std::string_view text);
  static ChannelSpec load(const std::string& path);
  void save(const std::string& path) const;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<ChannelRole> roles_;
  std::vector<QuaternionGroup> groups_;
};

}  // namespace forcediff::data
