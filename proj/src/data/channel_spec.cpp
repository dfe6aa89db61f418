#include "forcediff/data/channel_spec.hpp"

#include <set>

#include "forcediff/errors.hpp"
#include "forcediff/io.hpp"
#include "json.hpp"

namespace forcediff::data {

using nlohmann::json;

namespace {
constexpr std::string_view kFormatName = "forcediff-channels";
}

std::string_view role_name(ChannelRole role) {
  switch (role) {
    case ChannelRole::kState: return "state";
    case ChannelRole::kSensor: return "sensor";
    case ChannelRole::kCondition: return "condition";
  }
  return "unknown";
}

ChannelRole parse_role(std::string_view name) {
  if (name == "state") return ChannelRole::kState;
  if (name == "sensor") return ChannelRole::kSensor;
  if (name == "condition") return ChannelRole::kCondition;
  throw DataError("unknown channel role '" + std::string(name) + "'");
}

std::vector<std::size_t> ChannelLayout::indices_with_role(ChannelRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == role) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ChannelLayout::conditioning_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] != ChannelRole::kSensor) out.push_back(i);
  }
  return out;
}

ChannelSpec::ChannelSpec(std::vector<std::string> names, std::vector<ChannelRole> roles,
                         std::vector<QuaternionGroup> groups)
    : names_(std::move(names)), roles_(std::move(roles)), groups_(std::move(groups)) {
  validate();
}

std::size_t ChannelSpec::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return names_.size();
}

void ChannelSpec::validate() const {
  if (names_.empty()) throw DataError("channel spec lists no channels");
  if (names_.size() != roles_.size()) throw DataError("channel spec: every channel needs a role");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw DataError("channel spec: empty channel name");
    if (n == "t" || n == "anomaly" || n == "success") {
      throw DataError("channel spec: channel name '" + n + "' is reserved for trajectory files");
    }
    if (!seen.insert(n).second) throw DataError("channel spec: duplicate channel '" + n + "'");
  }
  bool any_sensor = false;
  for (auto r : roles_) any_sensor |= (r == ChannelRole::kSensor);
  if (!any_sensor) throw DataError("channel spec: at least one sensor channel is required");

  std::set<std::string> grouped;
  std::set<std::string> group_names;
  for (const auto& g : groups_) {
    if (!group_names.insert(g.name).second) {
      throw DataError("channel spec: duplicate quaternion group '" + g.name + "'");
    }
    for (const auto& c : g.channels) {
      const std::size_t idx = find(c);
      if (idx == names_.size()) {
        throw DataError("channel spec: quaternion group '" + g.name + "' references unknown channel '" +
                        c + "'");
      }
      if (roles_[idx] != ChannelRole::kState) {
        throw DataError("channel spec: quaternion channel '" + c + "' must have role state");
      }
      if (!grouped.insert(c).second) {
        throw DataError("channel spec: channel '" + c + "' appears in more than one quaternion slot");
      }
    }
  }
}

std::vector<ChannelSource> ChannelSpec::processed_sources() const {
  // Owning group (and component) for each raw channel that belongs to one.
  std::vector<int> group_of(names_.size(), -1);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const auto& c : groups_[g].channels) group_of[find(c)] = static_cast<int>(g);
  }
  std::vector<bool> emitted(groups_.size(), false);
  std::vector<ChannelSource> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (group_of[i] < 0) {
      out.push_back(ChannelSource{false, i, 0, 0});
      continue;
    }
    const auto g = static_cast<std::size_t>(group_of[i]);
    if (emitted[g]) continue;
    emitted[g] = true;
    for (std::size_t c = 0; c < 6; ++c) out.push_back(ChannelSource{true, 0, g, c});
  }
  return out;
}

ChannelLayout ChannelSpec::processed_layout() const {
  ChannelLayout layout;
  for (const auto& src : processed_sources()) {
    if (src.from_rotation) {
      layout.names.push_back(groups_[src.group].name + "_r6d_" + std::to_string(src.component));
      layout.roles.push_back(ChannelRole::kState);
    } else {
      layout.names.push_back(names_[src.raw_index]);
      layout.roles.push_back(roles_[src.raw_index]);
    }
  }
  return layout;
}

std::string ChannelSpec::to_json() const {
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["channels"] = json::array();
  for (std::size_t i = 0; i < names_.size(); ++i) {
    j["channels"].push_back({{"name", names_[i]}, {"role", role_name(roles_[i])}});
  }
  j["quaternion_groups"] = json::array();
  for (const auto& g : groups_) {
    j["quaternion_groups"].push_back({{"name", g.name}, {"channels", g.channels}});
  }
  return j.dump(2) + "\n";
}

ChannelSpec ChannelSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("channel spec parse error at line " + std::to_string(line_of_offset(text, e.byte)) +
                    ": " + e.what());
  }
  try {
    if (j.value("format", std::string()) != kFormatName) {
      throw DataError("channel spec: missing or wrong \"format\" field (expected \"" +
                      std::string(kFormatName) + "\")");
    }
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) {
      throw DataError("channel spec: unsupported version " + std::to_string(version));
    }
    std::vector<std::string> names;
    std::vector<ChannelRole> roles;
    for (const auto& c : j.at("channels")) {
      names.push_back(c.at("name").get<std::string>());
      roles.push_back(parse_role(c.at("role").get<std::string>()));
    }
    std::vector<QuaternionGroup> groups;
    if (j.contains("quaternion_groups")) {
      for (const auto& g : j.at("quaternion_groups")) {
        const auto chans = g.at("channels").get<std::vector<std::string>>();
        if (chans.size() != 4) {
          throw DataError("channel spec: quaternion group needs exactly 4 channels (w, x, y, z)");
        }
        groups.push_back(QuaternionGroup{g.at("name").get<std::string>(),
                                         {chans[0], chans[1], chans[2], chans[3]}});
      }
    }
    return ChannelSpec(std::move(names), std::move(roles), std::move(groups));
  } catch (const json::exception& e) {
    throw DataError(std::string("channel spec: ") + e.what());
  }
}

ChannelSpec ChannelSpec::load(const std::string& path) {
  try {
    return from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void ChannelSpec::save(const std::string& path) const { write_text_file(path, to_json()); }

}  // namespace forcediff::data
