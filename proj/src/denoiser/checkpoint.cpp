#include "forcediff/denoiser/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "forcediff/errors.hpp"
#include "forcediff/io.hpp"
#include "json.hpp"

namespace forcediff::denoiser {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "forcediff-checkpoint";

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

json unet_json(const UNetConfig& c) {
  return {{"in_channels", c.in_channels},   {"out_channels", c.out_channels}, {"base_width", c.base_width},
          {"depth", c.depth},               {"kernel_size", c.kernel_size},   {"embed_dim", c.embed_dim},
          {"window_length", c.window_length}};
}

UNetConfig unet_from(const json& j) {
  UNetConfig c;
  c.in_channels = j.at("in_channels").get<std::size_t>();
  c.out_channels = j.at("out_channels").get<std::size_t>();
  c.base_width = j.at("base_width").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.window_length = j.at("window_length").get<std::size_t>();
  c.validate();
  return c;
}

// Splits off the next newline-terminated line.
std::string_view take_line(std::string_view& rest, const char* what) {
  const auto nl = rest.find('\n');
  if (nl == std::string_view::npos) throw DataError(std::string("checkpoint truncated in ") + what);
  const std::string_view line = rest.substr(0, nl);
  rest.remove_prefix(nl + 1);
  return line;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const auto schedule = diffusion::build_linear_schedule(ck.diffusion);
  json header = {
      {"version", kCheckpointVersion},
      {"unet", unet_json(ck.params.config)},
      {"channels", json::parse(ck.channels.to_json())},
      {"diffusion",
       {{"steps", ck.diffusion.steps},
        {"beta_start", ck.diffusion.beta_start},
        {"beta_end", ck.diffusion.beta_end},
        {"betas", schedule.betas()},
        {"sensor", ck.diffusion.mask.sensor},
        {"conditioning", ck.diffusion.mask.conditioning}}},
      {"scaler", {{"min", ck.scaler.min}, {"max", ck.scaler.max}}},
      {"seed", ck.seed},
      {"parameters", ck.params.size()},
  };
  std::string out(kMagic);
  out += '\n';
  out += header.dump();
  out += '\n';
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const Array<float>& a = ck.params.arrays[i];
    out += ck.params.names[i] + ' ' + std::to_string(a.rank());
    for (std::size_t d : a.shape()) out += ' ' + std::to_string(d);
    out += '\n';
    for (float v : a.data()) {
      const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(v));
      char raw[4];
      std::memcpy(raw, &bits, 4);
      out.append(raw, 4);
    }
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  std::string_view rest = bytes;
  if (take_line(rest, "magic line") != kMagic) throw DataError("not a forcediff checkpoint");
  json header;
  try {
    header = json::parse(take_line(rest, "metadata"));
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }

  Checkpoint ck;
  try {
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint format version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
    }
    ck.params.config = unet_from(header.at("unet"));
    ck.channels = data::ChannelSpec::from_json(header.at("channels").dump());
    const json& d = header.at("diffusion");
    ck.diffusion.steps = d.at("steps").get<int>();
    ck.diffusion.beta_start = d.at("beta_start").get<double>();
    ck.diffusion.beta_end = d.at("beta_end").get<double>();
    ck.diffusion.mask.sensor = d.at("sensor").get<std::vector<std::size_t>>();
    ck.diffusion.mask.conditioning = d.at("conditioning").get<std::vector<std::size_t>>();
    ck.scaler.min = header.at("scaler").at("min").get<std::vector<double>>();
    ck.scaler.max = header.at("scaler").at("max").get<std::vector<double>>();
    ck.seed = header.at("seed").get<std::uint64_t>();

    const auto betas = d.at("betas").get<std::vector<double>>();
    const auto rebuilt = diffusion::build_linear_schedule(ck.diffusion).betas();
    if (betas.size() != rebuilt.size()) throw DataError("checkpoint beta table has the wrong length");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      if (std::abs(betas[i] - rebuilt[i]) > 1e-12 * rebuilt[i]) {
        throw DataError("checkpoint beta table is not the declared linear schedule");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }

  const auto layout = ck.channels.processed_layout();
  if (diffusion::MaskSpec::from_layout(layout) != ck.diffusion.mask) {
    throw DataError("checkpoint mask does not match its channel spec");
  }
  ck.scaler.validate();
  if (ck.scaler.channels() != layout.size()) throw DataError("checkpoint scaler width does not match channels");
  if (ck.params.config.in_channels != layout.size() ||
      ck.params.config.out_channels != ck.diffusion.mask.sensor.size()) {
    throw DataError("checkpoint denoiser channel counts do not match its channel spec");
  }

  for (const auto& [name, shape] : parameter_layout(ck.params.config)) {
    std::istringstream line{std::string(take_line(rest, "parameter header"))};
    std::string got_name;
    std::size_t rank = 0;
    line >> got_name >> rank;
    Shape got_shape(rank);
    for (auto& d : got_shape) line >> d;
    if (!line || got_name != name || got_shape != shape) {
      throw DataError("checkpoint parameter '" + got_name + "' " + shape_string(got_shape) + " does not match expected '" +
                      name + "' " + shape_string(shape));
    }
    const std::size_t n = shape_size(shape);
    if (rest.size() < 4 * n) throw DataError("checkpoint truncated in parameter '" + name + "'");
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, rest.data() + 4 * i, 4);
      values[i] = std::bit_cast<float>(to_little(bits));
    }
    rest.remove_prefix(4 * n);
    Array<float> a(shape, std::move(values));
    if (!a.all_finite()) throw DataError("checkpoint parameter '" + name + "' holds non-finite values");
    ck.params.names.push_back(name);
    ck.params.arrays.push_back(std::move(a));
  }
  if (!rest.empty()) throw DataError("checkpoint has trailing bytes after the last parameter");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  write_text_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace forcediff::denoiser
