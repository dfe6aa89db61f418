#include "forcediff/cli/config.hpp"

#include <charconv>
#include <initializer_list>

#include "forcediff/errors.hpp"
#include "forcediff/io.hpp"
#include "json.hpp"

namespace forcediff::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename V>
void read(const json& obj, const char* key, V& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<V>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON (line " +
                      std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ")");
  }
  check_keys(j,
             {"format", "version", "seed", "paths", "diffusion", "unet", "score", "train", "calibration", "synth",
              "data", "eval", "stream"},
             "config");
  if (j.contains("format") && j["format"] != kFormat) throw ConfigError("config format must be 'forcediff-config'");
  if (j.contains("version") && j["version"] != kVersion) {
    throw ConfigError("unsupported config version " + j["version"].dump());
  }

  RunConfig c;
  read(j, "seed", c.seed, "config");
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    check_keys(p, {"data", "spec", "checkpoint", "calibration", "output"}, "paths");
    read(p, "data", c.paths.data, "paths");
    read(p, "spec", c.paths.spec, "paths");
    read(p, "checkpoint", c.paths.checkpoint, "paths");
    read(p, "calibration", c.paths.calibration, "paths");
    read(p, "output", c.paths.output, "paths");
  }
  if (j.contains("diffusion")) {
    const auto& d = j["diffusion"];
    check_keys(d, {"steps", "beta_start", "beta_end"}, "diffusion");
    read(d, "steps", c.diffusion.steps, "diffusion");
    read(d, "beta_start", c.diffusion.beta_start, "diffusion");
    read(d, "beta_end", c.diffusion.beta_end, "diffusion");
  }
  if (j.contains("unet")) {
    const auto& u = j["unet"];
    check_keys(u, {"base_width", "depth", "kernel_size", "embed_dim", "window_length"}, "unet");
    read(u, "base_width", c.unet.base_width, "unet");
    read(u, "depth", c.unet.depth, "unet");
    read(u, "kernel_size", c.unet.kernel_size, "unet");
    read(u, "embed_dim", c.unet.embed_dim, "unet");
    read(u, "window_length", c.unet.window_length, "unet");
  }
  if (j.contains("score")) {
    const auto& s = j["score"];
    check_keys(s, {"mode", "steps", "iterative_start"}, "score");
    std::string mode(scoring::mode_name(c.score.mode));
    read(s, "mode", mode, "score");
    c.score.mode = scoring::parse_mode(mode);
    read(s, "steps", c.score.steps, "score");
    read(s, "iterative_start", c.score.iterative_start, "score");
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, {"batch_size", "epochs", "learning_rate", "cosine_decay", "stride", "max_windows"}, "train");
    read(t, "batch_size", c.train.fit.batch_size, "train");
    read(t, "epochs", c.train.fit.epochs, "train");
    read(t, "learning_rate", c.train.fit.learning_rate, "train");
    read(t, "cosine_decay", c.train.fit.cosine_decay, "train");
    read(t, "stride", c.train.stride, "train");
    read(t, "max_windows", c.train.max_windows, "train");
  }
  if (j.contains("calibration")) {
    const auto& k = j["calibration"];
    check_keys(k, {"mode"}, "calibration");
    std::string mode(eval::threshold_mode_name(c.calibration));
    read(k, "mode", mode, "calibration");
    c.calibration = eval::parse_threshold_mode(mode);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, {"profile", "trajectories", "steps", "anomaly_rate", "burst_amplitude"}, "synth");
    read(s, "profile", c.synth.profile, "synth");
    read(s, "trajectories", c.synth.trajectories, "synth");
    read(s, "steps", c.synth.steps, "synth");
    read(s, "anomaly_rate", c.synth.anomaly_rate, "synth");
    read(s, "burst_amplitude", c.synth.burst_amplitude, "synth");
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"stride", "split", "ratios", "max_calibration_windows"}, "data");
    read(d, "stride", c.data.stride, "data");
    read(d, "split", c.data.split, "data");
    read(d, "max_calibration_windows", c.data.max_calibration_windows, "data");
    if (d.contains("ratios")) {
      const auto& r = d["ratios"];
      check_keys(r, {"train", "calibration", "test"}, "data.ratios");
      read(r, "train", c.data.ratios.train, "data.ratios");
      read(r, "calibration", c.data.ratios.calibration, "data.ratios");
      read(r, "test", c.data.ratios.test, "data.ratios");
    }
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, {"normal_parts", "anomaly_parts", "max_windows", "both_modes"}, "eval");
    read(e, "normal_parts", c.eval.normal_parts, "eval");
    read(e, "anomaly_parts", c.eval.anomaly_parts, "eval");
    read(e, "max_windows", c.eval.max_windows, "eval");
    read(e, "both_modes", c.eval.both_modes, "eval");
  }
  if (j.contains("stream")) {
    const auto& s = j["stream"];
    check_keys(s, {"input", "patience", "halt"}, "stream");
    read(s, "input", c.stream.input, "stream");
    read(s, "patience", c.stream.patience, "stream");
    read(s, "halt", c.stream.halt, "stream");
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) { return from_json(read_text_file(path)); }

std::string RunConfig::to_json() const {
  json j = {
      {"format", kFormat},
      {"version", kVersion},
      {"seed", seed},
      {"paths",
       {{"data", paths.data},
        {"spec", paths.spec},
        {"checkpoint", paths.checkpoint},
        {"calibration", paths.calibration},
        {"output", paths.output}}},
      {"diffusion",
       {{"steps", diffusion.steps}, {"beta_start", diffusion.beta_start}, {"beta_end", diffusion.beta_end}}},
      {"unet",
       {{"base_width", unet.base_width},
        {"depth", unet.depth},
        {"kernel_size", unet.kernel_size},
        {"embed_dim", unet.embed_dim},
        {"window_length", unet.window_length}}},
      {"score",
       {{"mode", scoring::mode_name(score.mode)},
        {"steps", score.steps},
        {"iterative_start", score.iterative_start}}},
      {"train",
       {{"batch_size", train.fit.batch_size},
        {"epochs", train.fit.epochs},
        {"learning_rate", train.fit.learning_rate},
        {"cosine_decay", train.fit.cosine_decay},
        {"stride", train.stride},
        {"max_windows", train.max_windows}}},
      {"calibration", {{"mode", eval::threshold_mode_name(calibration)}}},
      {"synth",
       {{"profile", synth.profile},
        {"trajectories", synth.trajectories},
        {"steps", synth.steps},
        {"anomaly_rate", synth.anomaly_rate},
        {"burst_amplitude", synth.burst_amplitude}}},
      {"data",
       {{"stride", data.stride},
        {"split", data.split},
        {"max_calibration_windows", data.max_calibration_windows},
        {"ratios",
         {{"train", data.ratios.train}, {"calibration", data.ratios.calibration}, {"test", data.ratios.test}}}}},
      {"eval",
       {{"normal_parts", eval.normal_parts},
        {"anomaly_parts", eval.anomaly_parts},
        {"max_windows", eval.max_windows},
        {"both_modes", eval.both_modes}}},
      {"stream", {{"input", stream.input}, {"patience", stream.patience}, {"halt", stream.halt}}},
  };
  return j.dump(2);
}

void RunConfig::validate() const {
  diffusion.validate();
  score.validate(diffusion::build_linear_schedule(diffusion));
  // Channel counts come from the channel spec later; placeholders check the rest.
  denoiser::UNetConfig shape_check = unet;
  shape_check.in_channels = 2;
  shape_check.out_channels = 1;
  shape_check.validate();
  if (train.fit.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(train.fit.learning_rate >= 0.0)) throw ConfigError("train.learning_rate must be >= 0");
  if (train.stride == 0 || data.stride == 0) throw ConfigError("window stride must be positive");
  if (!(synth.anomaly_rate >= 0.0 && synth.anomaly_rate <= 1.0)) {
    throw ConfigError("anomaly rate must lie in [0, 1]");
  }
  if (!(synth.burst_amplitude > 0.0)) throw ConfigError("burst amplitude must be positive");
  if (!data.split.empty() && data.split != "all" && data.split != "train" && data.split != "calibration" &&
      data.split != "test") {
    throw ConfigError("split must be one of all, train, calibration, test");
  }
  data.ratios.validate();
  if ((eval.normal_parts == 0) != (eval.anomaly_parts == 0)) {
    throw ConfigError("eval ratio parts must both be zero or both positive");
  }
  if (stream.patience == 0) throw ConfigError("patience must be at least 1");
}

std::vector<int> spaced_steps(std::size_t k, int total_steps) {
  if (k == 0 || k > static_cast<std::size_t>(total_steps)) {
    throw ConfigError("K must lie in [1, " + std::to_string(total_steps) + "]");
  }
  const int stride = total_steps / static_cast<int>(k);
  std::vector<int> out{1};
  for (std::size_t i = 1; i < k; ++i) out.push_back(static_cast<int>(i) * stride);
  return out;
}

std::vector<int> parse_step_list(std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw ConfigError("step list entry '" + std::string(item) + "' is not an integer");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("step list is empty");
  return out;
}

}  // namespace forcediff::cli
