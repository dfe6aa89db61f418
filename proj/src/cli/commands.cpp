#include "forcediff/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <optional>

#include "forcediff/data/split.hpp"
#include "forcediff/data/synth.hpp"
#include "forcediff/denoiser/predictor.hpp"
#include "forcediff/diffusion/train.hpp"
#include "forcediff/errors.hpp"
#include "forcediff/io.hpp"
#include "json.hpp"

namespace forcediff::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Independent generator streams under the config seed.
enum Stream : std::uint64_t {
  kSplitStream = 10,
  kTrainSubsampleStream = 11,
  kBalanceStream = 12,
  kCalibrationSubsampleStream = 13,
  kInitStream = 14,
};

Rng stream_rng(const RunConfig& config, Stream s) { return Rng(config.seed).derive(s); }

const std::string& require_path(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " path given");
  return path;
}

std::string split_or(const RunConfig& config, const char* fallback) {
  return config.data.split.empty() ? fallback : config.data.split;
}

void refuse_flagged(std::span<const data::Trajectory> trajectories, const char* what) {
  for (const auto& t : trajectories) {
    if (t.any_flagged()) {
      throw DataError(std::string(what) + " data must be normal-only, but trajectory '" + t.id +
                      "' has flagged steps");
    }
  }
}

void write_output(const std::string& path, std::string_view text) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  write_text_file(path, text);
}

// A loaded checkpoint, its schedule and the raw data read with its spec.
struct ScoringSetup {
  denoiser::Checkpoint checkpoint;
  diffusion::NoiseSchedule schedule;
  RawData raw;
};

ScoringSetup scoring_setup(const RunConfig& config) {
  ScoringSetup s{load_model(config), {}, {}};
  s.schedule = diffusion::build_linear_schedule(s.checkpoint.diffusion);
  s.raw = load_raw_data(config, &s.checkpoint.channels);
  return s;
}

data::WindowDataset windows_of(const ScoringSetup& s, std::span<const data::Trajectory> trajectories,
                               const RunConfig& config) {
  return prepare_windows(trajectories, s.checkpoint.channels, s.checkpoint.scaler,
                         s.checkpoint.params.config.window_length, config.data.stride);
}

std::vector<double> score_values(const ScoringSetup& s, const data::WindowDataset& windows,
                                 const scoring::ScoreConfig& score, std::uint64_t seed) {
  const denoiser::UNetPredictor<float> model(s.checkpoint.params);
  std::vector<double> out;
  for (const auto& r : scoring::score_dataset(model, windows, s.checkpoint.diffusion.mask, s.schedule, score, seed)) {
    out.push_back(r.score);
  }
  return out;
}

// Explicit calibration refuses flagged data; on-the-fly calibration inside
// eval keeps only the clean trajectories of the split.
data::WindowDataset calibration_windows(const ScoringSetup& s, const RunConfig& config, bool drop_flagged = false) {
  auto trajectories = select_split(s.raw.trajectories, split_or(config, "calibration"), config);
  if (drop_flagged) {
    std::erase_if(trajectories, [](const data::Trajectory& t) { return t.any_flagged(); });
  } else {
    refuse_flagged(trajectories, "calibration");
  }
  auto windows = windows_of(s, trajectories, config);
  if (windows.empty()) throw DataError("no calibration windows");
  if (config.data.max_calibration_windows > 0 && windows.size() > config.data.max_calibration_windows) {
    Rng rng = stream_rng(config, kCalibrationSubsampleStream);
    windows = data::subsample(windows, config.data.max_calibration_windows, rng);
  }
  return windows;
}

}  // namespace

RawData load_raw_data(const RunConfig& config, const data::ChannelSpec* spec) {
  const fs::path data_path(require_path(config.paths.data, "data"));
  std::error_code ec;
  if (!fs::exists(data_path, ec)) throw IoError("data path '" + data_path.string() + "' does not exist");

  std::vector<std::string> files;
  fs::path base;
  if (fs::is_directory(data_path)) {
    base = data_path;
    for (const auto& entry : fs::directory_iterator(data_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .csv files in '" + data_path.string() + "'");
  } else {
    base = data_path.parent_path();
    files.push_back(data_path.string());
  }

  RawData out;
  if (spec != nullptr) {
    out.spec = *spec;
  } else {
    const std::string spec_path = config.paths.spec.empty() ? (base / "spec.json").string() : config.paths.spec;
    out.spec = data::ChannelSpec::load(spec_path);
  }
  for (const auto& f : files) out.trajectories.push_back(data::load_csv(f, out.spec));
  return out;
}

std::vector<data::Trajectory> select_split(std::vector<data::Trajectory> trajectories, std::string_view name,
                                           const RunConfig& config) {
  if (name == "all") return trajectories;
  Rng rng = stream_rng(config, kSplitStream);
  auto split = data::split_trajectories(std::move(trajectories), config.data.ratios, rng);
  if (name == "train") return std::move(split.train);
  if (name == "calibration") return std::move(split.calibration);
  if (name == "test") return std::move(split.test);
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

data::WindowDataset prepare_windows(std::span<const data::Trajectory> raw, const data::ChannelSpec& spec,
                                    const data::Scaler& scaler, std::size_t length, std::size_t stride) {
  data::WindowDataset out;
  out.length = length;
  out.channels = spec.processed_layout().size();
  for (const auto& r : raw) {
    out.append(data::slide_windows(data::apply_scaler(scaler, data::convert_rotations(r, spec)), length, stride));
  }
  return out;
}

denoiser::Checkpoint load_model(const RunConfig& config) {
  return denoiser::load_checkpoint(require_path(config.paths.checkpoint, "checkpoint"));
}

SynthSummary cmd_synth(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path dir(require_path(config.paths.output, "output"));
  data::TaskProfile profile = data::TaskProfile::by_name(config.synth.profile);
  profile.steps = config.synth.steps;
  profile.burst_amplitude_min = profile.burst_amplitude_max = config.synth.burst_amplitude;
  profile.validate();

  Rng rng(config.seed);
  const auto generated = data::synth_generate(profile, config.synth.trajectories, config.synth.anomaly_rate, rng);
  const auto spec = data::synth_channel_spec();

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  SynthSummary summary;
  json entries = json::array();
  for (const auto& g : generated) {
    const std::string file = g.raw.id + ".csv";
    data::write_csv((dir / file).string(), g.raw, spec);
    const auto flagged = static_cast<std::size_t>(std::count(g.raw.flags.begin(), g.raw.flags.end(), 1));
    summary.files.push_back((dir / file).string());
    summary.flagged_steps += flagged;
    entries.push_back({{"file", file},
                       {"id", g.raw.id},
                       {"flagged_steps", flagged},
                       {"burst_onset", g.burst_steps > 0 ? json(g.burst_onset) : json(nullptr)},
                       {"burst_steps", g.burst_steps},
                       {"burst_amplitude", g.burst_amplitude}});
  }
  spec.save((dir / "spec.json").string());
  const json manifest = {{"format", "forcediff-synth-manifest"},
                         {"version", 1},
                         {"seed", config.seed},
                         {"profile", profile.name},
                         {"trajectories", config.synth.trajectories},
                         {"steps", profile.steps},
                         {"sample_period", profile.sample_period},
                         {"anomaly_rate", config.synth.anomaly_rate},
                         {"burst_amplitude_sigma", config.synth.burst_amplitude},
                         {"burst_min_steps", profile.burst_min_steps},
                         {"burst_max_steps", profile.burst_max_steps},
                         {"flagged_steps", summary.flagged_steps},
                         {"files", entries}};
  write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  log << "wrote " << generated.size() << " trajectories (" << summary.flagged_steps << " flagged steps) to "
      << dir.string() << "\n";
  return summary;
}

TrainSummary cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::string& out_path = require_path(config.paths.checkpoint, "checkpoint");
  auto raw = load_raw_data(config);
  const auto train = select_split(std::move(raw.trajectories), split_or(config, "train"), config);
  if (train.empty()) throw DataError("training split is empty");
  refuse_flagged(train, "training");

  std::vector<data::Trajectory> processed;
  for (const auto& t : train) processed.push_back(data::convert_rotations(t, raw.spec));
  const data::Scaler scaler = data::fit_scaler(processed);
  auto windows = prepare_windows(train, raw.spec, scaler, config.unet.window_length, config.train.stride);
  if (windows.empty()) throw DataError("training data yields no windows of length " +
                                       std::to_string(config.unet.window_length));
  if (config.train.max_windows > 0 && windows.size() > config.train.max_windows) {
    Rng rng = stream_rng(config, kTrainSubsampleStream);
    windows = data::subsample(windows, config.train.max_windows, rng);
  }

  diffusion::DiffusionConfig dcfg = config.diffusion;
  dcfg.mask = diffusion::MaskSpec::from_layout(raw.spec.processed_layout());
  dcfg.mask.validate();
  const auto schedule = diffusion::build_linear_schedule(dcfg);
  denoiser::UNetConfig ucfg = config.unet;
  ucfg.in_channels = dcfg.mask.channels();
  ucfg.out_channels = dcfg.mask.sensor.size();
  Rng init_rng = stream_rng(config, kInitStream);
  auto params = denoiser::init_params<float>(ucfg, init_rng);

  diffusion::TrainConfig fit = config.train.fit;
  fit.seed = config.seed;
  log << "training on " << windows.size() << " windows from " << train.size() << " trajectories\n";
  TrainSummary summary;
  summary.windows = windows.size();
  summary.epoch_loss = diffusion::fit(params, windows, dcfg.mask, schedule, fit, [&](std::size_t epoch, double loss) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "epoch %4zu  loss %.6f\n", epoch + 1, loss);
    log << buf << std::flush;
  }).epoch_loss;

  denoiser::save_checkpoint(out_path, {std::move(params), raw.spec, dcfg, scaler, config.seed});
  log << "wrote checkpoint " << out_path << "\n";
  return summary;
}

std::string CalibrationRecord::to_json() const {
  const json j = {{"format", kFormat},
                  {"version", kVersion},
                  {"mode", eval::threshold_mode_name(mode)},
                  {"threshold", threshold},
                  {"score_mode", scoring::mode_name(score_mode)},
                  {"steps", steps},
                  {"iterative_start", iterative_start},
                  {"seed", seed},
                  {"count", count},
                  {"mean", mean},
                  {"std", std},
                  {"min", min},
                  {"max", max}};
  return j.dump(2) + "\n";
}

CalibrationRecord CalibrationRecord::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != kFormat) throw DataError("not a calibration record");
    if (j.at("version") != kVersion) throw DataError("unsupported calibration record version " + j["version"].dump());
    CalibrationRecord r;
    r.mode = eval::parse_threshold_mode(j.at("mode").get<std::string>());
    r.threshold = j.at("threshold").get<double>();
    r.score_mode = scoring::parse_mode(j.at("score_mode").get<std::string>());
    r.steps = j.at("steps").get<std::vector<int>>();
    r.iterative_start = j.at("iterative_start").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.count = j.at("count").get<std::size_t>();
    r.mean = j.at("mean").get<double>();
    r.std = j.at("std").get<double>();
    r.min = j.at("min").get<double>();
    r.max = j.at("max").get<double>();
    if (!std::isfinite(r.threshold)) throw DataError("calibration threshold is not finite");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed calibration record: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed calibration record: ") + e.what());
  }
}

CalibrationRecord CalibrationRecord::load(const std::string& path) {
  try {
    return from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

CalibrationRecord make_calibration_record(std::span<const double> scores, eval::ThresholdMode mode,
                                          const scoring::ScoreConfig& score, std::uint64_t seed) {
  CalibrationRecord r;
  r.mode = mode;
  r.threshold = eval::calibrate_threshold(scores, mode);
  r.score_mode = score.mode;
  r.steps = score.steps;
  r.iterative_start = score.iterative_start;
  r.seed = seed;
  r.count = scores.size();
  const double n = static_cast<double>(scores.size());
  r.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - r.mean) * (s - r.mean);
  r.std = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  r.min = *lo;
  r.max = *hi;
  return r;
}

CalibrationRecord cmd_calibrate(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto setup = scoring_setup(config);
  const auto windows = calibration_windows(setup, config);
  log << "calibrating on " << windows.size() << " windows (" << scoring::mode_name(config.score.mode) << ")\n";
  const auto scores = score_values(setup, windows, config.score, config.seed);
  const auto record = make_calibration_record(scores, config.calibration, config.score, config.seed);
  if (config.paths.output.empty()) {
    out << record.to_json();
  } else {
    write_output(config.paths.output, record.to_json());
    log << "tau = " << format_double(record.threshold) << " (" << eval::threshold_mode_name(record.mode)
        << "), wrote " << config.paths.output << "\n";
  }
  return record;
}

std::vector<scoring::ScoreReport> cmd_score(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  std::optional<double> tau;
  if (!config.paths.calibration.empty()) tau = CalibrationRecord::load(config.paths.calibration).threshold;
  const auto setup = scoring_setup(config);
  const auto trajectories = select_split(setup.raw.trajectories, split_or(config, "all"), config);
  const auto windows = windows_of(setup, trajectories, config);
  log << "scoring " << windows.size() << " windows (" << scoring::mode_name(config.score.mode) << ")\n";

  const denoiser::UNetPredictor<float> model(setup.checkpoint.params);
  auto reports =
      scoring::score_dataset(model, windows, setup.checkpoint.diffusion.mask, setup.schedule, config.score, config.seed);
  std::string lines;
  for (auto& r : reports) {
    if (tau) {
      r.threshold = *tau;
      r.decision = scoring::decide(r.score, *tau);
    }
    lines += r.to_json_line() + "\n";
  }
  if (config.paths.output.empty()) {
    out << lines;
  } else {
    write_output(config.paths.output, lines);
  }
  return reports;
}

std::vector<EvalRow> cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto setup = scoring_setup(config);
  const auto trajectories = select_split(setup.raw.trajectories, split_or(config, "test"), config);
  auto windows = windows_of(setup, trajectories, config);
  if (windows.empty()) throw DataError("no test windows");
  if (!windows.fully_labeled()) throw DataError("eval needs labeled data (an anomaly column in every trajectory)");
  if (config.eval.normal_parts > 0) {
    Rng rng = stream_rng(config, kBalanceStream);
    windows = data::balance_labels(windows, config.eval.normal_parts, config.eval.anomaly_parts,
                                   config.eval.max_windows, rng);
  } else if (config.eval.max_windows > 0 && windows.size() > config.eval.max_windows) {
    Rng rng = stream_rng(config, kBalanceStream);
    windows = data::subsample(windows, config.eval.max_windows, rng);
  }
  std::vector<int> labels;
  for (const auto& w : windows.windows) labels.push_back(*w.label);

  std::optional<CalibrationRecord> record;
  if (!config.paths.calibration.empty()) record = CalibrationRecord::load(config.paths.calibration);
  std::optional<data::WindowDataset> calibration;

  std::vector<scoring::ScoreMode> modes = {config.score.mode};
  if (config.eval.both_modes) modes = {scoring::ScoreMode::kParallel, scoring::ScoreMode::kIterative};

  std::vector<EvalRow> rows;
  for (const auto mode : modes) {
    scoring::ScoreConfig score = config.score;
    score.mode = mode;
    double tau_c = 0.0;
    if (record && record->score_mode == mode) {
      tau_c = record->threshold;
    } else {
      if (!calibration) calibration = calibration_windows(setup, config, true);
      log << "calibrating " << scoring::mode_name(mode) << " on " << calibration->size() << " windows\n";
      tau_c = eval::calibrate_threshold(score_values(setup, *calibration, score, config.seed), config.calibration);
    }
    log << "scoring " << windows.size() << " test windows (" << scoring::mode_name(mode) << ")\n";
    const auto start = std::chrono::steady_clock::now();
    const auto scores = score_values(setup, windows, score, config.seed);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back({mode, eval::evaluate(scores, labels, tau_c), ms / static_cast<double>(windows.size())});
  }
  out << eval_table(rows);
  if (!config.paths.output.empty()) write_output(config.paths.output, eval_record(rows));
  return rows;
}

std::string eval_table(std::span<const EvalRow> rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %12s %12s %10s\n", "mode", "F1_c", "F1_best", "AUROC", "tau_c",
                "tau_best", "ms/window");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f %8.4f %12.6g %12.6g %10.3f\n",
                  std::string(scoring::mode_name(r.mode)).c_str(), r.report.calibrated.f1, r.report.best.f1,
                  r.report.auroc, r.report.tau_c, r.report.best.threshold, r.millis_per_window);
    out += buf;
  }
  if (!rows.empty()) {
    std::snprintf(buf, sizeof buf, "windows: %zu normal, %zu anomalous\n", rows.front().report.normal,
                  rows.front().report.anomalous);
    out += buf;
  }
  return out;
}

std::string eval_record(std::span<const EvalRow> rows) {
  json j = {{"format", "forcediff-eval"}, {"version", 1}, {"rows", json::array()}};
  for (const auto& r : rows) {
    j["rows"].push_back({{"mode", scoring::mode_name(r.mode)},
                         {"ms_per_window", r.millis_per_window},
                         {"report", json::parse(r.report.to_json())}});
  }
  return j.dump(2) + "\n";
}

}  // namespace forcediff::cli
