#include "forcediff/cli/app.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "forcediff/cli/commands.hpp"
#include "forcediff/cli/config.hpp"
#include "forcediff/cli/stream.hpp"
#include "forcediff/errors.hpp"

namespace forcediff::cli {
namespace {

// Command-line values; unset ones leave the config file (or defaults) alone.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::string> steps;
  std::optional<std::string> threshold_mode;
  std::optional<std::size_t> patience;

  std::optional<std::string> data, spec, checkpoint, calibration, output, split;
  std::optional<std::size_t> stride;

  std::optional<std::string> profile;
  std::optional<std::size_t> trajectories, length;
  std::optional<double> anomaly_rate, burst_amplitude;

  std::optional<std::size_t> epochs, batch_size, max_windows, base_width, window_length;
  std::optional<double> learning_rate;

  std::optional<std::string> ratio;
  bool both_modes = false;

  std::optional<std::string> input;
  bool keep_going = false;
};

template <typename T>
void set_if(const std::optional<T>& v, T& target) {
  if (v) target = *v;
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config_path ? RunConfig::load(*o.config_path) : RunConfig{};
  set_if(o.seed, c.seed);
  if (o.mode) c.score.mode = scoring::parse_mode(*o.mode);
  if (o.steps) c.score.steps = parse_step_list(*o.steps);
  if (o.k) {
    if (o.steps && c.score.steps.size() != *o.k) throw ConfigError("--k does not match the length of --steps");
    if (!o.steps) c.score.steps = spaced_steps(*o.k, c.diffusion.steps);
  }
  if (o.threshold_mode) c.calibration = eval::parse_threshold_mode(*o.threshold_mode);
  set_if(o.patience, c.stream.patience);

  set_if(o.data, c.paths.data);
  set_if(o.spec, c.paths.spec);
  set_if(o.checkpoint, c.paths.checkpoint);
  set_if(o.calibration, c.paths.calibration);
  set_if(o.output, c.paths.output);
  set_if(o.split, c.data.split);
  set_if(o.stride, c.data.stride);

  set_if(o.profile, c.synth.profile);
  set_if(o.trajectories, c.synth.trajectories);
  set_if(o.length, c.synth.steps);
  set_if(o.anomaly_rate, c.synth.anomaly_rate);
  set_if(o.burst_amplitude, c.synth.burst_amplitude);

  set_if(o.epochs, c.train.fit.epochs);
  set_if(o.batch_size, c.train.fit.batch_size);
  set_if(o.max_windows, c.train.max_windows);
  set_if(o.learning_rate, c.train.fit.learning_rate);
  set_if(o.base_width, c.unet.base_width);
  set_if(o.window_length, c.unet.window_length);

  if (o.ratio) {
    if (*o.ratio == "none") {
      c.eval.normal_parts = c.eval.anomaly_parts = 0;
    } else {
      const auto colon = o.ratio->find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        c.eval.normal_parts = std::stoul(o.ratio->substr(0, colon));
        c.eval.anomaly_parts = std::stoul(o.ratio->substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("--ratio must look like 2:3 or be 'none'");
      }
    }
  }
  if (o.both_modes) c.eval.both_modes = true;

  set_if(o.input, c.stream.input);
  if (o.keep_going) c.stream.halt = false;
  c.validate();
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-based anomaly detection for force-torque time series", "forcediff"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;

  app.add_option("--config", o.config_path, "JSON run configuration");
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--mode", o.mode, "Scoring mode")->check(CLI::IsMember({"parallel", "iterative"}));
  app.add_option("--k", o.k, "Number of parallel replicas (evenly spaced noise levels)");
  app.add_option("--steps", o.steps, "Comma-separated noise levels for parallel scoring");
  app.add_option("--threshold-mode", o.threshold_mode, "Calibration rule")
      ->check(CLI::IsMember({"mean_half_std", "max"}));
  app.add_option("--patience", o.patience, "Consecutive exceedances before STOP");

  auto add_paths = [&](CLI::App* sub, bool output) {
    sub->add_option("--data", o.data, "Trajectory CSV or directory of CSVs");
    sub->add_option("--spec", o.spec, "Channel spec (default: spec.json beside the data)");
    sub->add_option("--split", o.split, "all, train, calibration or test")
        ->check(CLI::IsMember({"all", "train", "calibration", "test"}));
    sub->add_option("--stride", o.stride, "Window stride for scoring");
    if (output) sub->add_option("--output,-o", o.output, "Output path");
  };

  auto* synth = app.add_subcommand("synth", "Generate synthetic trajectories");
  synth->add_option("--output,-o", o.output, "Output directory")->required();
  synth->add_option("--n", o.trajectories, "Number of trajectories");
  synth->add_option("--anomaly-rate", o.anomaly_rate, "Fraction of trajectories with a burst");
  synth->add_option("--profile", o.profile, "placement or prying");
  synth->add_option("--length", o.length, "Steps per trajectory");
  synth->add_option("--burst-amplitude", o.burst_amplitude, "Burst amplitude in sensor sigmas");

  auto* train = app.add_subcommand("train", "Train the denoiser and write a checkpoint");
  add_paths(train, false);
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint to write");
  train->add_option("--epochs", o.epochs, "Training epochs");
  train->add_option("--batch-size", o.batch_size, "Minibatch size");
  train->add_option("--lr", o.learning_rate, "Adam learning rate");
  train->add_option("--max-windows", o.max_windows, "Training window cap (0 = all)");
  train->add_option("--base-width", o.base_width, "U-Net channel width at the first level");
  train->add_option("--window", o.window_length, "Window length");

  auto* calibrate = app.add_subcommand("calibrate", "Set the threshold from normal-only data");
  add_paths(calibrate, true);
  calibrate->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");

  auto* score = app.add_subcommand("score", "Score every window, one JSON line each");
  add_paths(score, true);
  score->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  score->add_option("--calibration", o.calibration, "Calibration record for decisions");

  auto* evaluate = app.add_subcommand("eval", "F1_c, F1_best and AUROC on labeled data");
  add_paths(evaluate, true);
  evaluate->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  evaluate->add_option("--calibration", o.calibration, "Calibration record (default: calibrate on the fly)");
  evaluate->add_option("--ratio", o.ratio, "Test normal:anomalous ratio, e.g. 2:3, or none");
  evaluate->add_option("--max-windows", o.max_windows, "Test window cap (0 = all)");
  evaluate->add_flag("--both-modes", o.both_modes, "Evaluate parallel and iterative scoring");

  auto* stream = app.add_subcommand("stream", "Online detection over newline-delimited JSON records");
  stream->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  stream->add_option("--calibration", o.calibration, "Calibration record");
  stream->add_option("--input", o.input, "'-' for standard input or tcp://host:port");
  stream->add_flag("--continue", o.keep_going, "Keep scoring after a STOP");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    RunConfig config = build_config(o);
    if (evaluate->parsed()) {
      // --max-windows means the test cap here, not the training cap.
      config.eval.max_windows = o.max_windows.value_or(config.eval.max_windows);
    }
    if (synth->parsed()) {
      cmd_synth(config, err);
    } else if (train->parsed()) {
      cmd_train(config, err);
    } else if (calibrate->parsed()) {
      cmd_calibrate(config, out, err);
    } else if (score->parsed()) {
      cmd_score(config, out, err);
    } else if (evaluate->parsed()) {
      cmd_eval(config, out, err);
    } else if (stream->parsed()) {
      cmd_stream(config, in, out, err);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace forcediff::cli
