#include "forcediff/cli/stream.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <memory>

#include "forcediff/cli/commands.hpp"
#include "forcediff/data/trajectory.hpp"
#include "forcediff/diffusion/process.hpp"
#include "forcediff/errors.hpp"
#include "json.hpp"

namespace forcediff::cli {

StreamDetector::StreamDetector(const denoiser::Checkpoint& checkpoint, scoring::ScoreConfig score, double tau,
                               std::uint64_t seed, std::size_t patience)
    : checkpoint_(checkpoint),
      model_(checkpoint.params),
      schedule_(diffusion::build_linear_schedule(checkpoint.diffusion)),
      score_(std::move(score)),
      tau_(tau),
      seed_(seed),
      patience_(patience),
      length_(checkpoint.params.config.window_length) {
  if (patience_ == 0) throw ConfigError("patience must be at least 1");
  if (!std::isfinite(tau_)) throw ConfigError("stream threshold must be finite");
  score_.validate(schedule_);
}

std::optional<StreamDecision> StreamDetector::push(double t, std::span<const double> raw_row) {
  if (raw_row.size() != checkpoint_.channels.size()) {
    throw DataError("record has " + std::to_string(raw_row.size()) + " values, expected " +
                    std::to_string(checkpoint_.channels.size()));
  }
  for (double v : raw_row) {
    if (!std::isfinite(v)) throw DataError("record contains a non-finite value");
  }
  std::vector<double> processed = data::convert_row(raw_row, checkpoint_.channels);
  checkpoint_.scaler.apply_row(processed);
  buffer_.emplace_back(processed.begin(), processed.end());
  if (buffer_.size() > length_) buffer_.pop_front();
  ++accepted_;
  if (buffer_.size() < length_) return std::nullopt;

  const std::size_t channels = buffer_.front().size();
  data::Window window;
  window.values = Array<float>(Shape{length_, channels});
  for (std::size_t r = 0; r < length_; ++r) {
    std::copy(buffer_[r].begin(), buffer_[r].end(), window.values.data().begin() + r * channels);
  }
  window.start = accepted_ - length_;

  Rng rng = scoring::window_rng(seed_, window.start);
  const auto report = scoring::score_window(model_, diffusion::gather_window<float>(window, checkpoint_.diffusion.mask),
                                            schedule_, score_, rng);
  StreamDecision d;
  d.t = t;
  d.start = window.start;
  d.score = report.score;
  d.decision = scoring::decide(report.score, tau_);
  run_ = d.decision == 1 ? run_ + 1 : 0;
  d.stop = run_ >= patience_;
  return d;
}

LineSource istream_lines(std::istream& in) {
  return [&in](std::string& line) { return static_cast<bool>(std::getline(in, line)); };
}

LineSource tcp_lines(const std::string& address) {
  constexpr std::string_view kScheme = "tcp://";
  if (address.rfind(kScheme, 0) != 0) throw ConfigError("stream input must be '-' or tcp://host:port");
  const std::string rest = address.substr(kScheme.size());
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
    throw ConfigError("stream address '" + address + "' needs host:port");
  }
  const std::string host = rest.substr(0, colon);
  const std::string port = rest.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw IoError("cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw IoError("cannot connect to " + address);

  struct Connection {
    explicit Connection(int f) : fd(f) {}
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;
    ~Connection() { ::close(fd); }
    int fd;
    std::string pending;
    bool eof = false;
  };
  auto conn = std::make_shared<Connection>(fd);
  return [conn, address](std::string& line) {
    while (true) {
      const auto nl = conn->pending.find('\n');
      if (nl != std::string::npos) {
        line = conn->pending.substr(0, nl);
        conn->pending.erase(0, nl + 1);
        return true;
      }
      if (conn->eof) {
        if (conn->pending.empty()) return false;
        line = std::move(conn->pending);
        conn->pending.clear();
        return true;
      }
      char buf[4096];
      const ssize_t n = ::recv(conn->fd, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw IoError("read from " + address + " failed: " + std::strerror(errno));
      if (n == 0) conn->eof = true;
      conn->pending.append(buf, static_cast<std::size_t>(n));
    }
  };
}

StreamSummary run_stream(const denoiser::Checkpoint& checkpoint, const RunConfig& config, double tau,
                         const LineSource& input, std::ostream& out, std::ostream& log) {
  StreamDetector detector(checkpoint, config.score, tau, config.seed, config.stream.patience);
  StreamSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (input(line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++summary.records;
    double t = 0.0;
    std::vector<double> values;
    try {
      const auto j = nlohmann::json::parse(line);
      t = j.at("t").get<double>();
      values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      ++summary.skipped;
      log << nlohmann::json({{"warning", "malformed record skipped"}, {"line", line_no}, {"detail", e.what()}}).dump()
          << "\n";
      continue;
    }

    std::optional<StreamDecision> d;
    try {
      d = detector.push(t, values);
    } catch (const DataError& e) {
      ++summary.skipped;
      log << nlohmann::json({{"warning", "malformed record skipped"}, {"line", line_no}, {"detail", e.what()}}).dump()
          << "\n";
      continue;
    }
    if (!d) continue;

    ++summary.decisions;
    summary.history.push_back(*d);
    out << nlohmann::json({{"t", d->t}, {"score", d->score}, {"decision", d->decision}}).dump() << "\n";
    if (d->stop) {
      if (!summary.first_stop) summary.first_stop = d->t;
      out << nlohmann::json({{"t", d->t}, {"event", "STOP"}}).dump() << "\n";
      if (config.stream.halt) break;
    }
  }
  out.flush();
  return summary;
}

StreamSummary cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& log) {
  config.validate();
  if (config.paths.calibration.empty()) throw ConfigError("stream needs a calibration record (--calibration)");
  const double tau = CalibrationRecord::load(config.paths.calibration).threshold;
  const auto checkpoint = load_model(config);
  const LineSource source = config.stream.input == "-" ? istream_lines(in) : tcp_lines(config.stream.input);
  return run_stream(checkpoint, config, tau, source, out, log);
}

}  // namespace forcediff::cli
