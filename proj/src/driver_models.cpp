#include "platoon/driver_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "platoon/errors.hpp"
#include "platoon/text_io.hpp"

namespace platoon {

namespace {

constexpr double kSpacingTolerance = 1e-9;
// Peak deceleration of a synthetic slowdown ramp, ft/s^2.
constexpr double kSynthPeakAccel = 8.0;

void check_speeds(const std::vector<double>& speeds) {
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (!std::isfinite(speeds[i]) || speeds[i] < 0.0) {
      throw InvalidInput("leader speed at sample " + std::to_string(i) +
                         " must be finite and non-negative");
    }
  }
}

}  // namespace

LeaderTrajectory::LeaderTrajectory(std::vector<double> speeds) : speeds_(std::move(speeds)) {
  if (speeds_.empty()) throw InvalidInput("leader trajectory needs at least one sample");
  check_speeds(speeds_);
  times_.resize(speeds_.size());
  for (std::size_t i = 0; i < times_.size(); ++i) {
    times_[i] = static_cast<double>(i) * kSampleInterval;
  }
}

LeaderTrajectory::LeaderTrajectory(std::vector<double> times, std::vector<double> speeds)
    : times_(std::move(times)), speeds_(std::move(speeds)) {
  if (speeds_.empty()) throw InvalidInput("leader trajectory needs at least one sample");
  if (times_.size() != speeds_.size()) {
    throw InvalidInput("leader trajectory: time and speed columns differ in length");
  }
  check_speeds(speeds_);
  for (std::size_t i = 1; i < times_.size(); ++i) {
    const double step = times_[i] - times_[i - 1];
    if (!(step > 0.0)) throw InvalidInput("leader trajectory times must strictly increase");
    if (std::abs(step - kSampleInterval) > kSpacingTolerance) {
      throw InvalidInput("leader trajectory rows must be spaced 0.1 s apart (row " +
                         std::to_string(i) + ")");
    }
  }
}

void IdmParams::validate() const {
  if (!(desired_speed > 0 && time_headway > 0 && min_gap > 0 && max_accel > 0 &&
        comfortable_decel > 0 && exponent > 0)) {
    throw InvalidInput("IDM parameters must all be positive");
  }
}

double idm_accel(double v, double delta_v, double gap, const IdmParams& p) {
  if (!(gap > 0.0)) throw InvalidInput("idm_accel: gap must be positive");
  const double approach = -delta_v;  // follower minus leader speed
  const double dynamic =
      v * p.time_headway + v * approach / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
  const double desired_gap = p.min_gap + std::max(0.0, dynamic);
  const double free = std::pow(v / p.desired_speed, p.exponent);
  const double interaction = (desired_gap / gap) * (desired_gap / gap);
  return p.max_accel * (1.0 - free - interaction);
}

double idm_equilibrium_gap(double v, const IdmParams& p) {
  if (!(v >= 0.0 && v < p.desired_speed)) {
    throw InvalidInput("idm_equilibrium_gap: speed must lie in [0, desired speed)");
  }
  const double desired_gap = p.min_gap + v * p.time_headway;
  return desired_gap / std::sqrt(1.0 - std::pow(v / p.desired_speed, p.exponent));
}

double playback_speed(const LeaderTrajectory& traj, double t) {
  if (traj.empty()) throw RangeError("playback_speed: empty trajectory");
  if (!(t >= traj.start_time() && t <= traj.end_time())) {
    throw RangeError("playback_speed: t outside trajectory range");
  }
  const auto times = traj.times();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return traj.speed(traj.size() - 1);
  const auto hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  if (t == times[lo]) return traj.speed(lo);
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return traj.speed(lo) + w * (traj.speed(hi) - traj.speed(lo));
}

LeaderTrajectory synth_stop_and_go(const StopAndGoSpec& spec) {
  if (!(spec.duration > 0.0)) throw InvalidInput("synth_stop_and_go: duration must be positive");
  if (spec.base_speed < 0.0 || spec.amplitude < 0.0 || spec.n_waves < 0) {
    throw InvalidInput("synth_stop_and_go: negative speed, amplitude or wave count");
  }
  if (!spec.standstill && spec.amplitude > spec.base_speed) {
    throw InvalidInput("synth_stop_and_go: amplitude exceeds base speed");
  }

  const auto n = static_cast<std::size_t>(std::llround(spec.duration / kSampleInterval));
  std::vector<double> speeds(std::max<std::size_t>(n, 1), spec.base_speed);
  const double depth_max = spec.standstill ? spec.base_speed : spec.amplitude;
  if (spec.n_waves == 0 || depth_max == 0.0) return LeaderTrajectory(std::move(speeds));

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double segment = spec.duration / spec.n_waves;

  for (int w = 0; w < spec.n_waves; ++w) {
    const double depth = spec.standstill ? spec.base_speed : depth_max * (0.7 + 0.3 * unit(rng));
    const double ramp_min = depth * std::numbers::pi / (2.0 * kSynthPeakAccel);
    double decel = std::max(ramp_min, (0.15 + 0.15 * unit(rng)) * segment);
    double hold = (spec.standstill ? 0.1 + 0.1 * unit(rng) : 0.15 * unit(rng)) * segment;
    double recover = std::max(ramp_min, (0.15 + 0.15 * unit(rng)) * segment);
    const double total = decel + hold + recover;
    const double room = 0.9 * segment;
    if (total > room) {
      const double s = room / total;
      decel *= s;
      hold *= s;
      recover *= s;
    }
    const double start = w * segment + (0.05 * segment) +
                         unit(rng) * std::max(0.0, room - (decel + hold + recover) - 0.05 * segment);

    for (std::size_t i = 0; i < speeds.size(); ++i) {
      const double t = static_cast<double>(i) * kSampleInterval - start;
      double drop = 0.0;
      if (t < 0.0) {
        continue;
      } else if (t < decel) {
        drop = depth * 0.5 * (1.0 - std::cos(std::numbers::pi * t / decel));
      } else if (t < decel + hold) {
        drop = depth;
      } else if (t < decel + hold + recover) {
        const double u = (t - decel - hold) / recover;
        drop = depth * 0.5 * (1.0 + std::cos(std::numbers::pi * u));
      }
      speeds[i] = std::max(0.0, speeds[i] - drop);
    }
  }
  return LeaderTrajectory(std::move(speeds));
}

LeaderTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory file is empty: " + path.string());
  const auto header = text::split(text::trim(line), ',');
  if (header.size() != 2 || text::trim(header[0]) != "t" || text::trim(header[1]) != "v") {
    throw ConfigError("trajectory file must start with header 't,v': " + path.string());
  }
  std::vector<double> times, speeds;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    double t = 0, v = 0;
    if (cols.size() != 2 || !text::parse_double(cols[0], t) || !text::parse_double(cols[1], v)) {
      throw ConfigError("malformed trajectory row " + std::to_string(row) + " in " +
                        path.string());
    }
    times.push_back(t);
    speeds.push_back(v);
  }
  try {
    return LeaderTrajectory(std::move(times), std::move(speeds));
  } catch (const InvalidInput& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const LeaderTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory file " + path.string());
  std::string buf = "t,v\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    text::append_double(buf, traj.time(i));
    buf += ',';
    text::append_double(buf, traj.speed(i));
    buf += '\n';
  }
  out << buf;
}

}  // namespace platoon
