#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace platoon {

inline constexpr double kSampleInterval = 0.1;  // s

/// Recorded or synthetic leader speed profile at a fixed 0.1 s spacing.
class LeaderTrajectory {
 public:
  LeaderTrajectory() = default;

  /// Samples start at t = 0 with the fixed spacing.
  explicit LeaderTrajectory(std::vector<double> speeds);

  /// Validates strictly increasing, uniformly spaced (1e-9 s) times and
  /// non-negative finite speeds. Throws InvalidInput otherwise.
  LeaderTrajectory(std::vector<double> times, std::vector<double> speeds);

  std::size_t size() const { return speeds_.size(); }
  bool empty() const { return speeds_.empty(); }
  double time(std::size_t i) const { return times_.at(i); }
  double speed(std::size_t i) const { return speeds_.at(i); }
  std::span<const double> times() const { return times_; }
  std::span<const double> speeds() const { return speeds_; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  bool operator==(const LeaderTrajectory&) const = default;

 private:
  std::vector<double> times_;
  std::vector<double> speeds_;
};

struct IdmParams {
  double desired_speed = 124.0;     // v0, ft/s
  double time_headway = 1.5;        // T, s
  double min_gap = 6.6;             // s0, ft
  double max_accel = 3.3;           // a, ft/s^2
  double comfortable_decel = 5.5;   // b, ft/s^2
  double exponent = 4.0;            // delta

  void validate() const;
  bool operator==(const IdmParams&) const = default;
};

/// Intelligent driver model. `delta_v` is leader speed minus follower speed.
/// Throws InvalidInput when gap <= 0.
double idm_accel(double v, double delta_v, double gap, const IdmParams& p);

/// Gap at which idm_accel(v, 0, gap) = 0; requires 0 <= v < desired_speed.
double idm_equilibrium_gap(double v, const IdmParams& p);

/// Linear interpolation between bracketing samples. Throws RangeError outside
/// [start_time, end_time].
double playback_speed(const LeaderTrajectory& traj, double t);

struct StopAndGoSpec {
  double duration = 21.8;   // s
  double base_speed = 40.0; // ft/s
  int n_waves = 1;
  double amplitude = 15.0;  // ft/s, depth of each slowdown
  bool standstill = false;  // slowdowns reach zero speed and hold there
  std::uint64_t seed = 0;

  bool operator==(const StopAndGoSpec&) const = default;
};

/// Deterministic per seed: cruise at base speed with `n_waves` raised-cosine
/// slowdowns (decelerate, hold, recover), one per equal time segment.
LeaderTrajectory synth_stop_and_go(const StopAndGoSpec& spec);

/// CSV with header `t,v`. The reader rejects non-uniform spacing.
LeaderTrajectory read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path, const LeaderTrajectory& traj);

}  // namespace platoon
