#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platoon/fuel.hpp"
#include "platoon/reward.hpp"
#include "platoon/topology.hpp"
#include "platoon/vehicle.hpp"

namespace platoon {

enum class VehicleRole { Leader, Cav, Hdv };
std::string to_string(VehicleRole role);

struct VehicleTrace {
  int id = 0;
  VehicleRole role = VehicleRole::Hdv;
  std::vector<VehicleState> states;  // one per logged time, aligned with TrajectoryLog::times
};

/// Platoon history at a fixed 0.1 s spacing. Sample 0 is the initial state;
/// vehicle i follows vehicle i - 1.
struct TrajectoryLog {
  std::vector<double> times;
  std::vector<VehicleTrace> vehicles;

  /// Throws InvalidInput on misaligned series or negative speeds.
  void validate() const;
};

struct VehicleReport {
  int id = 0;
  VehicleRole role = VehicleRole::Hdv;
  std::optional<double> dampening_ratio;  // vs vehicle 0, full episode
  std::optional<double> efficiency_cost;  // undefined for vehicle 0 (no predecessor)
  double comfort_cost = 0.0;
  std::optional<double> running_cost;
  double fuel = 0.0;  // ml/s
  double mean_speed = 0.0;
  double min_speed = 0.0;
};

/// Means are per-timestep averages over samples 1..T (the states produced by
/// each step); sample 0 only enters min_speed.
struct PlatoonReport {
  std::vector<VehicleReport> vehicles;
  double average_speed = 0.0;  // over every vehicle and timestep
  double average_fuel = 0.0;
};

PlatoonReport per_vehicle_report(const TrajectoryLog& log, const RewardWeights& weights,
                                 const VehicleParams& params, const VtMicroTable& table);

struct Improvement {
  std::optional<double> travel;  // % average speed gain
  std::optional<double> energy;  // % average fuel reduction
};

/// Undefined (nullopt) entries when the baseline average is zero.
Improvement improvement_vs_baseline(const PlatoonReport& report, const PlatoonReport& baseline);

struct StabilityVerdict {
  bool stable = true;
  double margin = 1.0;  // 1 - max follower ratio
};

/// Head-to-tail check over vehicles 1..n. Throws InvalidInput if a follower
/// ratio is undefined.
StabilityVerdict head_to_tail_stability(const PlatoonReport& report);

nlohmann::json report_to_json(const PlatoonReport& report);
/// One row per vehicle.
std::string report_to_csv(const PlatoonReport& report);

/// `t,vehicle_id,x,v,a`, rows ordered by time then vehicle.
std::string trajectory_log_csv(const TrajectoryLog& log);
void write_trajectory_log_csv(const std::filesystem::path& path, const TrajectoryLog& log);
/// Roles come from `topology` when given (vehicle 0 is always the leader),
/// otherwise every follower is read as an HDV. Throws ConfigError on I/O or
/// format problems.
TrajectoryLog read_trajectory_log_csv(const std::filesystem::path& path,
                                      const std::optional<TopologyVector>& topology = {});

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace platoon
