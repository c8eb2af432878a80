#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "platoon/driver_models.hpp"
#include "platoon/fuel.hpp"
#include "platoon/reward.hpp"
#include "platoon/topology.hpp"
#include "platoon/vehicle.hpp"

namespace platoon {

/// Per-CAV state (v, g, delta_v, delta_d).
struct CavObservation {
  double speed = 0.0;
  double gap = 0.0;
  double delta_v = 0.0;  // predecessor speed minus own speed
  double delta_d = 0.0;  // spacing minus equilibrium spacing

  bool operator==(const CavObservation&) const = default;
};

struct ModuleObservation {
  std::vector<CavObservation> per_cav;

  std::size_t size() const { return per_cav.size(); }
  bool operator==(const ModuleObservation&) const = default;
};

struct ModuleAction {
  std::vector<double> accels;  // ft/s^2, clamped on application
};

struct EpisodeConfig {
  int horizon = 218;
  double dt = kSampleInterval;
  LeaderTrajectory leader;
  RewardWeights weights;
  VehicleParams params;
  std::shared_ptr<const VtMicroTable> fuel_table =
      std::make_shared<const VtMicroTable>(VtMicroTable::light_duty());

  void validate() const;
};

/// Observation of the CAVs in `assignment`, read from platoon-indexed states.
ModuleObservation observe(std::span<const VehicleState> platoon,
                          const SubsystemAssignment& assignment, const VehicleParams& params);

struct StepInfo {
  int step = 0;
  bool collision = false;
  std::vector<RewardBreakdown> per_cav;
};

struct StepResult {
  ModuleObservation observation;
  double reward = 0.0;  // sum of per-CAV rewards
  bool done = false;
  StepInfo info;
};

/// One subsystem: a playback leader followed by k controlled CAVs. The leader
/// speed at step t is sample t of the trajectory, held at the last sample once
/// the trajectory runs out. Episodes end at the horizon or on any gap <= 0.
class ModuleEnv {
 public:
  ModuleEnv(int module_size, EpisodeConfig config);

  /// Places every CAV at the leader's initial speed and exact equilibrium spacing.
  ModuleObservation reset();
  ModuleObservation reset(LeaderTrajectory leader);

  StepResult step(const ModuleAction& action);

  int module_size() const { return module_size_; }
  int step_count() const { return step_; }
  bool done() const { return done_; }
  const EpisodeConfig& config() const { return config_; }
  ModuleObservation observation() const;

  /// Index 0 is the leader, 1..k the CAVs.
  std::span<const VehicleState> vehicles() const { return vehicles_; }

  /// Applied accelerations per vehicle, one entry per completed step.
  const std::vector<std::vector<double>>& accel_history() const { return accel_history_; }

  /// Full-episode dampening ratio of each CAV relative to the module leader.
  std::vector<std::optional<double>> episode_dampening_ratios() const;

 private:
  int module_size_;
  EpisodeConfig config_;
  SubsystemAssignment assignment_;
  std::vector<VehicleState> vehicles_;
  std::vector<std::vector<double>> accel_history_;
  int step_ = 0;
  bool done_ = true;
};

}  // namespace platoon
