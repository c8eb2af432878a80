#pragma once

// Experiment orchestration: mixed-platoon simulation with trained modules,
// penetration sweeps, combination studies and the five-module training run.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platoon/config.hpp"
#include "platoon/fuel.hpp"
#include "platoon/metrics.hpp"
#include "platoon/policy.hpp"
#include "platoon/topology.hpp"
#include "platoon/trainer.hpp"

namespace platoon {

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int module_size);
std::filesystem::path undertrained_checkpoint_path(const std::filesystem::path& dir);

/// Trained modules by size; slot k - 1 holds M_k.
struct PolicyBank {
  std::array<std::optional<PolicyParameters>, kDefaultMaxModuleSize> modules;

  bool has(int module_size) const;
  /// Throws ConfigError when M_k is absent.
  const PolicyParameters& at(int module_size) const;
  /// Loads every m<k>.json present in `dir`; missing files leave empty slots.
  static PolicyBank load(const std::filesystem::path& dir);
};

struct SimulationInput {
  TopologyVector topology{std::vector<int>{1}};
  LeaderTrajectory leader;
  VehicleParams vehicle;
  IdmParams idm;
  RewardWeights weights;
  std::shared_ptr<const VtMicroTable> fuel_table =
      std::make_shared<const VtMicroTable>(VtMicroTable::light_duty());
  int max_module_size = kDefaultMaxModuleSize;
};

struct SimulationResult {
  std::vector<SubsystemAssignment> modules;
  TrajectoryLog log;
  PlatoonReport report;
  int collisions = 0;  // follower-steps that entered an overlap
};

/// Runs the platoon for leader.size() - 1 steps. CAVs act on their module's
/// policy mean, HDVs on IDM; any follower already overlapping its predecessor
/// brakes at accel_min. CAVs start at the CAV equilibrium spacing, HDVs at
/// the IDM equilibrium gap. Throws ConfigError before simulating if a needed
/// module is missing from `bank`.
SimulationResult run_simulation(const SimulationInput& input, const PolicyBank& bank);

/// Playback leader (label 1) followed by `followers`.
TopologyVector platoon_topology(const std::vector<int>& followers);
/// round(rate / 100 * n).
int cav_count(double rate_percent, int followers);
std::vector<int> random_followers(double rate_percent, int followers, std::uint64_t seed);
/// Literal vectors for 20, 47 and 80 percent; ConfigError otherwise.
std::vector<int> specific_followers(double rate_percent);
std::vector<int> cav_first_followers(double rate_percent, int followers);
std::vector<int> hdv_first_followers(double rate_percent, int followers);
std::vector<int> parse_followers(const std::string& literal);
std::string followers_to_string(const std::vector<int>& followers);

LeaderTrajectory resolve_leader(const ExperimentConfig& config);
std::shared_ptr<const VtMicroTable> resolve_fuel_table(const ExperimentConfig& config);
SimulationInput simulation_input(const ExperimentConfig& config, TopologyVector topology,
                                 LeaderTrajectory leader);

/// Randomized training leader for (module, episode, worker).
LeaderTrajectory training_leader(const TrainingLeaderConfig& spec, std::uint64_t seed,
                                 int module_size, int episode, int worker);
/// Leaders from a stream disjoint from every training draw.
LeaderTrajectory held_out_leader(const TrainingLeaderConfig& spec, std::uint64_t seed, int index);

struct SweepRow {
  double rate = 0.0;
  std::vector<int> followers;
  PlatoonReport report;
  Improvement improvement;
  int collisions = 0;
};

/// One seeded random topology per rate; improvements are against the 0% row,
/// which is simulated even when not listed.
std::vector<SweepRow> run_penetration_sweep(const ExperimentConfig& config, const PolicyBank& bank);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct CombinationRow {
  std::string name;  // random | specific | cav_first | hdv_first
  std::vector<int> followers;
  PlatoonReport report;
  int collisions = 0;
};

/// The "specific" row is present only for 20, 47 or 80 percent.
std::vector<CombinationRow> run_combination_study(const ExperimentConfig& config,
                                                  const PolicyBank& bank);
nlohmann::json combinations_to_json(const std::vector<CombinationRow>& rows);
std::string combinations_to_csv(const std::vector<CombinationRow>& rows);

struct TrainingRunSummary {
  std::vector<int> trained;
  std::vector<int> resumed;  // checkpoint already present, skipped
};

/// Trains M_1..M_max in order, writing checkpoints/m<k>.json (plus the
/// undertrained M_1) and logs/m<k>.jsonl. Modules whose checkpoint exists are
/// loaded instead of retrained. Progress lines go to `progress` if non-null.
TrainingRunSummary run_training(const ExperimentConfig& config, std::ostream* progress = nullptr);

}  // namespace platoon
