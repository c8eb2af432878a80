#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platoon/driver_models.hpp"
#include "platoon/ppo.hpp"
#include "platoon/reward.hpp"
#include "platoon/vehicle.hpp"

namespace platoon {

/// Fixed leader for simulate/sweep/combos: a CSV file or a synthetic profile.
struct LeaderSourceConfig {
  std::string kind = "synthetic";  // "synthetic" | "file"
  std::filesystem::path file;
  StopAndGoSpec synthetic{.duration = 40.0, .base_speed = 45.0, .n_waves = 2,
                          .amplitude = 20.0, .standstill = false, .seed = 7};
  bool operator==(const LeaderSourceConfig&) const = default;
};

/// Distribution of randomized stop-and-go leaders used during training. Each
/// (module, episode, worker) draws its own leader from the run seed.
struct TrainingLeaderConfig {
  double duration = 21.8;
  double base_speed_min = 30.0;
  double base_speed_max = 60.0;
  double amplitude_min = 10.0;
  double amplitude_max = 25.0;
  int waves_min = 1;
  int waves_max = 2;
  bool operator==(const TrainingLeaderConfig&) const = default;
};

struct ExperimentConfig {
  std::string scenario = "simulate";  // train | simulate | sweep | combos | decompose | report
  // Follower labels, front to rear (0 = CAV, 1 = HDV); the playback leader is
  // prepended. Empty means all 15 followers are CAVs.
  std::string topology;
  std::vector<double> penetration_rates{0, 20, 40, 60, 80, 100};
  double combination_rate = 47.0;
  int followers = 15;
  int max_module_size = 5;
  LeaderSourceConfig leader;
  TrainingLeaderConfig training_leaders;
  std::filesystem::path checkpoint_dir;  // empty: <output_dir>/checkpoints
  std::filesystem::path trajectory_log;  // input for `report`
  std::filesystem::path fuel_table;      // empty: built-in light-duty table
  TrainerConfig trainer;
  RewardWeights weights;
  VehicleParams vehicle;
  IdmParams idm;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Throws ConfigError on any out-of-domain value.
  void validate() const;
  std::filesystem::path checkpoints() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Unknown keys are rejected; missing keys keep their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace platoon
