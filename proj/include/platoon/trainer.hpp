#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "platoon/env.hpp"
#include "platoon/policy.hpp"
#include "platoon/ppo.hpp"

namespace platoon {

using PolicySnapshot = std::shared_ptr<const PolicyParameters>;

/// Holds the latest published parameters. Readers take a shared_ptr copy and
/// keep using it while the learner publishes newer versions.
class SnapshotStore {
 public:
  explicit SnapshotStore(PolicyParameters initial);

  PolicySnapshot current() const;
  /// Throws InvalidInput unless the new version is strictly greater.
  void publish(PolicyParameters next);

 private:
  mutable std::mutex mutex_;
  PolicySnapshot current_;
};

/// Leader trajectory for (episode, worker).
using LeaderSource = std::function<LeaderTrajectory(int episode, int worker)>;

/// One rollout worker: its own environment, RNG and in-progress episode.
struct RolloutWorker {
  RolloutWorker(int id, ModuleEnv env, std::uint64_t seed);

  int id;
  ModuleEnv env;
  std::mt19937_64 rng;
  ModuleObservation obs;
  bool needs_reset = true;
};

/// Collects exactly `steps` transitions, resetting the environment (with its
/// current leader) whenever an episode ends. When `guide` is set, each CAV's
/// action comes from the single-CAV guide policy and is scored under
/// `snapshot`.
std::vector<Transition> worker_rollout(RolloutWorker& worker, const PolicySnapshot& snapshot,
                                       int steps, const PolicyParameters* guide = nullptr);

struct EpisodeRollout {
  std::vector<Transition> transitions;
  double episode_return = 0.0;
  bool collision = false;
  std::vector<std::optional<double>> dampening_ratios;  // per CAV, full episode
};

/// Resets on `leader` and runs one complete episode.
EpisodeRollout run_episode(RolloutWorker& worker, const PolicySnapshot& snapshot,
                           LeaderTrajectory leader, const PolicyParameters* guide = nullptr);

/// One episode on every worker; results are in worker order regardless of
/// scheduling.
std::vector<EpisodeRollout> run_episodes_serial(std::span<RolloutWorker> workers,
                                                const PolicySnapshot& snapshot,
                                                std::span<const LeaderTrajectory> leaders,
                                                const PolicyParameters* guide);
std::vector<EpisodeRollout> run_episodes_parallel(std::span<RolloutWorker> workers,
                                                  const PolicySnapshot& snapshot,
                                                  std::span<const LeaderTrajectory> leaders,
                                                  const PolicyParameters* guide);

struct EpisodeRecord {
  int episode = 0;
  double raw_reward = 0.0;       // mean episode return over workers
  double smoothed_reward = 0.0;
  int collisions = 0;
  std::optional<double> mean_dampening_ratio;
  bool guided = false;
};

struct TrainingSetup {
  EpisodeConfig episode;  // horizon, weights, params, fuel table
  LeaderSource leaders;
  // Single-CAV policy that drives guided episodes; required for k >= 2 when
  // guided_episodes > 0.
  std::optional<PolicyParameters> guide;
  std::function<void(const EpisodeRecord&, const UpdateStats*)> on_episode;
};

struct TrainingResult {
  PolicyParameters params;
  std::vector<EpisodeRecord> history;
  // k = 1 only: frozen copy after `undertrained_episodes` episodes.
  std::optional<PolicyParameters> undertrained;
  int updates = 0;
};

/// Runs the episode schedule for module size k. Each episode runs one episode
/// per worker; an update happens whenever the buffer holds a full batch.
TrainingResult train_module(int module_size, const TrainerConfig& config,
                            const TrainingSetup& setup);

/// Writes one JSON record per line: episode, raw_reward, smoothed_reward,
/// collisions, mean_dampening_ratio.
std::string training_log_line(const EpisodeRecord& record);

}  // namespace platoon
