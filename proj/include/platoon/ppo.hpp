#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "platoon/policy.hpp"

namespace platoon {

struct Transition {
  ModuleObservation obs;
  std::vector<double> action;  // unclamped sample
  double reward = 0.0;
  double value = 0.0;       // V(s_t) under the behavior snapshot
  double next_value = 0.0;  // V(s_{t+1}); 0 after a collision
  double log_prob = 0.0;    // log pi_old(a_t | s_t)
  bool done = false;
  bool truncated = false;   // done only because the horizon ran out
  bool guided = false;      // action came from the guide controller
  std::uint64_t version = 0;
};

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value
};

/// Backward recursion A_t = delta_t + gamma * lambda * A_{t+1}, cut at dones,
/// with delta_t = r_t + gamma * V(s_{t+1}) - V(s_t) (next value 0 when done).
AdvantageEstimate gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                 std::span<const double> next_values,
                                 std::span<const std::uint8_t> dones, double gamma, double lambda);

/// Same recursion over recorded transitions. A horizon cut-off still ends the
/// recursion but bootstraps from V(s_{t+1}); only collisions are terminal.
AdvantageEstimate gae_advantages(std::span<const Transition> batch, double gamma, double lambda);

/// min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_surrogate(double ratio, double advantage, double epsilon);

/// d/d(ratio) of the clipped surrogate; zero wherever the clipped branch is active.
double clipped_surrogate_slope(double ratio, double advantage, double epsilon);

/// Mean squared error.
double critic_loss(std::span<const double> values, std::span<const double> targets);

/// First-order moments optimizer over a flat parameter span.
class Adam {
 public:
  explicit Adam(std::size_t size = 0, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  /// params -= lr * m_hat / (sqrt(v_hat) + eps) for the descent direction `grad`.
  void descend(std::span<double> params, std::span<const double> grad);

  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainerConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_epsilon = 0.2;
  int batch_size = 2048;
  int epochs = 10;
  int minibatch_size = 256;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int workers = 4;
  int episodes_m1 = 400;
  int episodes_other = 230;
  int guided_episodes = 80;
  int undertrained_episodes = 300;
  // Step size multiplier for regressing the actor mean onto guide actions
  // after each guided update; 0 leaves guided batches to PPO alone.
  double imitation_weight = 1.0;
  int horizon = 218;
  std::uint64_t seed = 1;
  bool normalize_advantages = true;
  bool parallel_kernels = true;
  PolicyOptions policy;

  void validate() const;
  bool operator==(const TrainerConfig&) const = default;
  int episodes_for(int module_size) const {
    return module_size == 1 ? episodes_m1 : episodes_other;
  }
};

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double surrogate = 0.0;    // mean clipped objective over the last epoch
  double value_loss = 0.0;   // mean critic loss over the last epoch
  double first_epoch_mean_ratio = 0.0;
  double first_epoch_surrogate = 0.0;
  int minibatches = 0;
};

/// Global learner: owns the current parameters and optimizer state.
class PpoLearner {
 public:
  PpoLearner(PolicyParameters initial, const TrainerConfig& config);

  const PolicyParameters& params() const { return params_; }

  /// Runs `epochs` passes of shuffled minibatches over `batch`, ascending the
  /// clipped surrogate and descending the critic loss, then bumps the version.
  /// Throws InvalidInput if the batch is smaller than one minibatch and
  /// NumericError on a non-finite loss.
  UpdateStats update(std::span<const Transition> batch, std::mt19937_64& rng);

  /// Least-squares pass pulling the actor mean toward the recorded actions of
  /// guided transitions (others are skipped). Returns the mean squared error
  /// before the pass, or 0 if there was nothing to fit.
  double imitate(std::span<const Transition> batch, std::mt19937_64& rng);

 private:
  PolicyParameters params_;
  TrainerConfig config_;
  Adam actor_opt_;
  Adam log_std_opt_;
  Adam critic_opt_;
};

/// R'_1 = R_1, R'_i = 0.9 R'_{i-1} + 0.1 R_i.
std::vector<double> moving_average_reward(std::span<const double> history);

}  // namespace platoon
