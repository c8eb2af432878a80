#pragma once

#include <optional>
#include <span>

#include "platoon/fuel.hpp"
#include "platoon/vehicle.hpp"

namespace platoon {

/// Reward coefficients. Defaults are the energy-aware strategy (F = 2.5).
struct RewardWeights {
  double alpha_spacing = 1.0;     // Q[0][0], weight on delta_d^2
  double alpha_speed = 0.5;       // Q[1][1], weight on delta_v^2
  double comfort = 0.5;           // M
  double efficiency = 1.0;        // C
  double energy = 2.5;            // F
  double stability_penalty = -0.1;  // S
  double gap_penalty = -0.05;       // G
  double speed_penalty = -0.05;     // D
  int window_steps = 50;            // n_d
  double safe_time_gap = 0.6;       // g_t, s
  double free_flow_speed = 124.0;   // v_f, ft/s

  void validate() const;
  bool operator==(const RewardWeights&) const = default;
};

/// Guard on the leader's acceleration norm in the dampening ratio, ft/s^2.
inline constexpr double kDampeningNormEpsilon = 1e-6;

/// alpha1 * delta_d^2 + alpha2 * delta_v^2.
double efficiency_cost(double delta_d, double delta_v, const RewardWeights& w);

/// Efficiency cost plus the comfort term M * a^2.
double running_cost(double eff_cost, double accel, double comfort_weight);

/// ||follower||_2 / ||leader||_2, or nullopt when the leader norm is below
/// kDampeningNormEpsilon. Throws InvalidInput on a length mismatch.
std::optional<double> dampening_ratio(std::span<const double> follower_accels,
                                      std::span<const double> leader_accels);

/// Everything the per-CAV reward needs at one timestep.
struct CavRewardContext {
  double speed = 0.0;    // ft/s
  double gap = 0.0;      // ft
  double delta_v = 0.0;  // predecessor speed minus own speed
  double delta_d = 0.0;  // spacing minus equilibrium spacing
  double accel = 0.0;    // applied acceleration
  // Present only on an n_d boundary with a full window; nullopt otherwise or
  // when the window ratio is undefined.
  std::optional<double> window_dampening_ratio;
};

struct RewardBreakdown {
  double efficiency_cost = 0.0;
  double comfort_cost = 0.0;
  double running_cost = 0.0;
  double fuel = 0.0;       // ml/s
  double original = 0.0;   // exp(-(C l + F e))
  double penalty = 0.0;
  double total = 0.0;
};

/// Sum of the stability, gap and speed penalties; lies in [S + G + D, 0].
double penalty_reward(const CavRewardContext& ctx, const RewardWeights& w);

RewardBreakdown immediate_reward(const CavRewardContext& ctx, const RewardWeights& w,
                                 const VtMicroTable& table, const VehicleParams& params);

}  // namespace platoon
