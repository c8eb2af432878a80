#include "platoon/reward.hpp"

#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {

void RewardWeights::validate() const {
  if (!(alpha_spacing > 0.0 && alpha_speed > 0.0)) {
    throw InvalidInput("reward weights: Q diagonal entries must be positive");
  }
  if (comfort < 0.0 || efficiency < 0.0 || energy < 0.0) {
    throw InvalidInput("reward weights: M, C and F must be non-negative");
  }
  if (stability_penalty > 0.0 || gap_penalty > 0.0 || speed_penalty > 0.0) {
    throw InvalidInput("reward weights: penalties S, G, D must be <= 0");
  }
  if (window_steps < 1) throw InvalidInput("reward weights: n_d must be >= 1");
  if (!(safe_time_gap > 0.0)) throw InvalidInput("reward weights: g_t must be positive");
  if (!(free_flow_speed > 0.0)) throw InvalidInput("reward weights: v_f must be positive");
}

double efficiency_cost(double delta_d, double delta_v, const RewardWeights& w) {
  return w.alpha_spacing * delta_d * delta_d + w.alpha_speed * delta_v * delta_v;
}

double running_cost(double eff_cost, double accel, double comfort_weight) {
  return eff_cost + comfort_weight * accel * accel;
}

std::optional<double> dampening_ratio(std::span<const double> follower_accels,
                                      std::span<const double> leader_accels) {
  if (follower_accels.size() != leader_accels.size()) {
    throw InvalidInput("dampening_ratio: series lengths differ");
  }
  double f2 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < leader_accels.size(); ++i) {
    f2 += follower_accels[i] * follower_accels[i];
    l2 += leader_accels[i] * leader_accels[i];
  }
  const double leader_norm = std::sqrt(l2);
  if (leader_norm < kDampeningNormEpsilon) return std::nullopt;
  return std::sqrt(f2) / leader_norm;
}

double penalty_reward(const CavRewardContext& ctx, const RewardWeights& w) {
  double r = 0.0;
  if (ctx.window_dampening_ratio && *ctx.window_dampening_ratio > 1.0) r += w.stability_penalty;
  // A stopped vehicle with a positive gap has an unbounded time gap.
  const bool short_gap =
      ctx.gap <= 0.0 || (ctx.speed > 0.0 && ctx.gap / ctx.speed < w.safe_time_gap);
  if (short_gap) r += w.gap_penalty;
  if (ctx.speed > w.free_flow_speed) r += w.speed_penalty;
  return r;
}

RewardBreakdown immediate_reward(const CavRewardContext& ctx, const RewardWeights& w,
                                 const VtMicroTable& table, const VehicleParams& params) {
  RewardBreakdown b;
  b.efficiency_cost = efficiency_cost(ctx.delta_d, ctx.delta_v, w);
  b.comfort_cost = w.comfort * ctx.accel * ctx.accel;
  b.running_cost = b.efficiency_cost + b.comfort_cost;
  b.fuel = vt_micro_fuel(ctx.speed, ctx.accel, table,
                         {w.free_flow_speed, params.accel_min, params.accel_max});
  b.original = std::exp(-(w.efficiency * b.running_cost + w.energy * b.fuel));
  b.penalty = penalty_reward(ctx, w);
  b.total = b.original + b.penalty;
  return b;
}

}  // namespace platoon
