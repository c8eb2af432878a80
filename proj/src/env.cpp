#include "platoon/env.hpp"

#include <algorithm>

#include "platoon/errors.hpp"

namespace platoon {

void EpisodeConfig::validate() const {
  if (horizon < 1) throw InvalidInput("episode horizon must be >= 1");
  if (!(dt > 0.0)) throw InvalidInput("episode dt must be positive");
  if (leader.empty()) throw InvalidInput("episode needs a leader trajectory");
  if (!fuel_table) throw ConfigError("episode needs a VT-Micro coefficient table");
  weights.validate();
  params.validate();
}

ModuleObservation observe(std::span<const VehicleState> platoon,
                          const SubsystemAssignment& assignment, const VehicleParams& params) {
  ModuleObservation obs;
  obs.per_cav.reserve(assignment.cav_indices.size());
  for (std::size_t idx : assignment.cav_indices) {
    const VehicleState& self = platoon[idx];
    const VehicleState& pred = platoon[idx - 1];
    const Spacing s = spacing_and_gap(pred, self, params);
    obs.per_cav.push_back({self.speed, s.gap, pred.speed - self.speed,
                           s.spacing - equilibrium_spacing(self.speed, params)});
  }
  return obs;
}

ModuleEnv::ModuleEnv(int module_size, EpisodeConfig config)
    : module_size_(module_size), config_(std::move(config)) {
  if (module_size_ < 1) throw InvalidInput("module size must be >= 1");
  config_.validate();
  assignment_.module_size = module_size_;
  assignment_.leader_index = 0;
  for (int i = 1; i <= module_size_; ++i) assignment_.cav_indices.push_back(i);
}

ModuleObservation ModuleEnv::reset(LeaderTrajectory leader) {
  config_.leader = std::move(leader);
  config_.validate();
  return reset();
}

ModuleObservation ModuleEnv::reset() {
  const auto& p = config_.params;
  const double v0 = config_.leader.speed(0);
  const double d0 = equilibrium_spacing(v0, p);
  vehicles_.assign(static_cast<std::size_t>(module_size_) + 1, VehicleState{});
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    vehicles_[i].speed = v0;
    vehicles_[i].position = -static_cast<double>(i) * d0;
  }
  accel_history_.assign(vehicles_.size(), {});
  for (auto& h : accel_history_) h.reserve(static_cast<std::size_t>(config_.horizon));
  step_ = 0;
  done_ = false;
  return observation();
}

ModuleObservation ModuleEnv::observation() const {
  return observe(vehicles_, assignment_, config_.params);
}

StepResult ModuleEnv::step(const ModuleAction& action) {
  if (done_) throw InvalidInput("ModuleEnv::step called on a finished episode");
  if (action.accels.size() != static_cast<std::size_t>(module_size_)) {
    throw InvalidInput("action has " + std::to_string(action.accels.size()) +
                       " accelerations, module expects " + std::to_string(module_size_));
  }
  const double dt = config_.dt;
  const auto& traj = config_.leader;
  const std::size_t next_sample = std::min<std::size_t>(static_cast<std::size_t>(step_) + 1,
                                                        traj.size() - 1);

  VehicleState& lead = vehicles_[0];
  const double v_next = traj.speed(next_sample);
  lead.accel = (v_next - lead.speed) / dt;
  lead.speed = v_next;
  lead.position += v_next * dt;

  for (int i = 0; i < module_size_; ++i) {
    auto& veh = vehicles_[static_cast<std::size_t>(i) + 1];
    veh = step_kinematics(veh, action.accels[static_cast<std::size_t>(i)], dt, config_.params);
  }
  ++step_;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    accel_history_[i].push_back(vehicles_[i].accel);
  }

  StepResult out;
  out.observation = observation();
  out.info.step = step_;
  out.info.per_cav.reserve(static_cast<std::size_t>(module_size_));

  const int window = config_.weights.window_steps;
  const bool window_boundary = step_ >= window && step_ % window == 0;
  const auto& lead_hist = accel_history_[0];

  for (int i = 0; i < module_size_; ++i) {
    const auto& o = out.observation.per_cav[static_cast<std::size_t>(i)];
    CavRewardContext ctx;
    ctx.speed = o.speed;
    ctx.gap = o.gap;
    ctx.delta_v = o.delta_v;
    ctx.delta_d = o.delta_d;
    ctx.accel = vehicles_[static_cast<std::size_t>(i) + 1].accel;
    if (window_boundary) {
      const auto& hist = accel_history_[static_cast<std::size_t>(i) + 1];
      const auto w = static_cast<std::size_t>(window);
      ctx.window_dampening_ratio =
          dampening_ratio(std::span(hist).last(w), std::span(lead_hist).last(w));
    }
    const auto b = immediate_reward(ctx, config_.weights, *config_.fuel_table, config_.params);
    out.reward += b.total;
    out.info.per_cav.push_back(b);
    if (o.gap <= 0.0) out.info.collision = true;
  }

  done_ = out.info.collision || step_ >= config_.horizon;
  out.done = done_;
  return out;
}

std::vector<std::optional<double>> ModuleEnv::episode_dampening_ratios() const {
  std::vector<std::optional<double>> out;
  for (int i = 1; i <= module_size_; ++i) {
    out.push_back(dampening_ratio(accel_history_[static_cast<std::size_t>(i)], accel_history_[0]));
  }
  return out;
}

}  // namespace platoon
