#include "platoon/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {

void VehicleParams::validate() const {
  if (!(length > 0.0)) throw InvalidInput("vehicle length must be positive");
  if (!(standstill_spacing > 0.0)) throw InvalidInput("standstill spacing must be positive");
  if (!(accel_min < 0.0 && accel_max > 0.0)) {
    throw InvalidInput("acceleration bounds must satisfy accel_min < 0 < accel_max");
  }
  if (!(desired_time_gap > 0.0)) throw InvalidInput("desired time gap must be positive");
}

double clamp_accel(double accel_cmd, const VehicleParams& params) {
  return std::clamp(accel_cmd, params.accel_min, params.accel_max);
}

VehicleState step_kinematics(const VehicleState& state, double accel_cmd, double dt,
                             const VehicleParams& params) {
  if (!std::isfinite(state.position) || !std::isfinite(state.speed) ||
      !std::isfinite(accel_cmd) || !std::isfinite(dt)) {
    throw NumericError("step_kinematics: non-finite input");
  }
  if (!(dt > 0.0)) throw InvalidInput("step_kinematics: dt must be positive");

  const double a = clamp_accel(accel_cmd, params);
  VehicleState next;
  next.speed = std::max(0.0, state.speed + a * dt);
  next.position = state.position + next.speed * dt;
  next.accel = (next.speed - state.speed) / dt;
  return next;
}

Spacing spacing_and_gap(const VehicleState& leader, const VehicleState& follower,
                        const VehicleParams& params) {
  Spacing s;
  s.spacing = leader.position - follower.position;
  s.gap = s.spacing - params.length;
  return s;
}

double equilibrium_spacing(double speed, const VehicleParams& params) {
  return speed * params.desired_time_gap + params.standstill_spacing;
}

}  // namespace platoon
