#pragma once

// Longitudinal kinematics shared by every module. Units throughout the
// codebase: feet, seconds, ft/s, ft/s^2.

namespace platoon {

struct VehicleParams {
  double length = 15.0;              // ft
  double standstill_spacing = 21.0;  // ft, front bumper to front bumper at v = 0
  double accel_min = -13.0;          // ft/s^2
  double accel_max = 13.0;           // ft/s^2
  double desired_time_gap = 1.0;     // s

  /// Throws InvalidInput if any field is out of its domain.
  void validate() const;
  bool operator==(const VehicleParams&) const = default;
};

struct VehicleState {
  double position = 0.0;  // ft, front bumper
  double speed = 0.0;     // ft/s
  double accel = 0.0;     // ft/s^2, last applied

  bool operator==(const VehicleState&) const = default;
};

double clamp_accel(double accel_cmd, const VehicleParams& params);

/// Semi-implicit Euler step: speed first (floored at zero), then position with
/// the new speed. The returned accel is the effective one, (v' - v) / dt.
VehicleState step_kinematics(const VehicleState& state, double accel_cmd, double dt,
                             const VehicleParams& params);

struct Spacing {
  double spacing = 0.0;  // d: front bumper to front bumper
  double gap = 0.0;      // g = d - vehicle length
};

/// Overlap (g <= 0) is reported, not raised.
Spacing spacing_and_gap(const VehicleState& leader, const VehicleState& follower,
                        const VehicleParams& params);

/// Constant-time-gap target spacing d* = v * tau + standstill spacing.
double equilibrium_spacing(double speed, const VehicleParams& params);

}  // namespace platoon
