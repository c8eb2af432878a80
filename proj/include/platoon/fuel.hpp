#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace platoon {

enum class SpeedUnit { FeetPerSecond, MetersPerSecond, KilometersPerHour, MilesPerHour };
enum class AccelUnit {
  FeetPerSecondSquared,
  MetersPerSecondSquared,
  KilometersPerHourPerSecond,
  MilesPerHourPerSecond
};
enum class FuelUnit { MillilitersPerSecond, LitersPerSecond };

using CoefficientGrid = std::array<std::array<double, 4>, 4>;

/// VT-Micro coefficients in the table's native units. Rows index the speed
/// power, columns the acceleration power.
struct VtMicroTable {
  SpeedUnit speed_unit = SpeedUnit::KilometersPerHour;
  AccelUnit accel_unit = AccelUnit::KilometersPerHourPerSecond;
  FuelUnit fuel_unit = FuelUnit::LitersPerSecond;
  CoefficientGrid k_pos{};  // a >= 0
  CoefficientGrid k_neg{};  // a < 0

  /// Composite light-duty fuel table (km/h, km/h/s, L/s); identical to
  /// data/vtmicro_light_duty.json.
  static VtMicroTable light_duty();

  /// Throws ConfigError on missing fields, unknown units or non-finite values.
  static VtMicroTable from_json(const nlohmann::json& j);
  static VtMicroTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  bool operator==(const VtMicroTable&) const = default;
};

/// Normalization bounds of the exponent polynomial, in ft/s and ft/s^2.
struct FuelInputBounds {
  double speed_max = 124.0;
  double accel_min = -13.0;
  double accel_max = 13.0;
};

/// Instantaneous fuel rate in ml/s. Speed is clamped to [0, speed_max] and
/// acceleration to [accel_min, accel_max] before conversion to table units.
double vt_micro_fuel(double speed, double accel, const VtMicroTable& table,
                     const FuelInputBounds& bounds = {});

std::string to_string(SpeedUnit u);
std::string to_string(AccelUnit u);
std::string to_string(FuelUnit u);

}  // namespace platoon
