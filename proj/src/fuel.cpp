#include "platoon/fuel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

constexpr double kFeetToMeters = 0.3048;
constexpr double kMetersPerSecondToKmh = 3.6;
constexpr double kMetersPerSecondToMph = 1.0 / 0.44704;

double speed_from_fps(double v, SpeedUnit u) {
  switch (u) {
    case SpeedUnit::FeetPerSecond: return v;
    case SpeedUnit::MetersPerSecond: return v * kFeetToMeters;
    case SpeedUnit::KilometersPerHour: return v * kFeetToMeters * kMetersPerSecondToKmh;
    case SpeedUnit::MilesPerHour: return v * kFeetToMeters * kMetersPerSecondToMph;
  }
  return v;
}

double accel_from_fps2(double a, AccelUnit u) {
  switch (u) {
    case AccelUnit::FeetPerSecondSquared: return a;
    case AccelUnit::MetersPerSecondSquared: return a * kFeetToMeters;
    case AccelUnit::KilometersPerHourPerSecond:
      return a * kFeetToMeters * kMetersPerSecondToKmh;
    case AccelUnit::MilesPerHourPerSecond: return a * kFeetToMeters * kMetersPerSecondToMph;
  }
  return a;
}

double fuel_to_mlps(double f, FuelUnit u) {
  return u == FuelUnit::LitersPerSecond ? f * 1000.0 : f;
}

template <typename E>
E parse_unit(const nlohmann::json& j, const char* key, std::initializer_list<E> options) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(std::string("VT-Micro table: missing unit field '") + key + "'");
  }
  const auto name = j.at(key).get<std::string>();
  for (E e : options) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("VT-Micro table: unknown unit '" + name + "' for " + key);
}

CoefficientGrid parse_grid(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("VT-Micro table: missing ") + key);
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.size() != 4) {
    throw ConfigError(std::string("VT-Micro table: ") + key + " must be 4x4");
  }
  CoefficientGrid grid{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 4) {
      throw ConfigError(std::string("VT-Micro table: ") + key + " must be 4x4");
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (!rows[i][k].is_number()) {
        throw ConfigError(std::string("VT-Micro table: non-numeric entry in ") + key);
      }
      grid[i][k] = rows[i][k].get<double>();
      if (!std::isfinite(grid[i][k])) {
        throw ConfigError(std::string("VT-Micro table: non-finite entry in ") + key);
      }
    }
  }
  return grid;
}

nlohmann::json grid_json(const CoefficientGrid& g) {
  auto rows = nlohmann::json::array();
  for (const auto& r : g) rows.push_back(nlohmann::json(r));
  return rows;
}

}  // namespace

std::string to_string(SpeedUnit u) {
  switch (u) {
    case SpeedUnit::FeetPerSecond: return "ft/s";
    case SpeedUnit::MetersPerSecond: return "m/s";
    case SpeedUnit::KilometersPerHour: return "km/h";
    case SpeedUnit::MilesPerHour: return "mph";
  }
  return "?";
}

std::string to_string(AccelUnit u) {
  switch (u) {
    case AccelUnit::FeetPerSecondSquared: return "ft/s2";
    case AccelUnit::MetersPerSecondSquared: return "m/s2";
    case AccelUnit::KilometersPerHourPerSecond: return "km/h/s";
    case AccelUnit::MilesPerHourPerSecond: return "mph/s";
  }
  return "?";
}

std::string to_string(FuelUnit u) {
  return u == FuelUnit::LitersPerSecond ? "L/s" : "ml/s";
}

VtMicroTable VtMicroTable::light_duty() {
  VtMicroTable t;
  t.speed_unit = SpeedUnit::KilometersPerHour;
  t.accel_unit = AccelUnit::KilometersPerHourPerSecond;
  t.fuel_unit = FuelUnit::LitersPerSecond;
  t.k_pos = {{{-7.73452, 0.22946, -0.00561, 9.773e-05},
              {0.02799, 0.0068, -0.00077221, 8.38e-06},
              {-0.0002228, -4.402e-05, 7.9e-07, 8.17e-07},
              {1.09e-06, 4.8e-08, 3.27e-08, -7.79e-09}}};
  t.k_neg = {{{-7.73452, -0.01799, -0.00427, 0.00018829},
              {0.02804, 0.00772, 0.00083744, -3.387e-05},
              {-0.00021988, -5.219e-05, -7.44e-06, 2.77e-07},
              {1.08e-06, 2.47e-07, 4.87e-08, 3.79e-10}}};
  return t;
}

VtMicroTable VtMicroTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("VT-Micro table must be a JSON object");
  VtMicroTable t;
  t.speed_unit = parse_unit(j, "speed_unit",
                            {SpeedUnit::FeetPerSecond, SpeedUnit::MetersPerSecond,
                             SpeedUnit::KilometersPerHour, SpeedUnit::MilesPerHour});
  t.accel_unit = parse_unit(j, "accel_unit",
                            {AccelUnit::FeetPerSecondSquared, AccelUnit::MetersPerSecondSquared,
                             AccelUnit::KilometersPerHourPerSecond,
                             AccelUnit::MilesPerHourPerSecond});
  t.fuel_unit = j.contains("fuel_unit")
                    ? parse_unit(j, "fuel_unit",
                                 {FuelUnit::MillilitersPerSecond, FuelUnit::LitersPerSecond})
                    : FuelUnit::MillilitersPerSecond;
  t.k_pos = parse_grid(j, "K_pos");
  t.k_neg = parse_grid(j, "K_neg");
  return t;
}

VtMicroTable VtMicroTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open VT-Micro table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("VT-Micro table " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json VtMicroTable::to_json() const {
  return {{"speed_unit", to_string(speed_unit)},
          {"accel_unit", to_string(accel_unit)},
          {"fuel_unit", to_string(fuel_unit)},
          {"K_pos", grid_json(k_pos)},
          {"K_neg", grid_json(k_neg)}};
}

double vt_micro_fuel(double speed, double accel, const VtMicroTable& table,
                     const FuelInputBounds& bounds) {
  const double v = speed_from_fps(std::clamp(speed, 0.0, bounds.speed_max), table.speed_unit);
  const double a =
      accel_from_fps2(std::clamp(accel, bounds.accel_min, bounds.accel_max), table.accel_unit);
  const auto& k = a >= 0.0 ? table.k_pos : table.k_neg;

  double exponent = 0.0;
  double v_pow = 1.0;
  for (int i = 0; i < 4; ++i) {
    double a_pow = 1.0;
    for (int j = 0; j < 4; ++j) {
      exponent += k[i][j] * v_pow * a_pow;
      a_pow *= a;
    }
    v_pow *= v;
  }
  return fuel_to_mlps(std::exp(exponent), table.fuel_unit);
}

}  // namespace platoon
