#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "platoon/errors.hpp"
#include "platoon/fuel.hpp"

using namespace platoon;

namespace {

constexpr double kFtPerSecToKmh = 0.3048 * 3.6;

// Direct evaluation of the polynomial exponent in the table's native units.
double fuel_oracle(double v_ftps, double a_ftps2, const VtMicroTable& t) {
  const double v = v_ftps * kFtPerSecToKmh;
  const double a = a_ftps2 * kFtPerSecToKmh;
  const auto& k = a >= 0.0 ? t.k_pos : t.k_neg;
  double e = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e += k[i][j] * std::pow(v, i) * std::pow(a, j);
  return std::exp(e) * 1000.0;  // L/s -> ml/s
}

VtMicroTable constant_table(double k00) {
  VtMicroTable t;
  t.fuel_unit = FuelUnit::MillilitersPerSecond;
  t.k_pos[0][0] = k00;
  t.k_neg[0][0] = k00;
  return t;
}

}  // namespace

TEST_CASE("degenerate tables") {
  const auto zero = constant_table(0.0);
  CHECK(vt_micro_fuel(40.0, 1.0, zero) == doctest::Approx(1.0));
  const auto half = constant_table(std::log(0.5));
  for (double v : {0.0, 30.0, 120.0})
    for (double a : {-5.0, 0.0, 5.0}) CHECK(vt_micro_fuel(v, a, half) == doctest::Approx(0.5));
}

TEST_CASE("shipped table against direct evaluation") {
  const auto t = VtMicroTable::light_duty();
  for (double v : {0.0, 15.0, 45.0, 90.0, 124.0})
    for (double a : {-6.0, -1.0, 0.0, 1.5, 3.0, 8.0})
      CHECK(vt_micro_fuel(v, a, t) == doctest::Approx(fuel_oracle(v, a, t)).epsilon(1e-12));
  for (double v : {20.0, 45.0, 80.0}) CHECK(vt_micro_fuel(v, 3.0, t) > vt_micro_fuel(v, 0.0, t));
}

TEST_CASE("inputs are clamped before evaluation") {
  const auto t = VtMicroTable::light_duty();
  CHECK(vt_micro_fuel(200.0, 0.0, t) == vt_micro_fuel(124.0, 0.0, t));
  CHECK(vt_micro_fuel(40.0, 50.0, t) == vt_micro_fuel(40.0, 13.0, t));
  CHECK(vt_micro_fuel(-3.0, 0.0, t) == vt_micro_fuel(0.0, 0.0, t));
  CHECK(vt_micro_fuel(0.0, 0.0, t) > 0.0);
}

TEST_CASE("table JSON round trip and malformed input") {
  const auto t = VtMicroTable::light_duty();
  CHECK(VtMicroTable::from_json(t.to_json()) == t);

  auto j = t.to_json();
  j.erase("K_neg");
  CHECK_THROWS_AS(VtMicroTable::from_json(j), ConfigError);
  j = t.to_json();
  j["speed_unit"] = "furlong/fortnight";
  CHECK_THROWS_AS(VtMicroTable::from_json(j), ConfigError);
  j = t.to_json();
  j["K_pos"][0] = nlohmann::json::array({1, 2});
  CHECK_THROWS_AS(VtMicroTable::from_json(j), ConfigError);
  CHECK_THROWS_AS(VtMicroTable::load("/nonexistent/table.json"), ConfigError);
}
