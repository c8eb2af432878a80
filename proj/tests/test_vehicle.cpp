#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "platoon/errors.hpp"
#include "platoon/vehicle.hpp"

using namespace platoon;

TEST_CASE("semi-implicit step") {
  const VehicleParams p;
  const auto s = step_kinematics({0.0, 10.0, 0.0}, 2.0, 0.1, p);
  CHECK(s.speed == doctest::Approx(10.2));
  CHECK(s.position == doctest::Approx(1.02));
  CHECK(s.accel == doctest::Approx(2.0));
}

TEST_CASE("command above the bound is clamped") {
  const VehicleParams p;
  const auto s = step_kinematics({0.0, 10.0, 0.0}, 20.0, 0.1, p);
  CHECK(s.speed == doctest::Approx(11.3));
  CHECK(s.accel == doctest::Approx(13.0));
  CHECK(clamp_accel(-40.0, p) == -13.0);
}

TEST_CASE("speed floors at zero; effective accel reflects the floor") {
  const VehicleParams p;
  const auto s = step_kinematics({5.0, 0.5, 0.0}, -13.0, 0.1, p);
  CHECK(s.speed == 0.0);
  CHECK(s.position == 5.0);
  CHECK(s.accel == doctest::Approx(-5.0));
}

TEST_CASE("spacing and gap") {
  const VehicleParams p;
  const auto sg = spacing_and_gap({171.0, 0, 0}, {100.0, 0, 0}, p);
  CHECK(sg.spacing == doctest::Approx(71.0));
  CHECK(sg.gap == doctest::Approx(56.0));
  // Overlap is reported, not raised.
  const auto bump = spacing_and_gap({110.0, 0, 0}, {100.0, 0, 0}, p);
  CHECK(bump.gap == doctest::Approx(-5.0));
  CHECK(spacing_and_gap({115.0, 0, 0}, {100.0, 0, 0}, p).gap == doctest::Approx(0.0));
}

TEST_CASE("equilibrium spacing") {
  const VehicleParams p;
  CHECK(equilibrium_spacing(50.0, p) == doctest::Approx(71.0));
  CHECK(equilibrium_spacing(0.0, p) == doctest::Approx(21.0));
  CHECK(equilibrium_spacing(124.0, p) == doctest::Approx(145.0));
}

TEST_CASE("bad parameters are rejected") {
  VehicleParams p;
  p.accel_min = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  CHECK_THROWS_AS(step_kinematics({}, 0.0, 0.0, VehicleParams{}), InvalidInput);
}
