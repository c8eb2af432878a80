#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "platoon/driver_models.hpp"
#include "platoon/errors.hpp"

using namespace platoon;

namespace {

// Closed form of the free-road + interaction terms, written out independently.
double idm_reference(double v, double dv, double s, const IdmParams& p) {
  const double s_star =
      p.min_gap + std::max(0.0, v * p.time_headway - v * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel)));
  return p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.exponent) - (s_star / s) * (s_star / s));
}

}  // namespace

TEST_CASE("IDM matches its closed form") {
  const IdmParams p;
  for (double v : {0.0, 20.0, 55.5, 100.0}) {
    for (double dv : {-10.0, 0.0, 7.0}) {
      for (double s : {3.0, 40.0, 200.0}) {
        CHECK(idm_accel(v, dv, s, p) == doctest::Approx(idm_reference(v, dv, s, p)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("IDM limits") {
  const IdmParams p;
  CHECK(idm_accel(0.0, 0.0, 1e9, p) == doctest::Approx(p.max_accel));
  CHECK(idm_accel(124.0, 0.0, 1e9, p) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(idm_accel(10.0, 0.0, 0.0, p), InvalidInput);
}

TEST_CASE("IDM equilibrium gap is a zero of the acceleration") {
  const IdmParams p;
  for (double f : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double v = f * p.desired_speed;
    CHECK(std::abs(idm_accel(v, 0.0, idm_equilibrium_gap(v, p), p)) < 1e-9);
  }
  CHECK(idm_equilibrium_gap(0.0, p) == doctest::Approx(p.min_gap));
  CHECK_THROWS_AS(idm_equilibrium_gap(p.desired_speed, p), InvalidInput);
}

TEST_CASE("playback interpolates between samples") {
  const LeaderTrajectory t({0.0, 0.1, 0.2}, {10.0, 20.0, 20.0});
  CHECK(playback_speed(t, 0.05) == doctest::Approx(15.0));
  CHECK(playback_speed(t, 0.1) == doctest::Approx(20.0));
  CHECK(playback_speed(t, 0.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(playback_speed(t, 0.3), RangeError);
  CHECK_THROWS_AS(playback_speed(t, -0.01), RangeError);
}

TEST_CASE("trajectory validation") {
  CHECK_THROWS_AS(LeaderTrajectory({0.0, 0.1, 0.3}, {1.0, 1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(LeaderTrajectory({0.0, 0.1}, {1.0, -1.0}), InvalidInput);
  CHECK_THROWS_AS(LeaderTrajectory({0.1, 0.0}, {1.0, 1.0}), InvalidInput);
}

TEST_CASE("synthetic stop-and-go") {
  const StopAndGoSpec spec{21.8, 40.0, 1, 15.0, false, 7};
  const auto t = synth_stop_and_go(spec);
  CHECK(t.size() == 218);
  const auto speeds = t.speeds();
  CHECK(*std::min_element(speeds.begin(), speeds.end()) >= 25.0 - 1e-9);
  CHECK(synth_stop_and_go(spec) == t);

  StopAndGoSpec flat = spec;
  flat.amplitude = 0.0;
  const auto flat_traj = synth_stop_and_go(flat);
  for (double v : flat_traj.speeds()) CHECK(v == doctest::Approx(40.0));

  StopAndGoSpec stop = spec;
  stop.standstill = true;
  const auto stop_traj = synth_stop_and_go(stop);
  const auto s = stop_traj.speeds();
  CHECK(*std::min_element(s.begin(), s.end()) == doctest::Approx(0.0));
}

TEST_CASE("CSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "platoon_leader_roundtrip.csv";
  const auto t = synth_stop_and_go({5.0, 33.3, 2, 10.0, false, 3});
  write_trajectory_csv(path, t);
  const auto back = read_trajectory_csv(path);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.speed(i) == t.speed(i));
    CHECK(back.time(i) == doctest::Approx(t.time(i)));
  }
  std::filesystem::remove(path);
  CHECK_THROWS(read_trajectory_csv(path));
}
