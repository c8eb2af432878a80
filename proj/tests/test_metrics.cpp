#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "platoon/errors.hpp"
#include "platoon/metrics.hpp"

using namespace platoon;

namespace {

// Leader accelerations follow a sine; follower i applies scale[i] times them.
TrajectoryLog scaled_log(const std::vector<double>& scale, int steps = 100) {
  TrajectoryLog log;
  for (int t = 0; t <= steps; ++t) log.times.push_back(0.1 * t);
  for (std::size_t i = 0; i < scale.size() + 1; ++i) {
    VehicleTrace v;
    v.id = static_cast<int>(i);
    v.role = i == 0 ? VehicleRole::Leader : VehicleRole::Cav;
    const double c = i == 0 ? 1.0 : scale[i - 1];
    VehicleState s{-71.0 * static_cast<double>(i), 50.0, 0.0};
    v.states.push_back(s);
    for (int t = 1; t <= steps; ++t) {
      s.accel = c * 2.0 * std::sin(0.2 * t);
      s.speed += 0.1 * s.accel;
      s.position += 0.1 * s.speed;
      v.states.push_back(s);
    }
    log.vehicles.push_back(std::move(v));
  }
  return log;
}

PlatoonReport report_of(const TrajectoryLog& log) {
  return per_vehicle_report(log, RewardWeights{}, VehicleParams{}, VtMicroTable::light_duty());
}

PlatoonReport with_ratios(const std::vector<double>& ratios) {
  PlatoonReport r;
  r.vehicles.push_back({0, VehicleRole::Leader, 1.0});
  for (std::size_t i = 0; i < ratios.size(); ++i)
    r.vehicles.push_back({static_cast<int>(i + 1), VehicleRole::Cav, ratios[i]});
  return r;
}

}  // namespace

TEST_CASE("identical follower") {
  const auto r = report_of(scaled_log({1.0}));
  REQUIRE(r.vehicles.size() == 2);
  CHECK(*r.vehicles[0].dampening_ratio == doctest::Approx(1.0));
  CHECK(*r.vehicles[1].dampening_ratio == doctest::Approx(1.0));
  CHECK(r.vehicles[1].comfort_cost == doctest::Approx(r.vehicles[0].comfort_cost));
  CHECK(r.vehicles[1].fuel == doctest::Approx(r.vehicles[0].fuel));
  CHECK_FALSE(r.vehicles[0].efficiency_cost.has_value());
}

TEST_CASE("scaled follower") {
  const auto r = report_of(scaled_log({0.4, -2.0}));
  CHECK(*r.vehicles[1].dampening_ratio == doctest::Approx(0.4));
  CHECK(r.vehicles[1].comfort_cost == doctest::Approx(0.16 * r.vehicles[0].comfort_cost));
  CHECK(*r.vehicles[2].dampening_ratio == doctest::Approx(2.0));
  CHECK(r.vehicles[2].comfort_cost == doctest::Approx(4.0 * r.vehicles[0].comfort_cost));
}

TEST_CASE("quiescent leader leaves ratios undefined") {
  auto log = scaled_log({1.0});
  for (auto& v : log.vehicles)
    for (auto& s : v.states) s.accel = 0.0;
  const auto r = report_of(log);
  CHECK_FALSE(r.vehicles[1].dampening_ratio.has_value());
  CHECK_THROWS_AS(head_to_tail_stability(r), InvalidInput);
}

TEST_CASE("improvement percentages") {
  PlatoonReport base, now;
  base.average_speed = 40.0;
  base.average_fuel = 1.0;
  now.average_speed = 41.6;
  now.average_fuel = 0.92;
  const auto imp = improvement_vs_baseline(now, base);
  CHECK(*imp.travel == doctest::Approx(4.0));
  CHECK(*imp.energy == doctest::Approx(8.0));
  const auto same = improvement_vs_baseline(base, base);
  CHECK(*same.travel == 0.0);
  CHECK(*same.energy == 0.0);
  PlatoonReport zero;
  CHECK_FALSE(improvement_vs_baseline(now, zero).travel.has_value());
}

TEST_CASE("head-to-tail stability") {
  const auto ok = head_to_tail_stability(with_ratios({0.8, 0.6, 0.5}));
  CHECK(ok.stable);
  CHECK(ok.margin == doctest::Approx(0.2));
  CHECK_FALSE(head_to_tail_stability(with_ratios({1.2, 0.5})).stable);
  CHECK(head_to_tail_stability(with_ratios({})).stable);
}

TEST_CASE("trajectory log CSV round trip") {
  const auto log = scaled_log({0.4, 0.7}, 20);
  const auto path = std::filesystem::temp_directory_path() / "platoon_metrics_log.csv";
  write_trajectory_log_csv(path, log);
  const auto back = read_trajectory_log_csv(path, TopologyVector({1, 0, 0}));
  REQUIRE(back.vehicles.size() == 3);
  CHECK(back.vehicles[1].role == VehicleRole::Cav);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t t = 0; t < log.times.size(); ++t)
      CHECK(back.vehicles[i].states[t] == log.vehicles[i].states[t]);
  CHECK(report_to_csv(report_of(back)) == report_to_csv(report_of(log)));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_trajectory_log_csv(path), ConfigError);
}

TEST_CASE("reports are pure") {
  const auto log = scaled_log({0.5, 0.9});
  CHECK(report_to_json(report_of(log)) == report_to_json(report_of(log)));
}
