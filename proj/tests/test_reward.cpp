#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "platoon/errors.hpp"
#include "platoon/reward.hpp"

using namespace platoon;

TEST_CASE("efficiency cost") {
  const RewardWeights w;
  CHECK(efficiency_cost(0.0, 0.0, w) == 0.0);
  CHECK(efficiency_cost(2.0, -1.0, w) == doctest::Approx(4.5));
  CHECK(efficiency_cost(4.0, -2.0, w) == doctest::Approx(4.0 * 4.5));
}

TEST_CASE("running cost") {
  CHECK(running_cost(4.5, 2.0, 0.5) == doctest::Approx(6.5));
  CHECK(running_cost(0.0, 0.0, 0.5) == 0.0);
  CHECK(running_cost(0.0, 4.0, 0.5) == doctest::Approx(8.0));
}

TEST_CASE("penalties") {
  const RewardWeights w;
  CavRewardContext c{60.0, 30.0, 0.0, 0.0, 0.0, std::nullopt};
  CHECK(penalty_reward(c, w) == doctest::Approx(-0.05));
  c = {130.0, 1000.0, 0.0, 0.0, 0.0, std::nullopt};
  CHECK(penalty_reward(c, w) == doctest::Approx(-0.05));
  c = {50.0, 56.0, 0.0, 0.0, 0.0, 1.2};
  CHECK(penalty_reward(c, w) == doctest::Approx(-0.1));
  c.window_dampening_ratio = 0.9;
  CHECK(penalty_reward(c, w) == 0.0);
  c = {130.0, 10.0, 0.0, 0.0, 0.0, 1.5};
  CHECK(penalty_reward(c, w) == doctest::Approx(-0.2));
  // Stopped with room ahead: no gap penalty.
  c = {0.0, 6.0, 0.0, 0.0, 0.0, std::nullopt};
  CHECK(penalty_reward(c, w) == 0.0);
}

TEST_CASE("immediate reward") {
  RewardWeights w;
  w.energy = 0.0;
  const VehicleParams p;
  const auto table = VtMicroTable::light_duty();
  const CavRewardContext eq{50.0, 56.0, 0.0, 0.0, 0.0, std::nullopt};
  CHECK(immediate_reward(eq, w, table, p).original == doctest::Approx(1.0));

  const CavRewardContext c{50.0, 56.0, -1.0, 2.0, 2.0, std::nullopt};
  const auto r = immediate_reward(c, w, table, p);
  CHECK(r.running_cost == doctest::Approx(6.5));
  CHECK(r.original == doctest::Approx(std::exp(-6.5)));
  CHECK(r.total == doctest::Approx(r.original + r.penalty));
}

TEST_CASE("dampening ratio") {
  const std::vector<double> lead{1.0, -2.0, 0.5, 3.0};
  std::vector<double> half;
  for (double a : lead) half.push_back(0.5 * a);
  CHECK(*dampening_ratio(lead, lead) == doctest::Approx(1.0));
  CHECK(*dampening_ratio(half, lead) == doctest::Approx(0.5));
  const std::vector<double> zeros(4, 0.0);
  CHECK_FALSE(dampening_ratio(lead, zeros).has_value());
  CHECK_THROWS_AS(dampening_ratio(std::vector<double>{1.0}, lead), InvalidInput);
}
