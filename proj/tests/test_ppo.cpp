#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "platoon/driver_models.hpp"
#include "platoon/errors.hpp"
#include "platoon/ppo.hpp"
#include "platoon/trainer.hpp"

using namespace platoon;

namespace {

std::vector<Transition> rollout(const PolicyParameters& p, int steps, std::uint64_t seed) {
  EpisodeConfig ec;
  ec.leader = synth_stop_and_go({21.8, 40.0, 1, 15.0, false, 7});
  RolloutWorker w(0, ModuleEnv(p.module_size, ec), seed);
  return worker_rollout(w, std::make_shared<const PolicyParameters>(p), steps);
}

}  // namespace

TEST_CASE("GAE base cases") {
  const std::vector<double> r{1.0}, v{0.5}, nv{2.0};
  const std::vector<std::uint8_t> d{0};
  const auto one = gae_advantages(r, v, nv, d, 0.9, 0.8);
  CHECK(one.advantages[0] == doctest::Approx(1.0 + 0.9 * 2.0 - 0.5));
  CHECK(one.returns[0] == doctest::Approx(one.advantages[0] + 0.5));

  const std::vector<double> r2{1.0, 2.0}, v2{0.5, 0.25}, nv2{0.25, 3.0};
  const std::vector<std::uint8_t> d2{0, 0};
  const auto two = gae_advantages(r2, v2, nv2, d2, 1.0, 1.0);
  CHECK(two.advantages[0] == doctest::Approx((1.0 + 0.25 - 0.5) + (2.0 + 3.0 - 0.25)));

  CHECK_THROWS_AS(gae_advantages(r2, v, nv2, d2, 1.0, 1.0), InvalidInput);
}

TEST_CASE("GAE equals the truncated sum") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> len(1, 50);
  std::bernoulli_distribution done(0.08);
  for (int n = 0; n < 200; ++n) {
    const auto T = static_cast<std::size_t>(len(rng));
    std::vector<double> r(T), v(T), nv(T);
    std::vector<std::uint8_t> d(T);
    for (std::size_t t = 0; t < T; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
      nv[t] = u(rng);
      d[t] = done(rng);
    }
    for (double g : {0.5, 0.95, 1.0}) {
      for (double l : {0.5, 0.95, 1.0}) {
        const auto got = gae_advantages(r, v, nv, d, g, l).advantages;
        const auto want = oracle::gae_brute_force(r, v, nv, d, g, l);
        for (std::size_t t = 0; t < T; ++t) REQUIRE(std::abs(got[t] - want[t]) < 1e-10);
      }
    }
  }
}

TEST_CASE("clipped surrogate") {
  CHECK(clipped_surrogate(1.0, 3.0, 0.2) == doctest::Approx(3.0));
  CHECK(clipped_surrogate(1.5, 2.0, 0.2) == doctest::Approx(2.4));
  CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
  for (double r : {0.5, 0.8, 1.0, 1.2, 1.5})
    for (double a : {-2.0, -1.0, 1.0, 2.0})
      for (double e : {0.1, 0.2}) {
        CHECK(clipped_surrogate(r, a, e) == doctest::Approx(oracle::surrogate_reference(r, a, e)));
        const double h = 1e-6;
        const double fd =
            (clipped_surrogate(r + h, a, e) - clipped_surrogate(r - h, a, e)) / (2.0 * h);
        const bool outward = (a > 0.0 && r > 1.0 + e) || (a < 0.0 && r < 1.0 - e);
        if (outward) {
          CHECK(fd == 0.0);
          CHECK(clipped_surrogate_slope(r, a, e) == 0.0);
        }
      }
}

TEST_CASE("critic loss") {
  const std::vector<double> t{1.0, -2.0, 3.5};
  CHECK(critic_loss(t, t) == 0.0);
  const std::vector<double> off{1.5, -1.5, 4.0};
  CHECK(critic_loss(off, t) == doctest::Approx(0.25));
}

TEST_CASE("moving average") {
  const std::vector<double> h{10.0, 20.0};
  CHECK(moving_average_reward(h)[1] == doctest::Approx(11.0));
  const std::vector<double> c(5, 3.0);
  for (double s : moving_average_reward(c)) CHECK(s == 3.0);
  const std::vector<double> mixed{1.0, 5.0, -2.0, 4.0};
  for (double s : moving_average_reward(mixed)) {
    CHECK(s >= -2.0);
    CHECK(s <= 5.0);
  }
  CHECK_THROWS_AS(moving_average_reward(std::vector<double>{}), InvalidInput);
}

TEST_CASE("zero learning rates keep parameters and bump the version") {
  TrainerConfig cfg;
  cfg.actor_lr = 0.0;
  cfg.critic_lr = 0.0;
  cfg.batch_size = cfg.minibatch_size = 64;
  cfg.epochs = 2;
  const auto p = PolicyParameters::initialized(2, 3);
  PpoLearner learner(p, cfg);
  std::mt19937_64 rng(3);
  learner.update(rollout(p, 64, 3), rng);
  CHECK(learner.params().actor == p.actor);
  CHECK(learner.params().critic == p.critic);
  CHECK(learner.params().log_std == p.log_std);
  CHECK(learner.params().version == p.version + 1);
}

TEST_CASE("on-policy first minibatch has unit ratios") {
  TrainerConfig cfg;
  cfg.batch_size = cfg.minibatch_size = 128;
  cfg.epochs = 1;
  cfg.normalize_advantages = false;
  const auto p = PolicyParameters::initialized(1, 4);
  const auto batch = rollout(p, 128, 4);
  PpoLearner learner(p, cfg);
  std::mt19937_64 rng(4);
  const auto stats = learner.update(batch, rng);
  CHECK(stats.first_epoch_mean_ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto adv = gae_advantages(batch, cfg.gamma, cfg.lambda).advantages;
  double mean = 0.0;
  for (double a : adv) mean += a / adv.size();
  CHECK(stats.first_epoch_surrogate == doctest::Approx(mean).epsilon(1e-10));
  CHECK(stats.clip_fraction == 0.0);
}

TEST_CASE("positive advantages raise the taken action's log-prob") {
  TrainerConfig cfg;
  cfg.batch_size = cfg.minibatch_size = 32;
  cfg.epochs = 3;
  cfg.normalize_advantages = false;
  const auto p = PolicyParameters::initialized(2, 5);
  std::mt19937_64 rng(5);
  const auto obs = oracle::random_observation(2, rng);
  Eigen::VectorXd action(2);
  action << 1.5, -0.7;
  Transition t;
  t.obs = obs;
  t.action = {1.5, -0.7};
  t.reward = 1.0;
  t.done = true;
  t.log_prob = policy_log_prob(p, obs, action);
  const std::vector<Transition> batch(32, t);
  PpoLearner learner(p, cfg);
  learner.update(batch, rng);
  CHECK(policy_log_prob(learner.params(), obs, action) >= t.log_prob);
}

TEST_CASE("undersized batches and non-finite data are rejected") {
  TrainerConfig cfg;
  cfg.batch_size = cfg.minibatch_size = 64;
  const auto p = PolicyParameters::initialized(1, 6);
  PpoLearner learner(p, cfg);
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(learner.update(rollout(p, 10, 6), rng), InvalidInput);
  auto bad = rollout(p, 64, 6);
  bad[3].reward = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(learner.update(bad, rng), NumericError);
}

TEST_CASE("adam step") {
  Adam opt(2, 0.1);
  std::vector<double> x{1.0, -1.0};
  const std::vector<double> g{2.0, -0.5};
  opt.descend(x, g);
  // First bias-corrected step has magnitude lr in each coordinate.
  CHECK(x[0] == doctest::Approx(0.9));
  CHECK(x[1] == doctest::Approx(-0.9));
}

TEST_CASE("imitation pulls the mean toward guided actions only") {
  TrainerConfig c;
  c.minibatch_size = 64;
  c.epochs = 20;
  const auto p = PolicyParameters::initialized(2, 4);
  auto batch = rollout(p, 256, 8);
  for (auto& t : batch) {
    t.action = {1.5, -1.0};
    t.guided = true;
  }
  auto mse = [&](const PolicyParameters& q) {
    double s = 0.0;
    for (const auto& t : batch) {
      const auto m = actor_forward(q, t.obs).means;
      s += 0.5 * ((m[0] - 1.5) * (m[0] - 1.5) + (m[1] + 1.0) * (m[1] + 1.0));
    }
    return s / static_cast<double>(batch.size());
  };

  PpoLearner learner(p, c);
  std::mt19937_64 rng(3);
  const double before = learner.imitate(batch, rng);
  CHECK(before == doctest::Approx(mse(p)).epsilon(1e-6));
  CHECK(mse(learner.params()) < 0.1 * before);
  CHECK(learner.params().log_std == p.log_std);
  CHECK(learner.params().version == p.version + 1);

  for (auto& t : batch) t.guided = false;
  PpoLearner untouched(p, c);
  CHECK(untouched.imitate(batch, rng) == 0.0);
  CHECK(untouched.params().actor.parameters()[0] == p.actor.parameters()[0]);

  c.imitation_weight = 0.0;
  for (auto& t : batch) t.guided = true;
  PpoLearner off(p, c);
  CHECK(off.imitate(batch, rng) == 0.0);
  c.imitation_weight = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}
