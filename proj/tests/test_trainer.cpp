#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "platoon/driver_models.hpp"
#include "platoon/errors.hpp"
#include "platoon/seeding.hpp"
#include "platoon/trainer.hpp"

#include <nlohmann/json.hpp>

using namespace platoon;

namespace {

LeaderTrajectory leader(int episode, int worker) {
  return synth_stop_and_go({21.8, 40.0 + episode, 1, 15.0, false,
                            static_cast<std::uint64_t>(7 + 3 * worker)});
}

TrainerConfig small_config(int workers) {
  TrainerConfig c;
  c.workers = workers;
  c.episodes_m1 = 6;
  c.episodes_other = 4;
  c.guided_episodes = 2;
  c.undertrained_episodes = 3;
  c.batch_size = 256;
  c.minibatch_size = 64;
  c.epochs = 2;
  c.seed = 17;
  return c;
}

TrainingSetup setup() {
  TrainingSetup s;
  s.leaders = leader;
  return s;
}

}  // namespace

TEST_CASE("worker_rollout returns exactly the requested steps") {
  EpisodeConfig ec;
  ec.leader = leader(0, 0);
  ec.horizon = 218;
  RolloutWorker w(0, ModuleEnv(1, ec), 3);
  const auto snap = std::make_shared<const PolicyParameters>(PolicyParameters::initialized(1, 3));
  const auto ts = worker_rollout(w, snap, 218);
  CHECK(ts.size() == 218);
  for (const auto& t : ts) {
    CHECK(t.version == snap->version);
    CHECK_FALSE(t.guided);
  }

  // Steps beyond one episode auto-reset and continue.
  const auto more = worker_rollout(w, snap, 300);
  CHECK(more.size() == 300);
  int dones = 0;
  for (const auto& t : more) dones += t.done;
  CHECK(dones >= 1);
}

TEST_CASE("rollouts are deterministic per seed and snapshot") {
  EpisodeConfig ec;
  ec.leader = leader(0, 0);
  const auto snap = std::make_shared<const PolicyParameters>(PolicyParameters::initialized(2, 5));
  RolloutWorker a(0, ModuleEnv(2, ec), 9), b(0, ModuleEnv(2, ec), 9);
  const auto ra = worker_rollout(a, snap, 150);
  const auto rb = worker_rollout(b, snap, 150);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].action == rb[i].action);
    CHECK(ra[i].reward == rb[i].reward);
  }
}

TEST_CASE("serial and parallel episode runners agree") {
  EpisodeConfig ec;
  ec.leader = leader(0, 0);
  const auto snap = std::make_shared<const PolicyParameters>(PolicyParameters::initialized(2, 5));
  std::vector<RolloutWorker> w1, w2;
  std::vector<LeaderTrajectory> leaders;
  for (int w = 0; w < 3; ++w) {
    w1.emplace_back(w, ModuleEnv(2, ec), 100 + w);
    w2.emplace_back(w, ModuleEnv(2, ec), 100 + w);
    leaders.push_back(leader(1, w));
  }
  const auto s = run_episodes_serial(w1, snap, leaders, nullptr);
  const auto p = run_episodes_parallel(w2, snap, leaders, nullptr);
  for (std::size_t w = 0; w < 3; ++w) CHECK(s[w].episode_return == p[w].episode_return);
}

TEST_CASE("snapshot versions must increase") {
  SnapshotStore store(PolicyParameters::initialized(1, 1));
  auto next = *store.current();
  CHECK_THROWS_AS(store.publish(next), InvalidInput);
  next.version = 1;
  store.publish(next);
  CHECK(store.current()->version == 1);
}

TEST_CASE("zero episodes returns the initial parameters") {
  auto cfg = small_config(1);
  cfg.episodes_m1 = 0;
  const auto r = train_module(1, cfg, setup());
  CHECK(r.history.empty());
  CHECK(r.params == PolicyParameters::initialized(1, mix_seed(cfg.seed, 1, 0), cfg.policy));
}

TEST_CASE("single-worker training is reproducible") {
  const auto cfg = small_config(1);
  const auto a = train_module(1, cfg, setup());
  const auto b = train_module(1, cfg, setup());
  REQUIRE(a.history.size() == 6);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].raw_reward == b.history[i].raw_reward);
    CHECK(training_log_line(a.history[i]) == training_log_line(b.history[i]));
  }
  CHECK(a.params == b.params);
  CHECK(a.updates > 0);
  REQUIRE(a.undertrained.has_value());
  CHECK(a.undertrained->version <= a.params.version);

  auto serial = cfg;
  serial.parallel_kernels = false;
  CHECK(train_module(1, serial, setup()).params == a.params);
}

TEST_CASE("guided episodes need a single-CAV guide") {
  const auto cfg = small_config(2);
  CHECK_THROWS_AS(train_module(2, cfg, setup()), ConfigError);

  auto s = setup();
  s.guide = PolicyParameters::initialized(2, 1);
  CHECK_THROWS_AS(train_module(2, cfg, s), ConfigError);

  s.guide = train_module(1, cfg, setup()).undertrained;
  const auto r = train_module(2, cfg, s);
  REQUIRE(r.history.size() == 4);
  CHECK(r.history[0].guided);
  CHECK(r.history[1].guided);
  CHECK_FALSE(r.history[2].guided);

  EpisodeConfig ec;
  ec.leader = leader(0, 0);
  RolloutWorker w(0, ModuleEnv(2, ec), 4);
  const auto snap = std::make_shared<const PolicyParameters>(PolicyParameters::initialized(2, 5));
  for (const auto& t : worker_rollout(w, snap, 20, &*s.guide)) {
    CHECK(t.guided);
    CHECK(t.log_prob == doctest::Approx(policy_log_prob(*snap, t.obs, Eigen::Map<const Eigen::VectorXd>(t.action.data(), 2))));
  }
}

TEST_CASE("training log line") {
  EpisodeRecord r;
  r.episode = 3;
  r.raw_reward = 1.5;
  r.smoothed_reward = 1.25;
  r.collisions = 1;
  const auto j = nlohmann::json::parse(training_log_line(r));
  CHECK(j["episode"] == 3);
  CHECK(j["smoothed_reward"] == 1.25);
  CHECK(j["mean_dampening_ratio"].is_null());
}
