#include "platoon/trainer.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "platoon/errors.hpp"
#include "platoon/seeding.hpp"

namespace platoon {

namespace {

Eigen::VectorXd behavior_action(RolloutWorker& worker, const PolicyParameters& policy,
                                const PolicyParameters* guide) {
  if (!guide) return sample_action(actor_forward(policy, worker.obs), worker.rng);
  Eigen::VectorXd a(static_cast<Eigen::Index>(worker.obs.size()));
  for (std::size_t i = 0; i < worker.obs.size(); ++i) {
    ModuleObservation single{{worker.obs.per_cav[i]}};
    a[static_cast<Eigen::Index>(i)] = sample_action(actor_forward(*guide, single), worker.rng)[0];
  }
  return a;
}

Transition step_worker(RolloutWorker& worker, const PolicyParameters& policy,
                       const PolicyParameters* guide, StepResult* result_out) {
  const Eigen::VectorXd action = behavior_action(worker, policy, guide);
  Transition t;
  t.obs = worker.obs;
  t.action.assign(action.data(), action.data() + action.size());
  t.log_prob = policy_log_prob(policy, worker.obs, action);
  t.value = critic_forward(policy, worker.obs);
  t.version = policy.version;
  t.guided = guide != nullptr;

  StepResult r = worker.env.step(to_module_action(action));
  t.reward = r.reward;
  t.done = r.done;
  t.truncated = r.done && !r.info.collision;
  t.next_value = r.info.collision ? 0.0 : critic_forward(policy, r.observation);
  worker.obs = r.observation;
  worker.needs_reset = r.done;
  if (result_out) *result_out = std::move(r);
  return t;
}

}  // namespace

SnapshotStore::SnapshotStore(PolicyParameters initial)
    : current_(std::make_shared<const PolicyParameters>(std::move(initial))) {}

PolicySnapshot SnapshotStore::current() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void SnapshotStore::publish(PolicyParameters next) {
  auto snap = std::make_shared<const PolicyParameters>(std::move(next));
  std::lock_guard lock(mutex_);
  if (snap->version <= current_->version) {
    throw InvalidInput("snapshot versions must strictly increase");
  }
  current_ = std::move(snap);
}

RolloutWorker::RolloutWorker(int id_, ModuleEnv env_, std::uint64_t seed)
    : id(id_), env(std::move(env_)), rng(seed) {}

std::vector<Transition> worker_rollout(RolloutWorker& worker, const PolicySnapshot& snapshot,
                                       int steps, const PolicyParameters* guide) {
  if (!snapshot) throw InvalidInput("worker_rollout: no policy snapshot");
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int s = 0; s < steps; ++s) {
    if (worker.needs_reset) {
      worker.obs = worker.env.reset();
      worker.needs_reset = false;
    }
    out.push_back(step_worker(worker, *snapshot, guide, nullptr));
  }
  return out;
}

EpisodeRollout run_episode(RolloutWorker& worker, const PolicySnapshot& snapshot,
                           LeaderTrajectory leader, const PolicyParameters* guide) {
  if (!snapshot) throw InvalidInput("run_episode: no policy snapshot");
  EpisodeRollout out;
  worker.obs = worker.env.reset(std::move(leader));
  worker.needs_reset = false;
  out.transitions.reserve(static_cast<std::size_t>(worker.env.config().horizon));
  StepResult r;
  while (!worker.env.done()) {
    out.transitions.push_back(step_worker(worker, *snapshot, guide, &r));
    out.episode_return += r.reward;
    if (r.info.collision) out.collision = true;
  }
  out.dampening_ratios = worker.env.episode_dampening_ratios();
  return out;
}

std::vector<EpisodeRollout> run_episodes_serial(std::span<RolloutWorker> workers,
                                                const PolicySnapshot& snapshot,
                                                std::span<const LeaderTrajectory> leaders,
                                                const PolicyParameters* guide) {
  if (leaders.size() != workers.size()) throw InvalidInput("one leader per worker required");
  std::vector<EpisodeRollout> out(workers.size());
  for (std::size_t w = 0; w < workers.size(); ++w) {
    out[w] = run_episode(workers[w], snapshot, leaders[w], guide);
  }
  return out;
}

std::vector<EpisodeRollout> run_episodes_parallel(std::span<RolloutWorker> workers,
                                                  const PolicySnapshot& snapshot,
                                                  std::span<const LeaderTrajectory> leaders,
                                                  const PolicyParameters* guide) {
  if (leaders.size() != workers.size()) throw InvalidInput("one leader per worker required");
  std::vector<EpisodeRollout> out(workers.size());
  const auto n = static_cast<int>(workers.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static, 1)
  for (int w = 0; w < n; ++w) {
    try {
      const auto i = static_cast<std::size_t>(w);
      out[i] = run_episode(workers[i], snapshot, leaders[i], guide);
    } catch (...) {
#pragma omp critical(platoon_rollout_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

TrainingResult train_module(int k, const TrainerConfig& config, const TrainingSetup& setup) {
  config.validate();
  if (k < 1) throw InvalidInput("train_module: module size must be >= 1");
  if (!setup.leaders) throw ConfigError("train_module: no leader trajectory source");
  const int episodes = config.episodes_for(k);
  const bool needs_guide = k >= 2 && config.guided_episodes > 0 && episodes > 0;
  if (needs_guide && !setup.guide) {
    throw ConfigError("train_module: module " + std::to_string(k) +
                      " needs an undertrained single-CAV checkpoint for guided episodes");
  }
  if (setup.guide && setup.guide->module_size != 1) {
    throw ConfigError("train_module: guide policy must control a single CAV");
  }

  TrainingResult result;
  result.params = PolicyParameters::initialized(k, mix_seed(config.seed, k, 0), config.policy);
  if (episodes == 0) return result;

  EpisodeConfig ec = setup.episode;
  ec.horizon = config.horizon;
  ec.leader = setup.leaders(0, 0);

  std::vector<RolloutWorker> workers;
  workers.reserve(static_cast<std::size_t>(config.workers));
  for (int w = 0; w < config.workers; ++w) {
    workers.emplace_back(w, ModuleEnv(k, ec), mix_seed(config.seed, k, 1000 + w));
  }

  PpoLearner learner(result.params, config);
  SnapshotStore store(result.params);
  std::mt19937_64 learner_rng(mix_seed(config.seed, k, 77));
  std::vector<Transition> buffer;
  buffer.reserve(static_cast<std::size_t>(config.batch_size + config.workers * config.horizon));
  std::vector<LeaderTrajectory> leaders(workers.size());
  const int undertrained_at = std::min(config.undertrained_episodes, episodes);

  double smoothed = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    for (std::size_t w = 0; w < workers.size(); ++w) leaders[w] = setup.leaders(ep, static_cast<int>(w));
    const bool guided = needs_guide && ep < config.guided_episodes;
    const PolicyParameters* guide = guided ? &*setup.guide : nullptr;
    auto rollouts = config.parallel_kernels
                        ? run_episodes_parallel(workers, store.current(), leaders, guide)
                        : run_episodes_serial(workers, store.current(), leaders, guide);

    EpisodeRecord rec;
    rec.episode = ep + 1;
    rec.guided = guided;
    double ratio_sum = 0.0;
    int ratio_count = 0;
    for (auto& r : rollouts) {
      rec.raw_reward += r.episode_return;
      if (r.collision) ++rec.collisions;
      for (const auto& d : r.dampening_ratios) {
        if (d) {
          ratio_sum += *d;
          ++ratio_count;
        }
      }
      buffer.insert(buffer.end(), std::make_move_iterator(r.transitions.begin()),
                    std::make_move_iterator(r.transitions.end()));
    }
    rec.raw_reward /= static_cast<double>(rollouts.size());
    if (ratio_count > 0) rec.mean_dampening_ratio = ratio_sum / ratio_count;
    smoothed = ep == 0 ? rec.raw_reward : 0.9 * smoothed + 0.1 * rec.raw_reward;
    rec.smoothed_reward = smoothed;

    std::optional<UpdateStats> stats;
    if (buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
      stats = learner.update(buffer, learner_rng);
      learner.imitate(buffer, learner_rng);
      store.publish(learner.params());
      buffer.clear();
      ++result.updates;
    }
    if (k == 1 && ep + 1 == undertrained_at) result.undertrained = *store.current();

    result.history.push_back(rec);
    if (setup.on_episode) setup.on_episode(rec, stats ? &*stats : nullptr);
  }
  result.params = learner.params();
  return result;
}

std::string training_log_line(const EpisodeRecord& r) {
  nlohmann::json j;
  j["episode"] = r.episode;
  j["raw_reward"] = r.raw_reward;
  j["smoothed_reward"] = r.smoothed_reward;
  j["collisions"] = r.collisions;
  j["mean_dampening_ratio"] =
      r.mean_dampening_ratio ? nlohmann::json(*r.mean_dampening_ratio) : nlohmann::json(nullptr);
  j["guided"] = r.guided;
  return j.dump();
}

}  // namespace platoon
