// Serial reference vs OpenMP kernels: PPO minibatch gradient and one round
// of worker episodes. Thread count follows OMP_NUM_THREADS.

#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "platoon/driver_models.hpp"
#include "platoon/kernels.hpp"
#include "platoon/trainer.hpp"

namespace {

using namespace platoon;

struct MinibatchFixture {
  PolicyParameters params;
  std::vector<Transition> transitions;
  std::vector<kernels::MinibatchSample> samples;

  MinibatchFixture(int k, int n) : params(PolicyParameters::initialized(k, 3)) {
    std::mt19937_64 rng(k);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> speed(0.0, 110.0), gap(2.0, 150.0);
    transitions.resize(static_cast<std::size_t>(n));
    for (auto& t : transitions) {
      for (int i = 0; i < k; ++i) {
        t.obs.per_cav.push_back({speed(rng), gap(rng), 5.0 * z(rng), 10.0 * z(rng)});
        t.action.push_back(2.0 * z(rng));
      }
      t.log_prob = z(rng) - 3.0;
    }
    for (const auto& t : transitions) samples.push_back({&t, z(rng), z(rng)});
  }
};

template <bool Parallel>
void BM_MinibatchGradient(benchmark::State& state) {
  const MinibatchFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto r = Parallel ? kernels::minibatch_gradient_parallel(f.params, f.samples, 0.2)
                      : kernels::minibatch_gradient_serial(f.params, f.samples, 0.2);
    benchmark::DoNotOptimize(r.surrogate_sum);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <bool Parallel>
void BM_WorkerEpisodes(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int n_workers = static_cast<int>(state.range(1));
  EpisodeConfig ec;
  ec.leader = synth_stop_and_go({21.8, 40.0, 1, 15.0, false, 7});
  const auto snapshot = std::make_shared<const PolicyParameters>(PolicyParameters::initialized(k, 5));
  std::vector<RolloutWorker> workers;
  std::vector<LeaderTrajectory> leaders;
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back(w, ModuleEnv(k, ec), 100 + static_cast<std::uint64_t>(w));
    leaders.push_back(ec.leader);
  }
  for (auto _ : state) {
    auto out = Parallel ? run_episodes_parallel(workers, snapshot, leaders, nullptr)
                        : run_episodes_serial(workers, snapshot, leaders, nullptr);
    benchmark::DoNotOptimize(out.front().episode_return);
  }
  state.SetItemsProcessed(state.iterations() * n_workers);
}

}  // namespace

BENCHMARK(BM_MinibatchGradient<false>)->Name("minibatch_gradient/serial")->Args({1, 256})->Args({5, 256});
BENCHMARK(BM_MinibatchGradient<true>)->Name("minibatch_gradient/parallel")->Args({1, 256})->Args({5, 256});
BENCHMARK(BM_WorkerEpisodes<false>)->Name("worker_episodes/serial")->Args({1, 4})->Args({5, 4});
BENCHMARK(BM_WorkerEpisodes<true>)->Name("worker_episodes/parallel")->Args({1, 4})->Args({5, 4});

BENCHMARK_MAIN();
