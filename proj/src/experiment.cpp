#include "platoon/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "platoon/errors.hpp"
#include "platoon/seeding.hpp"
#include "platoon/text_io.hpp"

namespace platoon {

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int k) {
  return dir / ("m" + std::to_string(k) + ".json");
}

std::filesystem::path undertrained_checkpoint_path(const std::filesystem::path& dir) {
  return dir / "m1_undertrained.json";
}

bool PolicyBank::has(int k) const {
  return k >= 1 && k <= static_cast<int>(modules.size()) && modules[static_cast<std::size_t>(k - 1)];
}

const PolicyParameters& PolicyBank::at(int k) const {
  if (!has(k)) throw ConfigError("no checkpoint loaded for module size " + std::to_string(k));
  return *modules[static_cast<std::size_t>(k - 1)];
}

PolicyBank PolicyBank::load(const std::filesystem::path& dir) {
  PolicyBank bank;
  for (int k = 1; k <= static_cast<int>(bank.modules.size()); ++k) {
    const auto path = checkpoint_path(dir, k);
    if (!std::filesystem::exists(path)) continue;
    auto p = load_checkpoint(path);
    if (p.module_size != k) {
      throw ConfigError(path.string() + " holds a module of size " + std::to_string(p.module_size));
    }
    bank.modules[static_cast<std::size_t>(k - 1)] = std::move(p);
  }
  return bank;
}

SimulationResult run_simulation(const SimulationInput& in, const PolicyBank& bank) {
  if (in.leader.size() < 2) throw InvalidInput("run_simulation: leader needs at least two samples");
  in.vehicle.validate();
  in.idm.validate();
  const auto& topo = in.topology;
  const auto& vp = in.vehicle;
  const std::size_t n = topo.size();

  SimulationResult out;
  out.modules = decompose(topo, in.max_module_size);
  for (const auto& m : out.modules) bank.at(m.module_size);

  const double v0 = in.leader.speed(0);
  if (n > 1 && std::any_of(topo.kinds().begin() + 1, topo.kinds().end(),
                           [](VehicleKind k) { return k == VehicleKind::Hdv; })) {
    if (!(v0 < in.idm.desired_speed)) {
      throw InvalidInput("run_simulation: leader starts at or above the IDM desired speed");
    }
  }
  std::vector<VehicleState> states(n);
  states[0].speed = v0;
  for (std::size_t i = 1; i < n; ++i) {
    const double spacing = topo.is_cav(i) ? equilibrium_spacing(v0, vp)
                                          : idm_equilibrium_gap(v0, in.idm) + vp.length;
    states[i].position = states[i - 1].position - spacing;
    states[i].speed = v0;
  }

  const std::size_t steps = in.leader.size() - 1;
  out.log.times.reserve(steps + 1);
  out.log.vehicles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& tr = out.log.vehicles[i];
    tr.id = static_cast<int>(i);
    tr.role = i == 0 ? VehicleRole::Leader : topo.is_cav(i) ? VehicleRole::Cav : VehicleRole::Hdv;
    tr.states.reserve(steps + 1);
  }
  auto record = [&](double t) {
    out.log.times.push_back(t);
    for (std::size_t i = 0; i < n; ++i) out.log.vehicles[i].states.push_back(states[i]);
  };
  record(in.leader.time(0));

  std::vector<double> cmd(n, 0.0);
  std::vector<char> overlapping(n, 0);
  const double dt = kSampleInterval;
  for (std::size_t s = 0; s < steps; ++s) {
    for (const auto& m : out.modules) {
      const auto obs = observe(states, m, vp);
      const auto a = mean_action(actor_forward(bank.at(m.module_size), obs));
      for (std::size_t j = 0; j < m.cav_indices.size(); ++j) {
        cmd[m.cav_indices[j]] = a[static_cast<Eigen::Index>(j)];
      }
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double gap = spacing_and_gap(states[i - 1], states[i], vp).gap;
      if (gap <= 0.0) {
        cmd[i] = vp.accel_min;
      } else if (!topo.is_cav(i)) {
        cmd[i] = idm_accel(states[i].speed, states[i - 1].speed - states[i].speed, gap, in.idm);
      }
    }

    const double v_next = in.leader.speed(s + 1);
    states[0].accel = (v_next - states[0].speed) / dt;
    states[0].speed = v_next;
    states[0].position += v_next * dt;
    for (std::size_t i = 1; i < n; ++i) states[i] = step_kinematics(states[i], cmd[i], dt, vp);

    for (std::size_t i = 1; i < n; ++i) {
      const bool now = spacing_and_gap(states[i - 1], states[i], vp).gap <= 0.0;
      if (now && !overlapping[i]) ++out.collisions;
      overlapping[i] = now;
    }
    record(in.leader.time(s + 1));
  }

  out.report = per_vehicle_report(out.log, in.weights, vp, *in.fuel_table);
  return out;
}

TopologyVector platoon_topology(const std::vector<int>& followers) {
  std::vector<int> labels{1};
  labels.insert(labels.end(), followers.begin(), followers.end());
  return TopologyVector(labels);
}

int cav_count(double rate, int followers) {
  if (!(rate >= 0.0 && rate <= 100.0)) throw ConfigError("penetration rate must be in [0, 100]");
  return static_cast<int>(std::lround(rate / 100.0 * followers));
}

std::vector<int> cav_first_followers(double rate, int followers) {
  const int c = cav_count(rate, followers);
  std::vector<int> out(static_cast<std::size_t>(followers), 1);
  std::fill(out.begin(), out.begin() + c, 0);
  return out;
}

std::vector<int> hdv_first_followers(double rate, int followers) {
  auto out = cav_first_followers(rate, followers);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> random_followers(double rate, int followers, std::uint64_t seed) {
  auto out = cav_first_followers(rate, followers);
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<int> specific_followers(double rate) {
  if (rate == 20.0) return {1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0};
  if (rate == 47.0) return {1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  if (rate == 80.0) return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0};
  throw ConfigError("no specific combination defined for " + text::format_double(rate) + "%");
}

std::vector<int> parse_followers(const std::string& literal) {
  try {
    return TopologyVector::parse(literal).labels();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
}

std::string followers_to_string(const std::vector<int>& followers) {
  std::string s;
  for (std::size_t i = 0; i < followers.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(followers[i]);
  }
  return s;
}

LeaderTrajectory resolve_leader(const ExperimentConfig& c) {
  if (c.leader.kind == "file") return read_trajectory_csv(c.leader.file);
  try {
    return synth_stop_and_go(c.leader.synthetic);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("leader.synthetic: ") + e.what());
  }
}

std::shared_ptr<const VtMicroTable> resolve_fuel_table(const ExperimentConfig& c) {
  if (c.fuel_table.empty()) return std::make_shared<const VtMicroTable>(VtMicroTable::light_duty());
  return std::make_shared<const VtMicroTable>(VtMicroTable::load(c.fuel_table));
}

SimulationInput simulation_input(const ExperimentConfig& c, TopologyVector topology,
                                 LeaderTrajectory leader) {
  SimulationInput in;
  in.topology = std::move(topology);
  in.leader = std::move(leader);
  in.vehicle = c.vehicle;
  in.idm = c.idm;
  in.weights = c.weights;
  in.fuel_table = resolve_fuel_table(c);
  in.max_module_size = c.max_module_size;
  return in;
}

namespace {

LeaderTrajectory draw_leader(const TrainingLeaderConfig& spec, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StopAndGoSpec s;
  s.duration = spec.duration;
  s.base_speed = spec.base_speed_min + (spec.base_speed_max - spec.base_speed_min) * unit(rng);
  const double amp = spec.amplitude_min + (spec.amplitude_max - spec.amplitude_min) * unit(rng);
  s.amplitude = std::min(amp, 0.9 * s.base_speed);
  s.n_waves = spec.waves_min +
              static_cast<int>(std::floor(unit(rng) * (spec.waves_max - spec.waves_min + 1)));
  s.n_waves = std::min(s.n_waves, spec.waves_max);
  s.seed = rng();
  return synth_stop_and_go(s);
}

}  // namespace

LeaderTrajectory training_leader(const TrainingLeaderConfig& spec, std::uint64_t seed, int k,
                                 int episode, int worker) {
  return draw_leader(spec, mix_seed(seed, static_cast<std::uint64_t>(k),
                                    (static_cast<std::uint64_t>(episode) << 16) ^
                                        static_cast<std::uint64_t>(worker)));
}

LeaderTrajectory held_out_leader(const TrainingLeaderConfig& spec, std::uint64_t seed, int index) {
  return draw_leader(spec, mix_seed(seed, 0xFFFF'0000ULL, static_cast<std::uint64_t>(index)));
}

std::vector<SweepRow> run_penetration_sweep(const ExperimentConfig& c, const PolicyBank& bank) {
  const LeaderTrajectory leader = resolve_leader(c);
  auto simulate = [&](double rate) {
    SweepRow row;
    row.rate = rate;
    row.followers = random_followers(rate, c.followers,
                                     mix_seed(c.seed, 0x5eed, static_cast<std::uint64_t>(
                                                                  std::llround(rate * 1000))));
    const auto res = run_simulation(simulation_input(c, platoon_topology(row.followers), leader), bank);
    row.report = res.report;
    row.collisions = res.collisions;
    return row;
  };
  const SweepRow baseline = simulate(0.0);
  std::vector<SweepRow> rows;
  for (double rate : c.penetration_rates) {
    SweepRow row = rate == 0.0 ? baseline : simulate(rate);
    row.improvement = improvement_vs_baseline(row.report, baseline.report);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

void append_optional(std::string& out, const std::optional<double>& x) {
  if (x) text::append_double(out, *x);
}

}  // namespace

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  auto j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"rate", r.rate},
                 {"topology", followers_to_string(r.followers)},
                 {"travel_improvement", optional_json(r.improvement.travel)},
                 {"energy_improvement", optional_json(r.improvement.energy)},
                 {"collisions", r.collisions},
                 {"report", report_to_json(r.report)}});
  }
  return j;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "rate,topology,average_speed,average_fuel,travel_pct,energy_pct,collisions\n";
  for (const auto& r : rows) {
    text::append_double(out, r.rate);
    out += ",\"" + followers_to_string(r.followers) + "\",";
    text::append_double(out, r.report.average_speed);
    out += ',';
    text::append_double(out, r.report.average_fuel);
    out += ',';
    append_optional(out, r.improvement.travel);
    out += ',';
    append_optional(out, r.improvement.energy);
    out += ',' + std::to_string(r.collisions) + '\n';
  }
  return out;
}

std::vector<CombinationRow> run_combination_study(const ExperimentConfig& c, const PolicyBank& bank) {
  const double rate = c.combination_rate;
  const LeaderTrajectory leader = resolve_leader(c);
  std::vector<std::pair<std::string, std::vector<int>>> layouts;
  layouts.emplace_back("random", random_followers(rate, c.followers, mix_seed(c.seed, 0xC0B0, 0)));
  if ((rate == 20.0 || rate == 47.0 || rate == 80.0) && c.followers == 15) {
    layouts.emplace_back("specific", specific_followers(rate));
  }
  layouts.emplace_back("cav_first", cav_first_followers(rate, c.followers));
  layouts.emplace_back("hdv_first", hdv_first_followers(rate, c.followers));

  std::vector<CombinationRow> rows;
  for (auto& [name, followers] : layouts) {
    const auto res = run_simulation(simulation_input(c, platoon_topology(followers), leader), bank);
    rows.push_back({name, followers, res.report, res.collisions});
  }
  return rows;
}

nlohmann::json combinations_to_json(const std::vector<CombinationRow>& rows) {
  auto j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"combination", r.name},
                 {"topology", followers_to_string(r.followers)},
                 {"collisions", r.collisions},
                 {"report", report_to_json(r.report)}});
  }
  return j;
}

std::string combinations_to_csv(const std::vector<CombinationRow>& rows) {
  std::string out = "combination,topology,average_speed,average_fuel,collisions\n";
  for (const auto& r : rows) {
    out += r.name + ",\"" + followers_to_string(r.followers) + "\",";
    text::append_double(out, r.report.average_speed);
    out += ',';
    text::append_double(out, r.report.average_fuel);
    out += ',' + std::to_string(r.collisions) + '\n';
  }
  return out;
}

TrainingRunSummary run_training(const ExperimentConfig& c, std::ostream* progress) {
  const auto dir = c.checkpoints();
  const auto log_dir = c.output_dir / "logs";
  std::filesystem::create_directories(dir);
  std::filesystem::create_directories(log_dir);

  TrainerConfig tc = c.trainer;
  tc.seed = c.seed;
  std::optional<PolicyParameters> undertrained;
  if (std::filesystem::exists(undertrained_checkpoint_path(dir))) {
    undertrained = load_checkpoint(undertrained_checkpoint_path(dir));
  }

  TrainingRunSummary summary;
  for (int k = 1; k <= c.max_module_size; ++k) {
    if (std::filesystem::exists(checkpoint_path(dir, k))) {
      summary.resumed.push_back(k);
      if (progress) *progress << "module " << k << ": checkpoint present, skipping\n";
      continue;
    }
    TrainingSetup setup;
    setup.episode.weights = c.weights;
    setup.episode.params = c.vehicle;
    setup.episode.fuel_table = resolve_fuel_table(c);
    const auto spec = c.training_leaders;
    const auto seed = c.seed;
    setup.leaders = [spec, seed, k](int ep, int w) { return training_leader(spec, seed, k, ep, w); };
    if (k >= 2) setup.guide = undertrained;

    std::string log;
    setup.on_episode = [&](const EpisodeRecord& r, const UpdateStats*) {
      log += training_log_line(r);
      log += '\n';
      if (progress && (r.episode % 10 == 0 || r.episode == 1)) {
        *progress << "module " << k << " episode " << r.episode << " reward "
                  << text::format_double(r.raw_reward) << " smoothed "
                  << text::format_double(r.smoothed_reward) << '\n';
      }
    };

    TrainingResult result;
    try {
      result = train_module(k, tc, setup);
    } catch (const NumericError& e) {
      throw NumericError("module " + std::to_string(k) + ": " + e.what());
    }
    write_text_file(log_dir / ("m" + std::to_string(k) + ".jsonl"), log);
    if (k == 1 && result.undertrained) {
      undertrained = result.undertrained;
      save_checkpoint(undertrained_checkpoint_path(dir), *undertrained);
    }
    save_checkpoint(checkpoint_path(dir, k), result.params);
    summary.trained.push_back(k);
  }
  return summary;
}

}  // namespace platoon
