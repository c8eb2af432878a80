// platoon_cli: train the CAV modules and run platoon experiments.
//
//   platoon_cli train    --config configs/defaults.json --out runs/a
//   platoon_cli simulate --config ... --topology 0,1,0,... --out runs/a
//   platoon_cli sweep | combos | decompose | report
//
// Exit status: 0 ok, 2 configuration/input error, 3 numeric failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "platoon/config.hpp"
#include "platoon/errors.hpp"
#include "platoon/experiment.hpp"
#include "platoon/metrics.hpp"

namespace {

using namespace platoon;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> checkpoints;
  std::optional<std::string> topology;
  std::optional<double> rate;
  std::optional<std::string> leader_csv;
  std::optional<std::string> log;
  std::optional<int> episodes_m1;
  std::optional<int> episodes_other;
};

ExperimentConfig resolve(const Overrides& o, const std::string& scenario) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  c.scenario = scenario;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.workers) c.trainer.workers = *o.workers;
  if (o.checkpoints) c.checkpoint_dir = *o.checkpoints;
  if (o.topology) c.topology = *o.topology;
  if (o.rate) c.combination_rate = *o.rate;
  if (o.leader_csv) {
    c.leader.kind = "file";
    c.leader.file = *o.leader_csv;
  }
  if (o.log) c.trajectory_log = *o.log;
  if (o.episodes_m1) c.trainer.episodes_m1 = *o.episodes_m1;
  if (o.episodes_other) c.trainer.episodes_other = *o.episodes_other;
  c.trainer.seed = c.seed;
  c.validate();
  return c;
}

std::vector<int> config_followers(const ExperimentConfig& c) {
  if (c.topology.empty()) return std::vector<int>(static_cast<std::size_t>(c.followers), 0);
  return parse_followers(c.topology);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

int cmd_train(const ExperimentConfig& c) {
  write_json(c.output_dir / "config.json", to_json(c));
  const auto summary = run_training(c, &std::cerr);
  for (int k : summary.trained) std::cout << "trained M" << k << "\n";
  for (int k : summary.resumed) std::cout << "resumed M" << k << "\n";
  return 0;
}

int cmd_simulate(const ExperimentConfig& c) {
  const auto followers = config_followers(c);
  const auto bank = PolicyBank::load(c.checkpoints());
  const auto res =
      run_simulation(simulation_input(c, platoon_topology(followers), resolve_leader(c)), bank);
  write_trajectory_log_csv(c.output_dir / "trajectory.csv", res.log);
  auto j = report_to_json(res.report);
  j["topology"] = followers_to_string(followers);
  j["collisions"] = res.collisions;
  const auto verdict = head_to_tail_stability(res.report);
  j["head_to_tail_stable"] = verdict.stable;
  j["stability_margin"] = verdict.margin;
  write_json(c.output_dir / "report.json", j);
  write_text_file(c.output_dir / "report.csv", report_to_csv(res.report));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& c) {
  const auto rows = run_penetration_sweep(c, PolicyBank::load(c.checkpoints()));
  write_json(c.output_dir / "sweep.json", sweep_to_json(rows));
  const auto csv = sweep_to_csv(rows);
  write_text_file(c.output_dir / "sweep.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_combos(const ExperimentConfig& c) {
  const auto rows = run_combination_study(c, PolicyBank::load(c.checkpoints()));
  write_json(c.output_dir / "combos.json", combinations_to_json(rows));
  const auto csv = combinations_to_csv(rows);
  write_text_file(c.output_dir / "combos.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_decompose(const ExperimentConfig& c) {
  const auto topo = platoon_topology(config_followers(c));
  const auto modules = decompose(topo, c.max_module_size);
  auto j = nlohmann::json::object();
  j["topology"] = topo.to_string();
  j["modules"] = nlohmann::json::array();
  for (const auto& m : modules) {
    j["modules"].push_back(
        {{"module_size", m.module_size}, {"leader", m.leader_index}, {"cavs", m.cav_indices}});
  }
  j["valid"] = static_cast<bool>(verify_partition(topo, modules, c.max_module_size));
  write_json(c.output_dir / "decomposition.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const ExperimentConfig& c) {
  if (c.trajectory_log.empty()) throw ConfigError("report: no trajectory log given (--log)");
  std::optional<TopologyVector> topo;
  if (!c.topology.empty()) topo = platoon_topology(parse_followers(c.topology));
  const auto log = read_trajectory_log_csv(c.trajectory_log, topo);
  const auto report = per_vehicle_report(log, c.weights, c.vehicle, *resolve_fuel_table(c));
  write_json(c.output_dir / "report.json", report_to_json(report));
  write_text_file(c.output_dir / "report.csv", report_to_csv(report));
  std::cout << report_to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-traffic platoon trainer and experiment runner"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Run seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--workers", o.workers, "Rollout workers");
    sub->add_option("--checkpoints", o.checkpoints, "Checkpoint directory");
    sub->add_option("--topology", o.topology, "Follower labels, e.g. 0,1,0 (0 = CAV)");
    sub->add_option("--leader", o.leader_csv, "Leader trajectory CSV (t,v)");
  };

  auto* train = app.add_subcommand("train", "Train M_1..M_5");
  auto* simulate = app.add_subcommand("simulate", "Simulate one platoon topology");
  auto* sweep = app.add_subcommand("sweep", "Penetration-rate sweep");
  auto* combos = app.add_subcommand("combos", "Compare CAV/HDV orderings");
  auto* decomp = app.add_subcommand("decompose", "Print the module decomposition");
  auto* report = app.add_subcommand("report", "Report on an existing trajectory log");
  for (auto* s : {train, simulate, sweep, combos, decomp, report}) add_common(s);
  train->add_option("--episodes-m1", o.episodes_m1, "Episodes for M_1");
  train->add_option("--episodes-other", o.episodes_other, "Episodes for M_2..M_5");
  combos->add_option("--rate", o.rate, "CAV penetration rate, percent");
  report->add_option("--log", o.log, "Trajectory log CSV (t,vehicle_id,x,v,a)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const ExperimentConfig c = resolve(o, name);
    if (name == "train") return cmd_train(c);
    if (name == "simulate") return cmd_simulate(c);
    if (name == "sweep") return cmd_sweep(c);
    if (name == "combos") return cmd_combos(c);
    if (name == "decompose") return cmd_decompose(c);
    return cmd_report(c);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
