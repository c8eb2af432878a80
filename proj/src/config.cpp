#include "platoon/config.hpp"

#include <fstream>
#include <set>

#include "platoon/errors.hpp"
#include "platoon/topology.hpp"

namespace platoon {

namespace {

using nlohmann::json;

// Reads known keys of one JSON object and rejects anything else.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for " + name_ + "." + key + ": " + e.what());
    }
  }

  void get_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  template <class F>
  void section(const char* key, F&& read) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Section sub(j_.at(key), name_.empty() ? key : name_ + "." + key);
    read(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) {
        throw ConfigError("config: unknown key '" + (name_.empty() ? k : name_ + "." + k) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_stop_and_go(Section& s, StopAndGoSpec& spec) {
  s.get("duration", spec.duration);
  s.get("base_speed", spec.base_speed);
  s.get("n_waves", spec.n_waves);
  s.get("amplitude", spec.amplitude);
  s.get("standstill", spec.standstill);
  s.get("seed", spec.seed);
}

json stop_and_go_json(const StopAndGoSpec& spec) {
  return {{"duration", spec.duration}, {"base_speed", spec.base_speed},
          {"n_waves", spec.n_waves},   {"amplitude", spec.amplitude},
          {"standstill", spec.standstill}, {"seed", spec.seed}};
}

void read_trainer(Section& s, TrainerConfig& t) {
  s.get("gamma", t.gamma);
  s.get("lambda", t.lambda);
  s.get("clip_epsilon", t.clip_epsilon);
  s.get("batch_size", t.batch_size);
  s.get("epochs", t.epochs);
  s.get("minibatch_size", t.minibatch_size);
  s.get("actor_lr", t.actor_lr);
  s.get("critic_lr", t.critic_lr);
  s.get("workers", t.workers);
  s.get("episodes_m1", t.episodes_m1);
  s.get("episodes_other", t.episodes_other);
  s.get("guided_episodes", t.guided_episodes);
  s.get("undertrained_episodes", t.undertrained_episodes);
  s.get("imitation_weight", t.imitation_weight);
  s.get("horizon", t.horizon);
  s.get("normalize_advantages", t.normalize_advantages);
  s.get("parallel_kernels", t.parallel_kernels);
  s.get("hidden", t.policy.hidden);
  s.get("initial_log_std", t.policy.initial_log_std);
  s.section("observation_scale", [&](Section& o) {
    o.get("speed", t.policy.scale.speed);
    o.get("gap", t.policy.scale.gap);
    o.get("delta_v", t.policy.scale.delta_v);
    o.get("delta_d", t.policy.scale.delta_d);
  });
}

json trainer_json(const TrainerConfig& t) {
  return {{"gamma", t.gamma},
          {"lambda", t.lambda},
          {"clip_epsilon", t.clip_epsilon},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"minibatch_size", t.minibatch_size},
          {"actor_lr", t.actor_lr},
          {"critic_lr", t.critic_lr},
          {"workers", t.workers},
          {"episodes_m1", t.episodes_m1},
          {"episodes_other", t.episodes_other},
          {"guided_episodes", t.guided_episodes},
          {"undertrained_episodes", t.undertrained_episodes},
          {"imitation_weight", t.imitation_weight},
          {"horizon", t.horizon},
          {"normalize_advantages", t.normalize_advantages},
          {"parallel_kernels", t.parallel_kernels},
          {"hidden", t.policy.hidden},
          {"initial_log_std", t.policy.initial_log_std},
          {"observation_scale",
           {{"speed", t.policy.scale.speed},
            {"gap", t.policy.scale.gap},
            {"delta_v", t.policy.scale.delta_v},
            {"delta_d", t.policy.scale.delta_d}}}};
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::set<std::string> scenarios{"train", "simulate", "sweep",
                                               "combos", "decompose", "report"};
  if (!scenarios.count(scenario)) throw ConfigError("config: unknown scenario '" + scenario + "'");
  if (followers < 1) throw ConfigError("config: followers must be >= 1");
  if (max_module_size < 1) throw ConfigError("config: max_module_size must be >= 1");
  if (penetration_rates.empty()) throw ConfigError("config: penetration_rates is empty");
  for (double r : penetration_rates) {
    if (!(r >= 0.0 && r <= 100.0)) throw ConfigError("config: penetration rates must be in [0, 100]");
  }
  if (!(combination_rate >= 0.0 && combination_rate <= 100.0)) {
    throw ConfigError("config: combination_rate must be in [0, 100]");
  }
  if (!topology.empty()) {
    try {
      TopologyVector::parse("1," + topology);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("config: topology: ") + e.what());
    }
  }
  if (leader.kind != "synthetic" && leader.kind != "file") {
    throw ConfigError("config: leader.kind must be 'synthetic' or 'file'");
  }
  if (leader.kind == "file" && leader.file.empty()) throw ConfigError("config: leader.file not set");
  const auto& tl = training_leaders;
  if (!(tl.duration > 0 && tl.base_speed_min > 0 && tl.base_speed_min <= tl.base_speed_max &&
        tl.amplitude_min >= 0 && tl.amplitude_min <= tl.amplitude_max && tl.waves_min >= 1 &&
        tl.waves_min <= tl.waves_max)) {
    throw ConfigError("config: training_leaders ranges are invalid");
  }
  try {
    trainer.validate();
    weights.validate();
    vehicle.validate();
    idm.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::filesystem::path ExperimentConfig::checkpoints() const {
  return checkpoint_dir.empty() ? output_dir / "checkpoints" : checkpoint_dir;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  root.get("scenario", c.scenario);
  root.get("topology", c.topology);
  root.get("penetration_rates", c.penetration_rates);
  root.get("combination_rate", c.combination_rate);
  root.get("followers", c.followers);
  root.get("max_module_size", c.max_module_size);
  root.section("leader", [&](Section& s) {
    s.get("kind", c.leader.kind);
    s.get_path("file", c.leader.file);
    s.section("synthetic", [&](Section& g) { read_stop_and_go(g, c.leader.synthetic); });
  });
  root.section("training_leaders", [&](Section& s) {
    auto& t = c.training_leaders;
    s.get("duration", t.duration);
    s.get("base_speed_min", t.base_speed_min);
    s.get("base_speed_max", t.base_speed_max);
    s.get("amplitude_min", t.amplitude_min);
    s.get("amplitude_max", t.amplitude_max);
    s.get("waves_min", t.waves_min);
    s.get("waves_max", t.waves_max);
  });
  root.get_path("checkpoint_dir", c.checkpoint_dir);
  root.get_path("trajectory_log", c.trajectory_log);
  root.get_path("fuel_table", c.fuel_table);
  root.section("trainer", [&](Section& s) { read_trainer(s, c.trainer); });
  root.section("reward", [&](Section& s) {
    auto& w = c.weights;
    s.get("alpha_spacing", w.alpha_spacing);
    s.get("alpha_speed", w.alpha_speed);
    s.get("comfort", w.comfort);
    s.get("efficiency", w.efficiency);
    s.get("energy", w.energy);
    s.get("stability_penalty", w.stability_penalty);
    s.get("gap_penalty", w.gap_penalty);
    s.get("speed_penalty", w.speed_penalty);
    s.get("window_steps", w.window_steps);
    s.get("safe_time_gap", w.safe_time_gap);
    s.get("free_flow_speed", w.free_flow_speed);
  });
  root.section("vehicle", [&](Section& s) {
    auto& v = c.vehicle;
    s.get("length", v.length);
    s.get("standstill_spacing", v.standstill_spacing);
    s.get("accel_min", v.accel_min);
    s.get("accel_max", v.accel_max);
    s.get("desired_time_gap", v.desired_time_gap);
  });
  root.section("idm", [&](Section& s) {
    auto& p = c.idm;
    s.get("desired_speed", p.desired_speed);
    s.get("time_headway", p.time_headway);
    s.get("min_gap", p.min_gap);
    s.get("max_accel", p.max_accel);
    s.get("comfortable_decel", p.comfortable_decel);
    s.get("exponent", p.exponent);
  });
  root.get_path("output_dir", c.output_dir);
  root.get("seed", c.seed);
  root.finish();
  c.trainer.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const auto& w = c.weights;
  const auto& v = c.vehicle;
  const auto& p = c.idm;
  const auto& t = c.training_leaders;
  return {{"scenario", c.scenario},
          {"topology", c.topology},
          {"penetration_rates", c.penetration_rates},
          {"combination_rate", c.combination_rate},
          {"followers", c.followers},
          {"max_module_size", c.max_module_size},
          {"leader",
           {{"kind", c.leader.kind},
            {"file", c.leader.file.string()},
            {"synthetic", stop_and_go_json(c.leader.synthetic)}}},
          {"training_leaders",
           {{"duration", t.duration},
            {"base_speed_min", t.base_speed_min},
            {"base_speed_max", t.base_speed_max},
            {"amplitude_min", t.amplitude_min},
            {"amplitude_max", t.amplitude_max},
            {"waves_min", t.waves_min},
            {"waves_max", t.waves_max}}},
          {"checkpoint_dir", c.checkpoint_dir.string()},
          {"trajectory_log", c.trajectory_log.string()},
          {"fuel_table", c.fuel_table.string()},
          {"trainer", trainer_json(c.trainer)},
          {"reward",
           {{"alpha_spacing", w.alpha_spacing},
            {"alpha_speed", w.alpha_speed},
            {"comfort", w.comfort},
            {"efficiency", w.efficiency},
            {"energy", w.energy},
            {"stability_penalty", w.stability_penalty},
            {"gap_penalty", w.gap_penalty},
            {"speed_penalty", w.speed_penalty},
            {"window_steps", w.window_steps},
            {"safe_time_gap", w.safe_time_gap},
            {"free_flow_speed", w.free_flow_speed}}},
          {"vehicle",
           {{"length", v.length},
            {"standstill_spacing", v.standstill_spacing},
            {"accel_min", v.accel_min},
            {"accel_max", v.accel_max},
            {"desired_time_gap", v.desired_time_gap}}},
          {"idm",
           {{"desired_speed", p.desired_speed},
            {"time_headway", p.time_headway},
            {"min_gap", p.min_gap},
            {"max_accel", p.max_accel},
            {"comfortable_decel", p.comfortable_decel},
            {"exponent", p.exponent}}},
          {"output_dir", c.output_dir.string()},
          {"seed", c.seed}};
}

}  // namespace platoon
