#include "platoon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "platoon/errors.hpp"
#include "platoon/text_io.hpp"

namespace platoon {

std::string to_string(VehicleRole role) {
  switch (role) {
    case VehicleRole::Leader: return "leader";
    case VehicleRole::Cav: return "cav";
    case VehicleRole::Hdv: return "hdv";
  }
  return "?";
}

void TrajectoryLog::validate() const {
  if (times.empty()) throw InvalidInput("trajectory log has no samples");
  for (const auto& v : vehicles) {
    if (v.states.size() != times.size()) {
      throw InvalidInput("vehicle " + std::to_string(v.id) + " has " +
                         std::to_string(v.states.size()) + " samples, log has " +
                         std::to_string(times.size()));
    }
    for (const auto& s : v.states) {
      if (!(s.speed >= 0.0)) throw InvalidInput("negative speed in trajectory log");
    }
  }
}

PlatoonReport per_vehicle_report(const TrajectoryLog& log, const RewardWeights& weights,
                                 const VehicleParams& params, const VtMicroTable& table) {
  log.validate();
  if (log.vehicles.size() < 2) throw InvalidInput("report needs at least two vehicles");
  const std::size_t n = log.times.size();
  const std::size_t first = n > 1 ? 1 : 0;
  const double count = static_cast<double>(n - first);
  const FuelInputBounds bounds{weights.free_flow_speed, params.accel_min, params.accel_max};

  auto accels = [&](const VehicleTrace& v) {
    std::vector<double> a;
    a.reserve(n - first);
    for (std::size_t t = first; t < n; ++t) a.push_back(v.states[t].accel);
    return a;
  };
  const std::vector<double> lead_accels = accels(log.vehicles[0]);

  PlatoonReport out;
  double speed_sum = 0.0, fuel_sum = 0.0;
  for (std::size_t i = 0; i < log.vehicles.size(); ++i) {
    const auto& veh = log.vehicles[i];
    VehicleReport r;
    r.id = veh.id;
    r.role = veh.role;
    r.dampening_ratio = dampening_ratio(accels(veh), lead_accels);

    double eff = 0.0, comfort = 0.0, fuel = 0.0, speed = 0.0;
    double min_speed = veh.states[0].speed;
    for (std::size_t t = first; t < n; ++t) {
      const auto& s = veh.states[t];
      if (i > 0) {
        const auto& pred = log.vehicles[i - 1].states[t];
        const Spacing sp = spacing_and_gap(pred, s, params);
        eff += efficiency_cost(sp.spacing - equilibrium_spacing(s.speed, params),
                               pred.speed - s.speed, weights);
      }
      comfort += weights.comfort * s.accel * s.accel;
      fuel += vt_micro_fuel(s.speed, s.accel, table, bounds);
      speed += s.speed;
      min_speed = std::min(min_speed, s.speed);
    }
    r.comfort_cost = comfort / count;
    if (i > 0) {
      r.efficiency_cost = eff / count;
      r.running_cost = *r.efficiency_cost + r.comfort_cost;
    }
    r.fuel = fuel / count;
    r.mean_speed = speed / count;
    r.min_speed = min_speed;
    speed_sum += r.mean_speed;
    fuel_sum += r.fuel;
    out.vehicles.push_back(r);
  }
  out.average_speed = speed_sum / static_cast<double>(out.vehicles.size());
  out.average_fuel = fuel_sum / static_cast<double>(out.vehicles.size());
  return out;
}

Improvement improvement_vs_baseline(const PlatoonReport& report, const PlatoonReport& baseline) {
  if (report.vehicles.size() != baseline.vehicles.size()) {
    throw InvalidInput("improvement_vs_baseline: platoon lengths differ");
  }
  Improvement imp;
  if (baseline.average_speed != 0.0) {
    imp.travel = (report.average_speed - baseline.average_speed) / baseline.average_speed * 100.0;
  }
  if (baseline.average_fuel != 0.0) {
    imp.energy = (baseline.average_fuel - report.average_fuel) / baseline.average_fuel * 100.0;
  }
  return imp;
}

StabilityVerdict head_to_tail_stability(const PlatoonReport& report) {
  StabilityVerdict v;
  if (report.vehicles.size() < 2) return v;
  double worst = -1.0;
  for (std::size_t i = 1; i < report.vehicles.size(); ++i) {
    const auto& d = report.vehicles[i].dampening_ratio;
    if (!d) throw InvalidInput("head_to_tail_stability: undefined dampening ratio");
    worst = std::max(worst, *d);
  }
  v.stable = worst <= 1.0;
  v.margin = 1.0 - worst;
  return v;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

void append_optional(std::string& out, const std::optional<double>& x) {
  if (x) text::append_double(out, *x);
}

}  // namespace

nlohmann::json report_to_json(const PlatoonReport& report) {
  nlohmann::json j;
  j["average_speed"] = report.average_speed;
  j["average_fuel"] = report.average_fuel;
  j["vehicles"] = nlohmann::json::array();
  for (const auto& v : report.vehicles) {
    j["vehicles"].push_back({{"id", v.id},
                             {"role", to_string(v.role)},
                             {"dampening_ratio", optional_json(v.dampening_ratio)},
                             {"efficiency_cost", optional_json(v.efficiency_cost)},
                             {"comfort_cost", v.comfort_cost},
                             {"running_cost", optional_json(v.running_cost)},
                             {"fuel", v.fuel},
                             {"mean_speed", v.mean_speed},
                             {"min_speed", v.min_speed}});
  }
  return j;
}

std::string report_to_csv(const PlatoonReport& report) {
  std::string out =
      "vehicle_id,role,dampening_ratio,efficiency_cost,comfort_cost,running_cost,fuel,mean_speed,"
      "min_speed\n";
  for (const auto& v : report.vehicles) {
    out += std::to_string(v.id);
    out += ',';
    out += to_string(v.role);
    out += ',';
    append_optional(out, v.dampening_ratio);
    out += ',';
    append_optional(out, v.efficiency_cost);
    out += ',';
    text::append_double(out, v.comfort_cost);
    out += ',';
    append_optional(out, v.running_cost);
    out += ',';
    text::append_double(out, v.fuel);
    out += ',';
    text::append_double(out, v.mean_speed);
    out += ',';
    text::append_double(out, v.min_speed);
    out += '\n';
  }
  return out;
}

std::string trajectory_log_csv(const TrajectoryLog& log) {
  log.validate();
  std::string out = "t,vehicle_id,x,v,a\n";
  for (std::size_t t = 0; t < log.times.size(); ++t) {
    for (const auto& veh : log.vehicles) {
      const auto& s = veh.states[t];
      text::append_double(out, log.times[t]);
      out += ',';
      out += std::to_string(veh.id);
      out += ',';
      text::append_double(out, s.position);
      out += ',';
      text::append_double(out, s.speed);
      out += ',';
      text::append_double(out, s.accel);
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_trajectory_log_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
  write_text_file(path, trajectory_log_csv(log));
}

TrajectoryLog read_trajectory_log_csv(const std::filesystem::path& path,
                                      const std::optional<TopologyVector>& topology) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory log " + path.string());
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "t,vehicle_id,x,v,a") {
    throw ConfigError("trajectory log must start with header 't,vehicle_id,x,v,a': " +
                      path.string());
  }
  std::vector<double> times;
  std::map<int, std::vector<VehicleState>> by_id;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    double t = 0, id = 0;
    VehicleState s;
    if (cols.size() != 5 || !text::parse_double(cols[0], t) || !text::parse_double(cols[1], id) ||
        !text::parse_double(cols[2], s.position) || !text::parse_double(cols[3], s.speed) ||
        !text::parse_double(cols[4], s.accel) || id < 0 || id != std::floor(id)) {
      throw ConfigError("malformed trajectory log row " + std::to_string(row) + " in " +
                        path.string());
    }
    if (times.empty() || t != times.back()) {
      if (!times.empty() && t < times.back()) {
        throw ConfigError("trajectory log rows are not time-ordered: " + path.string());
      }
      times.push_back(t);
    }
    by_id[static_cast<int>(id)].push_back(s);
  }

  TrajectoryLog log;
  log.times = std::move(times);
  int expected = 0;
  for (auto& [id, states] : by_id) {
    if (id != expected++) throw ConfigError("vehicle ids must be 0..n-1: " + path.string());
    VehicleTrace trace;
    trace.id = id;
    if (id == 0) {
      trace.role = VehicleRole::Leader;
    } else if (topology) {
      if (static_cast<std::size_t>(id) >= topology->size()) {
        throw ConfigError("trajectory log has more vehicles than the topology");
      }
      trace.role = topology->is_cav(static_cast<std::size_t>(id)) ? VehicleRole::Cav
                                                                   : VehicleRole::Hdv;
    }
    trace.states = std::move(states);
    log.vehicles.push_back(std::move(trace));
  }
  try {
    log.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return log;
}

}  // namespace platoon
