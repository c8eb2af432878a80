#include "platoon/policy.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

constexpr int kCheckpointFormatVersion = 1;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void check_obs(const PolicyParameters& params, const ModuleObservation& obs) {
  if (obs.size() != static_cast<std::size_t>(params.module_size)) {
    throw InvalidInput("observation has " + std::to_string(obs.size()) +
                       " CAVs, policy expects " + std::to_string(params.module_size));
  }
}

nlohmann::json mlp_json(const Mlp& m) {
  return {{"input_dim", m.spec().input_dim},
          {"hidden", m.spec().hidden},
          {"output_dim", m.spec().output_dim},
          {"parameters", std::vector<double>(m.parameters().begin(), m.parameters().end())}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.output_dim = j.at("output_dim").get<int>();
  Mlp m(spec);
  const auto values = j.at("parameters").get<std::vector<double>>();
  if (values.size() != m.parameter_count()) {
    throw ConfigError("checkpoint: parameter count does not match the network shape");
  }
  std::copy(values.begin(), values.end(), m.parameters().begin());
  return m;
}

}  // namespace

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  int in = input_dim;
  for (int h : hidden) {
    n += static_cast<std::size_t>(in) * h + h;
    in = h;
  }
  n += static_cast<std::size_t>(in) * output_dim + output_dim;
  return n;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.input_dim < 1 || spec_.output_dim < 1) {
    throw InvalidInput("MLP input and output widths must be >= 1");
  }
  std::size_t offset = 0;
  int in = spec_.input_dim;
  auto add_layer = [&](int out) {
    if (out < 1) throw InvalidInput("MLP layer widths must be >= 1");
    layers_.push_back({offset, in, out});
    offset += static_cast<std::size_t>(in) * out + out;
    in = out;
  };
  for (int h : spec_.hidden) add_layer(h);
  add_layer(spec_.output_dim);
  params_.assign(offset, 0.0);
}

void Mlp::initialize(std::mt19937_64& rng, double output_gain) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    const double limit = std::sqrt(6.0 / (L.in + L.out));
    const double gain = (l + 1 == layers_.size()) ? output_gain : 1.0;
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t n_w = static_cast<std::size_t>(L.in) * L.out;
    for (std::size_t i = 0; i < n_w; ++i) params_[L.offset + i] = gain * dist(rng);
    for (int i = 0; i < L.out; ++i) params_[L.offset + n_w + static_cast<std::size_t>(i)] = 0.0;
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Tape* tape) const {
  if (x.size() != spec_.input_dim) {
    throw InvalidInput("MLP input has dimension " + std::to_string(x.size()) + ", expected " +
                       std::to_string(spec_.input_dim));
  }
  if (tape) {
    tape->activations.clear();
    tape->activations.reserve(layers_.size());
    tape->activations.push_back(x);
  }
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    ConstMatrixMap W(params_.data() + L.offset, L.out, L.in);
    ConstVectorMap b(params_.data() + L.offset + static_cast<std::size_t>(L.in) * L.out, L.out);
    Eigen::VectorXd z = W * a + b;
    if (l + 1 == layers_.size()) return z;
    a = z.array().tanh().matrix();
    if (tape) tape->activations.push_back(a);
  }
  return a;
}

void Mlp::backward(const Tape& tape, const Eigen::VectorXd& dy, std::span<double> grad) const {
  Eigen::VectorXd delta = dy;  // dL/dz of the current layer
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    const Eigen::VectorXd& input = tape.activations[l];
    Eigen::Map<Eigen::MatrixXd> dW(grad.data() + L.offset, L.out, L.in);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + L.offset + static_cast<std::size_t>(L.in) * L.out,
                                   L.out);
    dW.noalias() += delta * input.transpose();
    db += delta;
    if (l == 0) break;
    ConstMatrixMap W(params_.data() + L.offset, L.out, L.in);
    Eigen::VectorXd da = W.transpose() * delta;
    delta = da.array() * (1.0 - input.array().square());
  }
}

Eigen::VectorXd ObservationScale::normalize(const ModuleObservation& obs) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(4 * obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs.per_cav[i];
    const auto base = static_cast<Eigen::Index>(4 * i);
    x[base + 0] = o.speed / speed;
    x[base + 1] = o.gap / gap;
    x[base + 2] = o.delta_v / delta_v;
    x[base + 3] = o.delta_d / delta_d;
  }
  return x;
}

ModuleObservation ObservationScale::denormalize(const Eigen::VectorXd& features) const {
  if (features.size() % 4 != 0) throw InvalidInput("feature vector length must be a multiple of 4");
  ModuleObservation obs;
  for (Eigen::Index base = 0; base < features.size(); base += 4) {
    obs.per_cav.push_back({features[base] * speed, features[base + 1] * gap,
                           features[base + 2] * delta_v, features[base + 3] * delta_d});
  }
  return obs;
}

PolicyParameters::PolicyParameters(int k, const PolicyOptions& options)
    : module_size(k),
      actor(MlpSpec{4 * k, options.hidden, k}),
      log_std(static_cast<std::size_t>(k), options.initial_log_std),
      critic(MlpSpec{4 * k, options.hidden, 1}),
      scale(options.scale) {
  if (k < 1) throw InvalidInput("module size must be >= 1");
}

PolicyParameters PolicyParameters::initialized(int k, std::uint64_t seed,
                                               const PolicyOptions& options) {
  PolicyParameters p(k, options);
  std::mt19937_64 rng(seed);
  p.actor.initialize(rng, 0.01);
  p.critic.initialize(rng, 1.0);
  return p;
}

PolicyGradients PolicyGradients::zeros_like(const PolicyParameters& params) {
  PolicyGradients g;
  g.actor.assign(params.actor.parameter_count(), 0.0);
  g.log_std.assign(params.log_std.size(), 0.0);
  g.critic.assign(params.critic.parameter_count(), 0.0);
  return g;
}

PolicyGradients& PolicyGradients::operator+=(const PolicyGradients& other) {
  for (std::size_t i = 0; i < actor.size(); ++i) actor[i] += other.actor[i];
  for (std::size_t i = 0; i < log_std.size(); ++i) log_std[i] += other.log_std[i];
  for (std::size_t i = 0; i < critic.size(); ++i) critic[i] += other.critic[i];
  return *this;
}

PolicyGradients& PolicyGradients::operator*=(double s) {
  for (double& v : actor) v *= s;
  for (double& v : log_std) v *= s;
  for (double& v : critic) v *= s;
  return *this;
}

ActorOutput actor_forward(const PolicyParameters& params, const ModuleObservation& obs) {
  check_obs(params, obs);
  ActorOutput out;
  out.means = params.actor.forward(params.scale.normalize(obs));
  out.stds = ConstVectorMap(params.log_std.data(), static_cast<Eigen::Index>(params.log_std.size()))
                 .array()
                 .exp()
                 .matrix();
  return out;
}

double critic_forward(const PolicyParameters& params, const ModuleObservation& obs) {
  check_obs(params, obs);
  return params.critic.forward(params.scale.normalize(obs))[0];
}

double gaussian_log_prob(const Eigen::VectorXd& means, const Eigen::VectorXd& stds,
                         const Eigen::VectorXd& action) {
  if (means.size() != stds.size() || means.size() != action.size()) {
    throw InvalidInput("gaussian_log_prob: dimension mismatch");
  }
  double lp = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double z = (action[i] - means[i]) / stds[i];
    lp += -0.5 * z * z - std::log(stds[i]) - kHalfLogTwoPi;
  }
  return lp;
}

LogProbPass log_prob_forward(const PolicyParameters& params, const ModuleObservation& obs,
                             const Eigen::VectorXd& action) {
  check_obs(params, obs);
  LogProbPass pass;
  pass.means = params.actor.forward(params.scale.normalize(obs), &pass.tape);
  if (action.size() != pass.means.size()) {
    throw InvalidInput("log-prob: action dimension mismatch");
  }
  pass.action = action;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    const double s = params.log_std[static_cast<std::size_t>(i)];
    const double diff = action[i] - pass.means[i];
    lp += -0.5 * diff * diff * std::exp(-2.0 * s) - s - kHalfLogTwoPi;
  }
  pass.log_prob = lp;
  return pass;
}

void log_prob_backward(const PolicyParameters& params, const LogProbPass& pass, double adjoint,
                       PolicyGradients& grads) {
  const auto k = pass.means.size();
  Eigen::VectorXd d_means(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double inv_var = std::exp(-2.0 * params.log_std[si]);
    const double diff = pass.action[i] - pass.means[i];
    d_means[i] = adjoint * diff * inv_var;
    grads.log_std[si] += adjoint * (diff * diff * inv_var - 1.0);
  }
  params.actor.backward(pass.tape, d_means, grads.actor);
}

double policy_log_prob(const PolicyParameters& params, const ModuleObservation& obs,
                       const Eigen::VectorXd& action) {
  return log_prob_forward(params, obs, action).log_prob;
}

double backward_log_prob(const PolicyParameters& params, const ModuleObservation& obs,
                         const Eigen::VectorXd& action, double adjoint, PolicyGradients& grads) {
  const auto pass = log_prob_forward(params, obs, action);
  log_prob_backward(params, pass, adjoint, grads);
  return pass.log_prob;
}

double backward_value(const PolicyParameters& params, const ModuleObservation& obs,
                      double adjoint, PolicyGradients& grads) {
  check_obs(params, obs);
  Mlp::Tape tape;
  const Eigen::VectorXd v = params.critic.forward(params.scale.normalize(obs), &tape);
  Eigen::VectorXd dy(1);
  dy[0] = adjoint;
  params.critic.backward(tape, dy, grads.critic);
  return v[0];
}

Eigen::VectorXd sample_action(const ActorOutput& dist, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(dist.means.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = dist.means[i] + dist.stds[i] * normal(rng);
  return a;
}

ModuleAction to_module_action(const Eigen::VectorXd& a) {
  return ModuleAction{std::vector<double>(a.data(), a.data() + a.size())};
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params) {
  nlohmann::json j;
  j["format"] = "platoon-policy";
  j["format_version"] = kCheckpointFormatVersion;
  j["module_size"] = params.module_size;
  j["version"] = params.version;
  j["actor"] = mlp_json(params.actor);
  j["log_std"] = params.log_std;
  j["critic"] = mlp_json(params.critic);
  j["observation_scale"] = {{"speed", params.scale.speed},
                            {"gap", params.scale.gap},
                            {"delta_v", params.scale.delta_v},
                            {"delta_d", params.scale.delta_d}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

PolicyParameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "platoon-policy" ||
        j.value("format_version", 0) != kCheckpointFormatVersion) {
      throw ConfigError("unsupported checkpoint format in " + path.string());
    }
    PolicyParameters p;
    p.module_size = j.at("module_size").get<int>();
    p.version = j.at("version").get<std::uint64_t>();
    p.actor = mlp_from_json(j.at("actor"));
    p.log_std = j.at("log_std").get<std::vector<double>>();
    p.critic = mlp_from_json(j.at("critic"));
    const auto& s = j.at("observation_scale");
    p.scale = {s.at("speed").get<double>(), s.at("gap").get<double>(),
               s.at("delta_v").get<double>(), s.at("delta_d").get<double>()};
    const auto k = static_cast<std::size_t>(p.module_size);
    if (p.module_size < 1 || p.log_std.size() != k ||
        p.actor.spec().input_dim != 4 * p.module_size || p.actor.spec().output_dim != p.module_size ||
        p.critic.spec().input_dim != 4 * p.module_size || p.critic.spec().output_dim != 1) {
      throw ConfigError("checkpoint " + path.string() + " has inconsistent shapes");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace platoon
