#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "platoon/env.hpp"
#include "platoon/policy.hpp"

namespace oracle {

/// Central difference of f along coordinate `i` of `x`.
inline double central_difference(std::span<double> x, std::size_t i, double h,
                                 const std::function<double()>& f) {
  const double saved = x[i];
  x[i] = saved + h;
  const double up = f();
  x[i] = saved - h;
  const double down = f();
  x[i] = saved;
  return (up - down) / (2.0 * h);
}

/// |a - n| / max(|a|, |n|), with an absolute floor for near-zero pairs.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

/// Truncated discounted sum, written without the backward recursion:
/// A_t = sum_{l >= 0} (gamma lambda)^l delta_{t+l}, stopping after a done.
inline std::vector<double> gae_brute_force(const std::vector<double>& rewards,
                                           const std::vector<double>& values,
                                           const std::vector<double>& next_values,
                                           const std::vector<std::uint8_t>& dones, double gamma,
                                           double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    double w = 1.0;
    for (std::size_t u = t; u < n; ++u) {
      const double next = dones[u] ? 0.0 : next_values[u];
      acc += w * (rewards[u] + gamma * next - values[u]);
      if (dones[u]) break;
      w *= gamma * lambda;
    }
    out[t] = acc;
  }
  return out;
}

/// Piecewise form of the clipped surrogate.
inline double surrogate_reference(double ratio, double advantage, double epsilon) {
  if (advantage >= 0.0) return std::min(ratio, 1.0 + epsilon) * advantage;
  return std::max(ratio, 1.0 - epsilon) * advantage;
}

inline platoon::ModuleObservation random_observation(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> speed(0.0, 110.0), gap(2.0, 150.0), dv(-15.0, 15.0),
      dd(-40.0, 40.0);
  platoon::ModuleObservation obs;
  for (int i = 0; i < k; ++i) obs.per_cav.push_back({speed(rng), gap(rng), dv(rng), dd(rng)});
  return obs;
}

struct GradientCheckResult {
  double actor = 0.0;     // worst relative error per quantity
  double critic = 0.0;
  double log_prob = 0.0;
  int compared = 0;
};

/// Compares the analytic actor, critic and log-prob gradients of a randomly
/// initialized k-CAV policy with central differences on `coords` random
/// coordinates for each of `inputs` random observations.
inline GradientCheckResult gradient_check(int k, std::uint64_t seed, int inputs, int coords,
                                          double h) {
  using namespace platoon;
  std::mt19937_64 rng(seed);
  PolicyOptions opts;
  opts.initial_log_std = 0.3;
  PolicyParameters p = PolicyParameters::initialized(k, seed, opts);
  p.actor.initialize(rng, 1.0);  // full-scale outputs so every layer matters
  std::normal_distribution<double> jitter(0.0, 0.3);
  for (double& s : p.log_std) s += jitter(rng);

  GradientCheckResult out;
  for (int n = 0; n < inputs; ++n) {
    const ModuleObservation obs = random_observation(k, rng);
    const Eigen::VectorXd x = p.scale.normalize(obs);
    Eigen::VectorXd weights(k);
    for (int j = 0; j < k; ++j) weights[j] = jitter(rng) / 0.3;
    const ActorOutput dist = actor_forward(p, obs);
    Eigen::VectorXd action(k);
    for (int j = 0; j < k; ++j) action[j] = dist.means[j] + dist.stds[j] * jitter(rng) / 0.3;

    // Actor: scalar projection w . mu(x).
    Mlp::Tape tape;
    p.actor.forward(x, &tape);
    std::vector<double> g_actor(p.actor.parameter_count(), 0.0);
    p.actor.backward(tape, weights, g_actor);
    auto actor_fn = [&] { return weights.dot(p.actor.forward(x)); };

    PolicyGradients g = PolicyGradients::zeros_like(p);
    backward_value(p, obs, 1.0, g);
    auto critic_fn = [&] { return critic_forward(p, obs); };

    PolicyGradients g_lp = PolicyGradients::zeros_like(p);
    backward_log_prob(p, obs, action, 1.0, g_lp);
    auto lp_fn = [&] { return policy_log_prob(p, obs, action); };

    std::uniform_int_distribution<std::size_t> pick_a(0, p.actor.parameter_count() - 1);
    std::uniform_int_distribution<std::size_t> pick_c(0, p.critic.parameter_count() - 1);
    std::uniform_int_distribution<std::size_t> pick_l(0, p.actor.parameter_count() + p.log_std.size() - 1);
    for (int c = 0; c < coords; ++c) {
      const std::size_t ia = pick_a(rng);
      out.actor = std::max(out.actor, relative_error(g_actor[ia], central_difference(p.actor.parameters(), ia, h, actor_fn)));
      const std::size_t ic = pick_c(rng);
      out.critic = std::max(out.critic, relative_error(g.critic[ic], central_difference(p.critic.parameters(), ic, h, critic_fn)));
      const std::size_t il = pick_l(rng);
      if (il < p.actor.parameter_count()) {
        out.log_prob = std::max(out.log_prob, relative_error(g_lp.actor[il], central_difference(p.actor.parameters(), il, h, lp_fn)));
      } else {
        const std::size_t j = il - p.actor.parameter_count();
        out.log_prob = std::max(out.log_prob, relative_error(g_lp.log_std[j], central_difference(p.log_std, j, h, lp_fn)));
      }
      ++out.compared;
    }
  }
  return out;
}

}  // namespace oracle
