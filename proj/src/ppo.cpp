#include "platoon/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "platoon/errors.hpp"
#include "platoon/kernels.hpp"

namespace platoon {

AdvantageEstimate gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                 std::span<const double> next_values,
                                 std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw InvalidInput("gae_advantages: series lengths differ");
  }
  AdvantageEstimate out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_values[t] * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

AdvantageEstimate gae_advantages(std::span<const Transition> batch, double gamma, double lambda) {
  std::vector<double> r, v, nv;
  std::vector<std::uint8_t> d;
  r.reserve(batch.size());
  v.reserve(batch.size());
  nv.reserve(batch.size());
  d.reserve(batch.size());
  for (const auto& t : batch) {
    r.push_back(t.truncated ? t.reward + gamma * t.next_value : t.reward);
    v.push_back(t.value);
    nv.push_back(t.next_value);
    d.push_back(t.done ? 1 : 0);
  }
  return gae_advantages(r, v, nv, d, gamma, lambda);
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_surrogate_slope(double ratio, double advantage, double epsilon) {
  if (advantage >= 0.0) return ratio <= 1.0 + epsilon ? advantage : 0.0;
  return ratio >= 1.0 - epsilon ? advantage : 0.0;
}

double critic_loss(std::span<const double> values, std::span<const double> targets) {
  if (values.size() != targets.size()) throw InvalidInput("critic_loss: lengths differ");
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = values[i] - targets[i];
    sum += e * e;
  }
  return sum / static_cast<double>(values.size());
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::descend(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw InvalidInput("Adam: parameter/gradient size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("trainer: gamma must be in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInput("trainer: lambda must be in (0, 1]");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw InvalidInput("trainer: clip epsilon must be in (0, 1)");
  }
  if (batch_size < 1 || epochs < 1 || minibatch_size < 1) {
    throw InvalidInput("trainer: batch, epochs and minibatch must be >= 1");
  }
  if (minibatch_size > batch_size) throw InvalidInput("trainer: minibatch larger than batch");
  if (actor_lr < 0.0 || critic_lr < 0.0) throw InvalidInput("trainer: negative learning rate");
  if (workers < 1) throw InvalidInput("trainer: need at least one worker");
  if (episodes_m1 < 0 || episodes_other < 0 || guided_episodes < 0 || undertrained_episodes < 0) {
    throw InvalidInput("trainer: episode counts must be non-negative");
  }
  if (horizon < 1) throw InvalidInput("trainer: horizon must be >= 1");
  if (!(imitation_weight >= 0.0)) throw InvalidInput("trainer: imitation_weight must be >= 0");
}

PpoLearner::PpoLearner(PolicyParameters initial, const TrainerConfig& config)
    : params_(std::move(initial)),
      config_(config),
      actor_opt_(params_.actor.parameter_count(), config.actor_lr),
      log_std_opt_(params_.log_std.size(), config.actor_lr),
      critic_opt_(params_.critic.parameter_count(), config.critic_lr) {
  config_.validate();
}

UpdateStats PpoLearner::update(std::span<const Transition> batch, std::mt19937_64& rng) {
  if (batch.size() < static_cast<std::size_t>(config_.minibatch_size)) {
    throw InvalidInput("global update: batch smaller than one minibatch");
  }
  auto est = gae_advantages(batch, config_.gamma, config_.lambda);
  std::vector<double> adv = est.advantages;
  if (config_.normalize_advantages && adv.size() > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / adv.size());
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  std::vector<kernels::MinibatchSample> samples(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    samples[i] = {&batch[i], adv[i], est.returns[i]};
  }

  const auto mb = static_cast<std::size_t>(config_.minibatch_size);
  const std::size_t n_minibatches = batch.size() / mb;
  std::vector<std::size_t> order(batch.size());
  std::vector<kernels::MinibatchSample> minibatch(mb);

  UpdateStats stats;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double surrogate = 0.0, value_loss = 0.0, ratio = 0.0;
    int clipped = 0;
    for (std::size_t m = 0; m < n_minibatches; ++m) {
      for (std::size_t i = 0; i < mb; ++i) minibatch[i] = samples[order[m * mb + i]];
      auto res = config_.parallel_kernels
                     ? kernels::minibatch_gradient_parallel(params_, minibatch, config_.clip_epsilon)
                     : kernels::minibatch_gradient_serial(params_, minibatch, config_.clip_epsilon);
      if (!std::isfinite(res.surrogate_sum) || !std::isfinite(res.value_loss_sum)) {
        throw NumericError("non-finite PPO loss at epoch " + std::to_string(epoch) +
                           ", minibatch " + std::to_string(m) + " (module size " +
                           std::to_string(params_.module_size) + ")");
      }
      // Ascent on the surrogate: descend its negation.
      for (double& g : res.grads.actor) g = -g;
      for (double& g : res.grads.log_std) g = -g;
      actor_opt_.descend(params_.actor.parameters(), res.grads.actor);
      log_std_opt_.descend(params_.log_std, res.grads.log_std);
      critic_opt_.descend(params_.critic.parameters(), res.grads.critic);

      surrogate += res.surrogate_sum;
      value_loss += res.value_loss_sum;
      ratio += res.ratio_sum;
      clipped += res.clipped;
      ++stats.minibatches;
    }
    const double seen = static_cast<double>(n_minibatches * mb);
    stats.surrogate = surrogate / seen;
    stats.value_loss = value_loss / seen;
    stats.mean_ratio = ratio / seen;
    stats.clip_fraction = clipped / seen;
    if (epoch == 0) {
      stats.first_epoch_mean_ratio = stats.mean_ratio;
      stats.first_epoch_surrogate = stats.surrogate;
    }
  }
  for (double v : params_.actor.parameters()) {
    if (!std::isfinite(v)) throw NumericError("actor parameters diverged");
  }
  ++params_.version;
  return stats;
}

double PpoLearner::imitate(std::span<const Transition> batch, std::mt19937_64& rng) {
  std::vector<const Transition*> guided;
  for (const auto& t : batch) {
    if (t.guided) guided.push_back(&t);
  }
  const auto mb = static_cast<std::size_t>(config_.minibatch_size);
  if (config_.imitation_weight <= 0.0 || guided.size() < mb) return 0.0;

  auto residual = [&](const Transition& t, Mlp::Tape* tape) {
    const Eigen::VectorXd mean = params_.actor.forward(params_.scale.normalize(t.obs), tape);
    return Eigen::VectorXd(mean - Eigen::Map<const Eigen::VectorXd>(t.action.data(), mean.size()));
  };
  double before = 0.0;
  for (const Transition* t : guided) before += 0.5 * residual(*t, nullptr).squaredNorm();
  before /= static_cast<double>(guided.size());
  if (!std::isfinite(before)) throw NumericError("imitation loss is not finite");

  Adam opt(params_.actor.parameter_count(), config_.actor_lr * config_.imitation_weight);
  std::vector<double> grad(params_.actor.parameter_count());
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(guided.begin(), guided.end(), rng);
    for (std::size_t m = 0; m + mb <= guided.size(); m += mb) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = m; i < m + mb; ++i) {
        Mlp::Tape tape;
        const Eigen::VectorXd err = residual(*guided[i], &tape);
        params_.actor.backward(tape, err / static_cast<double>(mb), grad);
      }
      opt.descend(params_.actor.parameters(), grad);
    }
  }
  for (double v : params_.actor.parameters()) {
    if (!std::isfinite(v)) throw NumericError("actor parameters diverged during imitation");
  }
  ++params_.version;
  return before;
}

std::vector<double> moving_average_reward(std::span<const double> history) {
  if (history.empty()) throw InvalidInput("moving_average_reward: empty history");
  std::vector<double> out(history.size());
  out[0] = history[0];
  for (std::size_t i = 1; i < history.size(); ++i) out[i] = 0.9 * out[i - 1] + 0.1 * history[i];
  return out;
}

}  // namespace platoon
