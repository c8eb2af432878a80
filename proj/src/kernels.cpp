#include "platoon/kernels.hpp"

#include <cmath>

#ifdef PLATOON_HAVE_OPENMP
#include <omp.h>
#endif

namespace platoon::kernels {

namespace {

void accumulate_sample(const PolicyParameters& params, const MinibatchSample& s, double epsilon,
                       double inv_n, MinibatchResult& acc) {
  const Transition& t = *s.transition;
  const Eigen::VectorXd action =
      Eigen::Map<const Eigen::VectorXd>(t.action.data(), static_cast<Eigen::Index>(t.action.size()));

  const LogProbPass pass = log_prob_forward(params, t.obs, action);
  const double ratio = std::exp(pass.log_prob - t.log_prob);
  acc.surrogate_sum += clipped_surrogate(ratio, s.advantage, epsilon);
  acc.ratio_sum += ratio;
  if (std::abs(ratio - 1.0) > epsilon) ++acc.clipped;
  const double slope = clipped_surrogate_slope(ratio, s.advantage, epsilon);
  if (slope != 0.0) log_prob_backward(params, pass, slope * ratio * inv_n, acc.grads);

  Mlp::Tape tape;
  const double value = params.critic.forward(params.scale.normalize(t.obs), &tape)[0];
  const double err = value - s.target;
  acc.value_loss_sum += err * err;
  Eigen::VectorXd dy(1);
  dy[0] = 2.0 * err * inv_n;
  params.critic.backward(tape, dy, acc.grads.critic);
}

void merge(MinibatchResult& into, const MinibatchResult& part) {
  into.grads += part.grads;
  into.surrogate_sum += part.surrogate_sum;
  into.value_loss_sum += part.value_loss_sum;
  into.ratio_sum += part.ratio_sum;
  into.clipped += part.clipped;
}

std::vector<MinibatchResult> empty_parts(const PolicyParameters& params) {
  std::vector<MinibatchResult> parts(kReductionChunks);
  for (auto& p : parts) p.grads = PolicyGradients::zeros_like(params);
  return parts;
}

void accumulate_chunk(const PolicyParameters& params, std::span<const MinibatchSample> samples,
                      int c, double epsilon, double inv_n, std::vector<MinibatchResult>& parts) {
  const std::size_t n = samples.size();
  const std::size_t begin = n * static_cast<std::size_t>(c) / kReductionChunks;
  const std::size_t end = n * static_cast<std::size_t>(c + 1) / kReductionChunks;
  for (std::size_t i = begin; i < end; ++i) {
    accumulate_sample(params, samples[i], epsilon, inv_n, parts[static_cast<std::size_t>(c)]);
  }
}

MinibatchResult merge_parts(std::vector<MinibatchResult> parts) {
  MinibatchResult total = std::move(parts[0]);
  for (std::size_t c = 1; c < parts.size(); ++c) merge(total, parts[c]);
  return total;
}

}  // namespace

// Both versions accumulate the same fixed chunks and merge them in chunk
// order, so they agree bit for bit.
MinibatchResult minibatch_gradient_serial(const PolicyParameters& params,
                                          std::span<const MinibatchSample> samples,
                                          double epsilon) {
  auto parts = empty_parts(params);
  const std::size_t n = samples.size();
  if (n == 0) return std::move(parts[0]);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int c = 0; c < kReductionChunks; ++c) accumulate_chunk(params, samples, c, epsilon, inv_n, parts);
  return merge_parts(std::move(parts));
}

MinibatchResult minibatch_gradient_parallel(const PolicyParameters& params,
                                            std::span<const MinibatchSample> samples,
                                            double epsilon) {
  auto parts = empty_parts(params);
  const std::size_t n = samples.size();
  if (n == 0) return std::move(parts[0]);
  const double inv_n = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kReductionChunks; ++c) accumulate_chunk(params, samples, c, epsilon, inv_n, parts);
  return merge_parts(std::move(parts));
}

}  // namespace platoon::kernels
