#pragma once

// Data-parallel hot loops of the trainer. Each kernel has an OpenMP version
// and a serial reference. Both split the work into the same fixed chunks and
// reduce them in chunk order, so results are bit-identical to each other and
// independent of the thread count.

#include <span>
#include <vector>

#include "platoon/policy.hpp"
#include "platoon/ppo.hpp"

namespace platoon::kernels {

inline constexpr int kReductionChunks = 8;

struct MinibatchSample {
  const Transition* transition = nullptr;
  double advantage = 0.0;
  double target = 0.0;  // return target for the critic
};

struct MinibatchResult {
  PolicyGradients grads;      // actor/log_std: d(mean surrogate); critic: d(mean loss)
  double surrogate_sum = 0.0;
  double value_loss_sum = 0.0;
  double ratio_sum = 0.0;
  int clipped = 0;
};

MinibatchResult minibatch_gradient_serial(const PolicyParameters& params,
                                          std::span<const MinibatchSample> samples,
                                          double epsilon);

MinibatchResult minibatch_gradient_parallel(const PolicyParameters& params,
                                            std::span<const MinibatchSample> samples,
                                            double epsilon);

}  // namespace platoon::kernels
