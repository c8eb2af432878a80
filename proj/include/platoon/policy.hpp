#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "platoon/env.hpp"

namespace platoon {

struct MlpSpec {
  int input_dim = 4;
  std::vector<int> hidden{64, 64};
  int output_dim = 1;

  std::size_t parameter_count() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Fully connected network, tanh hidden layers, linear output. Parameters
/// live in one flat buffer laid out per layer as W (column-major, out x in)
/// followed by b.
class Mlp {
 public:
  /// Intermediate activations of one forward pass; input first, output excluded.
  struct Tape {
    std::vector<Eigen::VectorXd> activations;
  };

  Mlp() = default;
  explicit Mlp(MlpSpec spec);  // all-zero parameters

  const MlpSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Glorot-uniform weights, zero biases; the output layer is scaled by `output_gain`.
  void initialize(std::mt19937_64& rng, double output_gain);

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Tape* tape = nullptr) const;

  /// Accumulates dL/dparams into `grad` given dL/dy for the pass recorded in `tape`.
  void backward(const Tape& tape, const Eigen::VectorXd& dy, std::span<double> grad) const;

  bool operator==(const Mlp&) const = default;

 private:
  struct LayerView {
    std::size_t offset = 0;
    int in = 0;
    int out = 0;

    bool operator==(const LayerView&) const = default;
  };

  MlpSpec spec_;
  std::vector<LayerView> layers_;
  std::vector<double> params_;
};

/// Feature scaling applied before the networks: v / 124, g / 100, dv / 10, dd / 10.
struct ObservationScale {
  double speed = 124.0;
  double gap = 100.0;
  double delta_v = 10.0;
  double delta_d = 10.0;

  Eigen::VectorXd normalize(const ModuleObservation& obs) const;
  ModuleObservation denormalize(const Eigen::VectorXd& features) const;
  bool operator==(const ObservationScale&) const = default;
};

struct PolicyOptions {
  std::vector<int> hidden{64, 64};
  double initial_log_std = 1.0;  // ln(e ft/s^2): wide early exploration
  ObservationScale scale;
  bool operator==(const PolicyOptions&) const = default;
};

/// Actor (k Gaussian means), state-independent log-stds and critic for one
/// module size. `version` increases on every published update.
struct PolicyParameters {
  int module_size = 1;
  Mlp actor;
  std::vector<double> log_std;
  Mlp critic;
  ObservationScale scale;
  std::uint64_t version = 0;

  PolicyParameters() = default;
  /// Zero weights everywhere; log-stds set to `options.initial_log_std`.
  PolicyParameters(int module_size, const PolicyOptions& options);

  /// Randomly initialized networks, deterministic per seed.
  static PolicyParameters initialized(int module_size, std::uint64_t seed,
                                      const PolicyOptions& options = {});

  bool operator==(const PolicyParameters&) const = default;
};

struct PolicyGradients {
  std::vector<double> actor;
  std::vector<double> log_std;
  std::vector<double> critic;

  static PolicyGradients zeros_like(const PolicyParameters& params);
  PolicyGradients& operator+=(const PolicyGradients& other);
  PolicyGradients& operator*=(double s);
};

struct ActorOutput {
  Eigen::VectorXd means;  // ft/s^2
  Eigen::VectorXd stds;
};

/// Throws InvalidInput when obs.size() != module_size.
ActorOutput actor_forward(const PolicyParameters& params, const ModuleObservation& obs);
double critic_forward(const PolicyParameters& params, const ModuleObservation& obs);

/// Exact diagonal-Gaussian log-density.
double gaussian_log_prob(const Eigen::VectorXd& means, const Eigen::VectorXd& stds,
                         const Eigen::VectorXd& action);

/// Forward pass of log pi(action | obs) with the tape kept for a later backward.
struct LogProbPass {
  Mlp::Tape tape;
  Eigen::VectorXd means;
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

LogProbPass log_prob_forward(const PolicyParameters& params, const ModuleObservation& obs,
                             const Eigen::VectorXd& action);
void log_prob_backward(const PolicyParameters& params, const LogProbPass& pass, double adjoint,
                       PolicyGradients& grads);

/// log pi(action | obs), evaluated exactly as the training update evaluates it.
double policy_log_prob(const PolicyParameters& params, const ModuleObservation& obs,
                       const Eigen::VectorXd& action);

/// log pi(action | obs); accumulates adjoint * d(log pi)/d(actor, log_std).
double backward_log_prob(const PolicyParameters& params, const ModuleObservation& obs,
                         const Eigen::VectorXd& action, double adjoint, PolicyGradients& grads);

/// V(obs); accumulates adjoint * dV/d(critic).
double backward_value(const PolicyParameters& params, const ModuleObservation& obs,
                      double adjoint, PolicyGradients& grads);

/// Unclamped Gaussian sample; clamping happens in the environment.
Eigen::VectorXd sample_action(const ActorOutput& dist, std::mt19937_64& rng);

/// Deployment action: the distribution mean.
inline Eigen::VectorXd mean_action(const ActorOutput& dist) { return dist.means; }

ModuleAction to_module_action(const Eigen::VectorXd& a);

/// Structured-text checkpoint; doubles are written in shortest round-trip form
/// so a reload reproduces outputs bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params);
PolicyParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace platoon
