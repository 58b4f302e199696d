#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "gridrl/rng.hpp"

namespace gridrl {

/// PPO hyperparameters. Defaults follow the study settings (batch 64,
/// lr 1e-5, 256 steps per update, eps 0.2, 7e4 total steps, gamma 0.99);
/// everything is config-exposed and presets may override.
struct PPOConfig {
  double gamma = 0.99;
  double clip_eps = 0.2;
  double lr = 1e-5;
  int batch_size = 64;
  int steps_per_update = 256;
  long long total_steps = 70000;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  int epochs_per_update = 10;
  std::vector<int> hidden = {64, 64};
  double log_std_init = -0.5;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  int checkpoint_every_updates = 10;
};

PPOConfig ppo_config_from_json(const nlohmann::json& j, PPOConfig base = {});
nlohmann::json ppo_config_to_json(const PPOConfig& cfg);

/// Plain fully connected network with tanh hidden activations and a linear
/// output layer. Forward caches activations; backward accumulates gradients
/// and returns the input gradient.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, const std::vector<int>& hidden, int outputs,
      RandomStream& rng);

  Eigen::VectorXd forward(const Eigen::VectorXd& input);
  Eigen::VectorXd backward(const Eigen::VectorXd& output_grad);
  void zero_grads();

  std::size_t parameter_count() const;
  void flatten_params(Eigen::VectorXd& out, std::size_t offset) const;
  void flatten_grads(Eigen::VectorXd& out, std::size_t offset) const;
  void assign_params(const Eigen::VectorXd& flat, std::size_t offset);

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  int input_size() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().cols()); }
  int output_size() const { return weights_.empty() ? 0 : static_cast<int>(weights_.back().rows()); }

 private:
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::vector<Eigen::MatrixXd> weight_grads_;
  std::vector<Eigen::VectorXd> bias_grads_;
  // forward cache
  std::vector<Eigen::VectorXd> inputs_;       // input to each layer
  std::vector<Eigen::VectorXd> activations_;  // post-tanh per hidden layer
};

/// First/second-moment adaptive gradient descent over a flat parameter
/// vector.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t size);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr);

  nlohmann::json to_json() const;
  static Adam from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long long t_ = 0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
};

struct ActionSample {
  Eigen::VectorXd action;    // squashed, in [-1, 1]
  Eigen::VectorXd presquash; // Gaussian draw before tanh
  double log_prob = 0.0;
};

/// One agent's actor-critic state: a Gaussian policy (MLP mean, learned
/// per-action log-std clamped to [-5, 2], tanh squashing with the log-prob
/// Jacobian correction) plus an MLP value function and a shared Adam state.
class PolicyState {
 public:
  PolicyState() = default;
  PolicyState(int obs_dim, int act_dim, const PPOConfig& cfg,
              RandomStream& init_rng);

  ActionSample sample_action(const Eigen::VectorXd& obs, bool deterministic,
                             RandomStream& rng);
  double value(const Eigen::VectorXd& obs);
  /// log pi(action | obs) for a stored pre-squash draw under the current
  /// parameters (tanh Jacobian included).
  double log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& presquash);

  int obs_dim() const { return actor_.input_size(); }
  int act_dim() const { return static_cast<int>(log_std_.size()); }
  double entropy() const;  // diagonal Gaussian entropy at current log-std

  nlohmann::json to_json() const;
  static PolicyState from_json(const nlohmann::json& j);

  friend struct PpoBackprop;

 private:
  Mlp actor_;
  Eigen::VectorXd log_std_;
  Eigen::VectorXd log_std_grad_;
  Mlp critic_;
  Adam optimizer_;
  double log_std_min_ = -5.0;
  double log_std_max_ = 2.0;
};

/// Fixed-capacity on-policy buffer; an update may run only when full.
class RolloutBuffer {
 public:
  explicit RolloutBuffer(int capacity = 0) : capacity_(capacity) {}

  void push(const Eigen::VectorXd& obs, const Eigen::VectorXd& presquash,
            double log_prob, double reward, double value, bool done);
  bool full() const { return size_ == capacity_; }
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  void clear();

  const std::vector<Eigen::VectorXd>& observations() const { return obs_; }
  const std::vector<Eigen::VectorXd>& presquash() const { return presquash_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<char>& dones() const { return dones_; }

 private:
  int capacity_ = 0;
  int size_ = 0;
  std::vector<Eigen::VectorXd> obs_;
  std::vector<Eigen::VectorXd> presquash_;
  std::vector<double> log_probs_;
  std::vector<double> rewards_;
  std::vector<double> values_;
  std::vector<char> dones_;
};

struct GaeResult {
  Eigen::VectorXd advantages;  // raw; the update normalizes its own copy
  Eigen::VectorXd returns;
};

/// GAE(lambda) advantages and lambda-returns over a full buffer, episode
/// boundaries masked by the done flags; `bootstrap_value` is v(x_{T+1}) for
/// the state after the last stored transition (ignored when that transition
/// ended an episode). lambda = 1 with a single step reduces to the one-step
/// target r + gamma * v(x').
GaeResult compute_targets(const RolloutBuffer& buf, double gamma,
                          double lambda, double bootstrap_value);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double mean_reward = 0.0;  // over the consumed rollout
  bool aborted = false;
};

/// Clipped-surrogate update: epochs_per_update passes over shuffled
/// minibatches; policy loss -mean(min(r A, clip(r) A)), value loss
/// mse(v, returns), total = policy + value_coef * value - entropy_coef *
/// entropy. Advantages are normalized per update. Throws NonFiniteLoss and
/// keeps the previous parameters if any loss goes non-finite. The buffer is
/// cleared on success.
UpdateStats ppo_update(PolicyState& ps, RolloutBuffer& buf,
                       const PPOConfig& cfg, RandomStream& shuffle_rng,
                       double bootstrap_value = 0.0);

/// Sum of per-parameter losses over a crafted batch, used by the gradient
/// check: fills `grads` analytically and returns the scalar loss so tests
/// can difference it numerically.
double ppo_loss_and_grad(PolicyState& ps,
                         const std::vector<Eigen::VectorXd>& obs,
                         const std::vector<Eigen::VectorXd>& presquash,
                         const std::vector<double>& old_log_probs,
                         const std::vector<double>& advantages,
                         const std::vector<double>& returns,
                         const PPOConfig& cfg, Eigen::VectorXd& grads,
                         Eigen::VectorXd* params_out = nullptr);

/// Applies a flat parameter vector (actor, log_std, critic) - used by the
/// finite-difference gradient check.
void set_flat_params(PolicyState& ps, const Eigen::VectorXd& params);
Eigen::VectorXd get_flat_params(const PolicyState& ps);

}  // namespace gridrl
