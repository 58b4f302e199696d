#include "gridrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gridrl/errors.hpp"

namespace gridrl {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
constexpr double kLog2 = 0.6931471805599453;

// log(1 - tanh(z)^2) in a form that stays finite for large |z|.
double log_tanh_jacobian(double z) {
  return 2.0 * (kLog2 - z - std::log1p(std::exp(-2.0 * z)));
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

PPOConfig ppo_config_from_json(const nlohmann::json& j, PPOConfig base) {
  PPOConfig cfg = base;
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.clip_eps = j.value("clip_eps", cfg.clip_eps);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.steps_per_update = j.value("steps_per_update", cfg.steps_per_update);
  cfg.total_steps = j.value("total_steps", cfg.total_steps);
  cfg.gae_lambda = j.value("gae_lambda", cfg.gae_lambda);
  cfg.value_coef = j.value("value_coef", cfg.value_coef);
  cfg.entropy_coef = j.value("entropy_coef", cfg.entropy_coef);
  cfg.epochs_per_update = j.value("epochs_per_update", cfg.epochs_per_update);
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::vector<int>>();
  cfg.log_std_init = j.value("log_std_init", cfg.log_std_init);
  cfg.checkpoint_every_updates =
      j.value("checkpoint_every_updates", cfg.checkpoint_every_updates);
  if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0) throw ConfigError("gamma must lie in (0, 1)");
  if (cfg.clip_eps <= 0.0) throw ConfigError("clip_eps must be positive");
  return cfg;
}

nlohmann::json ppo_config_to_json(const PPOConfig& cfg) {
  return {{"gamma", cfg.gamma},
          {"clip_eps", cfg.clip_eps},
          {"lr", cfg.lr},
          {"batch_size", cfg.batch_size},
          {"steps_per_update", cfg.steps_per_update},
          {"total_steps", cfg.total_steps},
          {"gae_lambda", cfg.gae_lambda},
          {"value_coef", cfg.value_coef},
          {"entropy_coef", cfg.entropy_coef},
          {"epochs_per_update", cfg.epochs_per_update},
          {"hidden", cfg.hidden},
          {"log_std_init", cfg.log_std_init},
          {"checkpoint_every_updates", cfg.checkpoint_every_updates}};
}

Mlp::Mlp(int inputs, const std::vector<int>& hidden, int outputs,
         RandomStream& rng) {
  std::vector<int> sizes;
  sizes.push_back(inputs);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    Eigen::MatrixXd w(out, in);
    const double limit = std::sqrt(6.0 / (in + out));
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-limit, limit);
    }
    weights_.push_back(w);
    biases_.push_back(Eigen::VectorXd::Zero(out));
    weight_grads_.push_back(Eigen::MatrixXd::Zero(out, in));
    bias_grads_.push_back(Eigen::VectorXd::Zero(out));
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) {
  inputs_.assign(1, input);
  activations_.clear();
  Eigen::VectorXd x = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * x + biases_[l];
    if (l + 1 < weights_.size()) {
      x = z.array().tanh().matrix();
      activations_.push_back(x);
      inputs_.push_back(x);
    } else {
      x = z;
    }
  }
  return x;
}

Eigen::VectorXd Mlp::backward(const Eigen::VectorXd& output_grad) {
  Eigen::VectorXd g = output_grad;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    weight_grads_[l].noalias() += g * inputs_[l].transpose();
    bias_grads_[l] += g;
    Eigen::VectorXd upstream = weights_[l].transpose() * g;
    if (l > 0) {
      const Eigen::VectorXd& a = activations_[l - 1];
      g = (upstream.array() * (1.0 - a.array().square())).matrix();
    } else {
      g = upstream;
    }
  }
  return g;
}

void Mlp::zero_grads() {
  for (auto& w : weight_grads_) w.setZero();
  for (auto& b : bias_grads_) b.setZero();
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size()) +
         static_cast<std::size_t>(biases_[l].size());
  }
  return n;
}

void Mlp::flatten_params(Eigen::VectorXd& out, std::size_t offset) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) {
      out(static_cast<Eigen::Index>(offset++)) = weights_[l].data()[i];
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      out(static_cast<Eigen::Index>(offset++)) = biases_[l](i);
    }
  }
}

void Mlp::flatten_grads(Eigen::VectorXd& out, std::size_t offset) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weight_grads_[l].size(); ++i) {
      out(static_cast<Eigen::Index>(offset++)) = weight_grads_[l].data()[i];
    }
    for (Eigen::Index i = 0; i < bias_grads_[l].size(); ++i) {
      out(static_cast<Eigen::Index>(offset++)) = bias_grads_[l](i);
    }
  }
}

void Mlp::assign_params(const Eigen::VectorXd& flat, std::size_t offset) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) {
      weights_[l].data()[i] = flat(static_cast<Eigen::Index>(offset++));
    }
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) {
      biases_[l](i) = flat(static_cast<Eigen::Index>(offset++));
    }
  }
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
        row.push_back(weights_[l](r, c));
      }
      w.push_back(row);
    }
    j["layers"].push_back({{"w", w}, {"b", vector_to_json(biases_[l])}});
  }
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp mlp;
  for (const auto& jl : j.at("layers")) {
    const auto& jw = jl.at("w");
    const Eigen::Index rows = static_cast<Eigen::Index>(jw.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(jw[0].size());
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        w(r, c) = jw[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
      }
    }
    mlp.weights_.push_back(w);
    mlp.biases_.push_back(vector_from_json(jl.at("b")));
    mlp.weight_grads_.push_back(Eigen::MatrixXd::Zero(rows, cols));
    mlp.bias_grads_.push_back(Eigen::VectorXd::Zero(rows));
  }
  return mlp;
}

Adam::Adam(std::size_t size)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                double lr) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grads;
  v_ = beta2_ * v_.array().matrix() +
       (1.0 - beta2_) * grads.array().square().matrix();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / bias1) /
                    ((v_.array() / bias2).sqrt() + eps_);
}

nlohmann::json Adam::to_json() const {
  return {{"m", vector_to_json(m_)},
          {"v", vector_to_json(v_)},
          {"t", t_},
          {"beta1", beta1_},
          {"beta2", beta2_},
          {"eps", eps_}};
}

Adam Adam::from_json(const nlohmann::json& j) {
  Adam adam;
  adam.m_ = vector_from_json(j.at("m"));
  adam.v_ = vector_from_json(j.at("v"));
  adam.t_ = j.at("t").get<long long>();
  adam.beta1_ = j.value("beta1", 0.9);
  adam.beta2_ = j.value("beta2", 0.999);
  adam.eps_ = j.value("eps", 1e-8);
  return adam;
}

PolicyState::PolicyState(int obs_dim, int act_dim, const PPOConfig& cfg,
                         RandomStream& init_rng)
    : actor_(obs_dim, cfg.hidden, act_dim, init_rng),
      log_std_(Eigen::VectorXd::Constant(act_dim, cfg.log_std_init)),
      log_std_grad_(Eigen::VectorXd::Zero(act_dim)),
      critic_(obs_dim, cfg.hidden, 1, init_rng),
      log_std_min_(cfg.log_std_min),
      log_std_max_(cfg.log_std_max) {
  optimizer_ = Adam(actor_.parameter_count() +
                    static_cast<std::size_t>(act_dim) +
                    critic_.parameter_count());
}

ActionSample PolicyState::sample_action(const Eigen::VectorXd& obs,
                                        bool deterministic,
                                        RandomStream& rng) {
  const Eigen::VectorXd mean = actor_.forward(obs);
  ActionSample out;
  out.presquash = mean;
  if (!deterministic) {
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      out.presquash(i) += std::exp(log_std_(i)) * rng.normal();
    }
  }
  out.action = out.presquash.array().tanh().matrix();
  out.log_prob = log_prob(obs, out.presquash);
  return out;
}

double PolicyState::value(const Eigen::VectorXd& obs) {
  return critic_.forward(obs)(0);
}

double PolicyState::log_prob(const Eigen::VectorXd& obs,
                             const Eigen::VectorXd& presquash) {
  const Eigen::VectorXd mean = actor_.forward(obs);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double sigma = std::exp(log_std_(i));
    const double zscore = (presquash(i) - mean(i)) / sigma;
    lp += -0.5 * zscore * zscore - log_std_(i) - 0.5 * kLog2Pi;
    lp -= log_tanh_jacobian(presquash(i));
  }
  return lp;
}

double PolicyState::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_std_.size(); ++i) {
    h += log_std_(i) + 0.5 * (1.0 + kLog2Pi);
  }
  return h;
}

nlohmann::json PolicyState::to_json() const {
  return {{"actor", actor_.to_json()},
          {"log_std", vector_to_json(log_std_)},
          {"critic", critic_.to_json()},
          {"adam", optimizer_.to_json()},
          {"log_std_min", log_std_min_},
          {"log_std_max", log_std_max_}};
}

PolicyState PolicyState::from_json(const nlohmann::json& j) {
  PolicyState ps;
  ps.actor_ = Mlp::from_json(j.at("actor"));
  ps.log_std_ = vector_from_json(j.at("log_std"));
  ps.log_std_grad_ = Eigen::VectorXd::Zero(ps.log_std_.size());
  ps.critic_ = Mlp::from_json(j.at("critic"));
  ps.optimizer_ = Adam::from_json(j.at("adam"));
  ps.log_std_min_ = j.value("log_std_min", -5.0);
  ps.log_std_max_ = j.value("log_std_max", 2.0);
  return ps;
}

void RolloutBuffer::push(const Eigen::VectorXd& obs,
                         const Eigen::VectorXd& presquash, double log_prob,
                         double reward, double value, bool done) {
  if (full()) throw ConfigError("rollout buffer is already full");
  obs_.push_back(obs);
  presquash_.push_back(presquash);
  log_probs_.push_back(log_prob);
  rewards_.push_back(reward);
  values_.push_back(value);
  dones_.push_back(done ? 1 : 0);
  ++size_;
}

void RolloutBuffer::clear() {
  obs_.clear();
  presquash_.clear();
  log_probs_.clear();
  rewards_.clear();
  values_.clear();
  dones_.clear();
  size_ = 0;
}

GaeResult compute_targets(const RolloutBuffer& buf, double gamma,
                          double lambda, double bootstrap_value) {
  const int n = buf.size();
  GaeResult out;
  out.advantages = Eigen::VectorXd::Zero(n);
  out.returns = Eigen::VectorXd::Zero(n);
  double gae = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double not_done = buf.dones()[i] ? 0.0 : 1.0;
    const double next_value =
        (i == n - 1) ? bootstrap_value : buf.values()[i + 1];
    const double delta = buf.rewards()[i] +
                         gamma * next_value * not_done - buf.values()[i];
    gae = delta + gamma * lambda * not_done * gae;
    out.advantages(i) = gae;
    out.returns(i) = gae + buf.values()[i];
  }
  return out;
}

struct PpoBackprop {
  static Mlp& actor(PolicyState& ps) { return ps.actor_; }
  static Mlp& critic(PolicyState& ps) { return ps.critic_; }
  static Eigen::VectorXd& log_std(PolicyState& ps) { return ps.log_std_; }
  static Eigen::VectorXd& log_std_grad(PolicyState& ps) { return ps.log_std_grad_; }
  static Adam& optimizer(PolicyState& ps) { return ps.optimizer_; }
  static double clamp_lo(PolicyState& ps) { return ps.log_std_min_; }
  static double clamp_hi(PolicyState& ps) { return ps.log_std_max_; }
};

Eigen::VectorXd get_flat_params(const PolicyState& ps) {
  PolicyState& mut = const_cast<PolicyState&>(ps);
  Mlp& actor = PpoBackprop::actor(mut);
  Mlp& critic = PpoBackprop::critic(mut);
  Eigen::VectorXd& log_std = PpoBackprop::log_std(mut);
  Eigen::VectorXd flat(actor.parameter_count() + log_std.size() +
                       critic.parameter_count());
  actor.flatten_params(flat, 0);
  std::size_t off = actor.parameter_count();
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    flat(static_cast<Eigen::Index>(off++)) = log_std(i);
  }
  critic.flatten_params(flat, off);
  return flat;
}

void set_flat_params(PolicyState& ps, const Eigen::VectorXd& params) {
  Mlp& actor = PpoBackprop::actor(ps);
  Mlp& critic = PpoBackprop::critic(ps);
  Eigen::VectorXd& log_std = PpoBackprop::log_std(ps);
  actor.assign_params(params, 0);
  std::size_t off = actor.parameter_count();
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    log_std(i) = params(static_cast<Eigen::Index>(off++));
  }
  critic.assign_params(params, off);
}

double ppo_loss_and_grad(PolicyState& ps,
                         const std::vector<Eigen::VectorXd>& obs,
                         const std::vector<Eigen::VectorXd>& presquash,
                         const std::vector<double>& old_log_probs,
                         const std::vector<double>& advantages,
                         const std::vector<double>& returns,
                         const PPOConfig& cfg, Eigen::VectorXd& grads,
                         Eigen::VectorXd* params_out) {
  Mlp& actor = PpoBackprop::actor(ps);
  Mlp& critic = PpoBackprop::critic(ps);
  Eigen::VectorXd& log_std = PpoBackprop::log_std(ps);
  Eigen::VectorXd& log_std_grad = PpoBackprop::log_std_grad(ps);

  actor.zero_grads();
  critic.zero_grads();
  log_std_grad.setZero();

  const double n = static_cast<double>(obs.size());
  double policy_loss = 0.0;
  double value_loss = 0.0;

  for (std::size_t i = 0; i < obs.size(); ++i) {
    // Policy term.
    const Eigen::VectorXd mean = actor.forward(obs[i]);
    double logp = 0.0;
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      const double sigma = std::exp(log_std(k));
      const double zscore = (presquash[i](k) - mean(k)) / sigma;
      logp += -0.5 * zscore * zscore - log_std(k) - 0.5 * kLog2Pi;
      logp -= log_tanh_jacobian(presquash[i](k));
    }
    const double ratio = std::exp(logp - old_log_probs[i]);
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    const double surr1 = ratio * advantages[i];
    const double surr2 = clipped * advantages[i];
    policy_loss += -std::min(surr1, surr2) / n;

    // d(-min)/dlogp is nonzero only while the unclipped branch is active.
    if (surr1 <= surr2) {
      const double dloss_dlogp = -advantages[i] * ratio / n;
      Eigen::VectorXd dmean(mean.size());
      for (Eigen::Index k = 0; k < mean.size(); ++k) {
        const double sigma = std::exp(log_std(k));
        const double diff = presquash[i](k) - mean(k);
        dmean(k) = dloss_dlogp * diff / (sigma * sigma);
        log_std_grad(k) +=
            dloss_dlogp * (diff * diff / (sigma * sigma) - 1.0);
      }
      actor.forward(obs[i]);  // restore cache for this sample
      actor.backward(dmean);
    }

    // Value term.
    const double v = critic.forward(obs[i])(0);
    const double err = v - returns[i];
    value_loss += err * err / n;
    Eigen::VectorXd dv(1);
    dv(0) = cfg.value_coef * 2.0 * err / n;
    critic.backward(dv);
  }

  // Entropy bonus: d entropy / d log_std_k = 1.
  const double entropy = ps.entropy();
  log_std_grad.array() -= cfg.entropy_coef;

  const double total =
      policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy;

  const std::size_t actor_n = actor.parameter_count();
  const std::size_t critic_n = critic.parameter_count();
  grads.resize(static_cast<Eigen::Index>(actor_n + log_std.size() + critic_n));
  actor.flatten_grads(grads, 0);
  std::size_t off = actor_n;
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    grads(static_cast<Eigen::Index>(off++)) = log_std_grad(i);
  }
  critic.flatten_grads(grads, off);

  if (params_out != nullptr) *params_out = get_flat_params(ps);
  return total;
}

UpdateStats ppo_update(PolicyState& ps, RolloutBuffer& buf,
                       const PPOConfig& cfg, RandomStream& shuffle_rng,
                       double bootstrap_value) {
  if (!buf.full()) {
    throw ConfigError("ppo_update requires a full rollout buffer");
  }
  const GaeResult targets =
      compute_targets(buf, cfg.gamma, cfg.gae_lambda, bootstrap_value);

  // Per-update advantage normalization.
  Eigen::VectorXd adv = targets.advantages;
  const double mean = adv.mean();
  const double stddev =
      std::sqrt((adv.array() - mean).square().sum() / adv.size());
  adv = ((adv.array() - mean) / (stddev + 1e-8)).matrix();

  const Eigen::VectorXd initial_params = get_flat_params(ps);
  const int n = buf.size();
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  UpdateStats stats;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    shuffle_rng.shuffle(indices);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(start + cfg.batch_size, n);
      std::vector<Eigen::VectorXd> mb_obs;
      std::vector<Eigen::VectorXd> mb_presquash;
      std::vector<double> mb_logp;
      std::vector<double> mb_adv;
      std::vector<double> mb_ret;
      for (int i = start; i < stop; ++i) {
        const int k = indices[i];
        mb_obs.push_back(buf.observations()[k]);
        mb_presquash.push_back(buf.presquash()[k]);
        mb_logp.push_back(buf.log_probs()[k]);
        mb_adv.push_back(adv(k));
        mb_ret.push_back(targets.returns(k));
      }
      Eigen::VectorXd grads;
      const double loss = ppo_loss_and_grad(ps, mb_obs, mb_presquash, mb_logp,
                                            mb_adv, mb_ret, cfg, grads);
      if (!std::isfinite(loss) || !grads.allFinite()) {
        set_flat_params(ps, initial_params);
        throw NonFiniteLoss("ppo update produced a non-finite loss");
      }
      Eigen::VectorXd params = get_flat_params(ps);
      PpoBackprop::optimizer(ps).step(params, grads, cfg.lr);
      set_flat_params(ps, params);
      Eigen::VectorXd& log_std = PpoBackprop::log_std(ps);
      for (Eigen::Index i = 0; i < log_std.size(); ++i) {
        log_std(i) = std::clamp(log_std(i), PpoBackprop::clamp_lo(ps),
                                PpoBackprop::clamp_hi(ps));
      }
    }
  }

  // Diagnostics against the new parameters over the whole rollout.
  double sum_ratio = 0.0;
  double clip_count = 0.0;
  double sum_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double logp = ps.log_prob(buf.observations()[i], buf.presquash()[i]);
    const double ratio = std::exp(logp - buf.log_probs()[i]);
    sum_ratio += ratio;
    if (std::abs(ratio - 1.0) > cfg.clip_eps) clip_count += 1.0;
    sum_kl += buf.log_probs()[i] - logp;
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    policy_loss += -std::min(ratio * adv(i), clipped * adv(i)) / n;
    const double err = ps.value(buf.observations()[i]) - targets.returns(i);
    value_loss += err * err / n;
  }
  stats.mean_ratio = sum_ratio / n;
  stats.clip_fraction = clip_count / n;
  stats.approx_kl = sum_kl / n;
  stats.policy_loss = policy_loss;
  stats.value_loss = value_loss;
  stats.entropy = ps.entropy();
  stats.mean_reward =
      std::accumulate(buf.rewards().begin(), buf.rewards().end(), 0.0) / n;
  buf.clear();
  return stats;
}

}  // namespace gridrl
