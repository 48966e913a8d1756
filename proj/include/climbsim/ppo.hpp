#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "climbsim/mlp.hpp"
#include "climbsim/policy.hpp"
#include "climbsim/rng.hpp"

namespace climbsim {

struct PpoConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int rollout_steps = 100;   // per environment, per iteration
  int epochs = 4;
  int minibatches = 4;
  double entropy_coef = 0.005;
  double value_coef = 0.5;
  double estimator_coef = 1.0;
  double max_grad_norm = 1.0;

  static PpoConfig from_config(const Config& c) {
    PpoConfig p;
    p.clip_ratio = c.get_double("ppo.clip_ratio", p.clip_ratio);
    p.gamma = c.get_double("ppo.gamma", p.gamma);
    p.gae_lambda = c.get_double("ppo.gae_lambda", p.gae_lambda);
    p.learning_rate = c.get_double("ppo.learning_rate", p.learning_rate);
    p.rollout_steps = c.get_int("ppo.rollout_steps", p.rollout_steps);
    p.epochs = c.get_int("ppo.epochs", p.epochs);
    p.minibatches = c.get_int("ppo.minibatches", p.minibatches);
    p.entropy_coef = c.get_double("ppo.entropy_coef", p.entropy_coef);
    p.value_coef = c.get_double("ppo.value_coef", p.value_coef);
    p.estimator_coef = c.get_double("ppo.estimator_coef", p.estimator_coef);
    return p;
  }
};

struct TrainingBatch {
  std::vector<VecX> observations;     // raw (un-normalized) observations
  std::vector<VecX> actions;
  std::vector<double> log_probs;      // behavior log-probs
  std::vector<double> rewards;
  std::vector<double> value_targets;
  std::vector<double> advantages;
  std::vector<VecX> estimator_inputs;
  std::vector<VecX> privileged_labels;  // base vel (3) + heights (4) + contacts (4)

  size_t size() const { return observations.size(); }

  /// Zero-mean unit-variance advantages with an epsilon guard.
  void normalize_advantages() {
    const size_t n = advantages.size();
    if (n == 0) return;
    double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
    double var = 0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= n;
    const double denom = std::sqrt(var) + 1e-8;
    for (double& a : advantages) a = (a - mean) / denom;
  }
};

/// Generalized advantage estimation over one trajectory segment.
/// values has length T+1 (bootstrap value last); dones[t] cuts the
/// trajectory after step t (no bootstrap across the cut).
inline void gae(const std::vector<double>& rewards,
                const std::vector<double>& values,
                const std::vector<int>& dones, double gamma, double lambda,
                std::vector<double>* advantages,
                std::vector<double>* value_targets) {
  const int T = static_cast<int>(rewards.size());
  advantages->assign(T, 0.0);
  value_targets->assign(T, 0.0);
  double last_adv = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double delta =
        rewards[t] + gamma * values[t + 1] * not_done - values[t];
    last_adv = delta + gamma * lambda * not_done * last_adv;
    (*advantages)[t] = last_adv;
    (*value_targets)[t] = last_adv + values[t];
  }
}

struct PolicyLossStats {
  double policy_loss = 0;
  double entropy = 0;
  double kl = 0;
  double clip_fraction = 0;
};

/// Clipped-surrogate loss plus entropy bonus over a set of samples.
/// Gradients are accumulated into `actor` and returned for log_std.
/// Factored out so tests can finite-difference it directly.
inline PolicyLossStats policy_loss_and_grad(
    Mlp& actor, const VecX& log_std, const ObsNormalizer& norm,
    const std::vector<VecX>& observations, const std::vector<VecX>& actions,
    const std::vector<double>& log_probs_old,
    const std::vector<double>& advantages, const std::vector<size_t>& idx,
    double clip_ratio, double entropy_coef, VecX* log_std_grad) {
  PolicyLossStats stats;
  const int ad = static_cast<int>(log_std.size());
  *log_std_grad = VecX::Zero(ad);
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  for (size_t k : idx) {
    const VecX mean = actor.forward(norm.apply(observations[k]));
    const double lp = gaussian_log_prob(actions[k], mean, log_std);
    const double ratio = std::exp(lp - log_probs_old[k]);
    const double adv = advantages[k];
    const double surr1 = ratio * adv;
    const double clipped = clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    const double surr2 = clipped * adv;
    stats.policy_loss += -std::min(surr1, surr2) * inv_n;
    stats.kl += (log_probs_old[k] - lp) * inv_n;
    if (surr1 > surr2) stats.clip_fraction += inv_n;

    // gradient flows only through the unclipped branch
    double dL_dlp = 0.0;
    if (surr1 <= surr2) dL_dlp = -adv * ratio * inv_n;
    VecX dL_dmean(ad);
    for (int i = 0; i < ad; ++i) {
      const double s = std::exp(log_std[i]);
      const double z = (actions[k][i] - mean[i]) / s;
      dL_dmean[i] = dL_dlp * (-z / s) * -1.0;  // dlp/dmean = z/s
      (*log_std_grad)[i] += dL_dlp * (z * z - 1.0);
    }
    actor.backward(dL_dmean);
  }
  stats.entropy = gaussian_entropy(log_std);
  // entropy bonus: -entropy_coef * H, dH/dlog_std = 1
  for (int i = 0; i < ad; ++i) (*log_std_grad)[i] -= entropy_coef;
  return stats;
}

/// 0.5 * (v - target)^2 averaged over the minibatch; gradients into critic.
inline double value_loss_and_grad(Mlp& critic, const ObsNormalizer& norm,
                                  const std::vector<VecX>& observations,
                                  const std::vector<double>& targets,
                                  const std::vector<size_t>& idx) {
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  for (size_t k : idx) {
    const VecX v = critic.forward(norm.apply(observations[k]));
    const double err = v[0] - targets[k];
    loss += 0.5 * err * err * inv_n;
    VecX d(1);
    d[0] = err * inv_n;
    critic.backward(d);
  }
  return loss;
}

/// MSE on the privileged labels (contact head through a sigmoid).
inline double estimator_loss_and_grad(Mlp& estimator,
                                      const std::vector<VecX>& inputs,
                                      const std::vector<VecX>& labels,
                                      const std::vector<size_t>& idx) {
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  for (size_t k : idx) {
    const VecX y = estimator.forward(inputs[k]);
    VecX d(kEstimatorOutputDim);
    for (int i = 0; i < 7; ++i) {
      const double err = y[i] - labels[k][i];
      loss += 0.5 * err * err * inv_n;
      d[i] = err * inv_n;
    }
    for (int i = 7; i < kEstimatorOutputDim; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-y[i]));
      const double err = p - labels[k][i];
      loss += 0.5 * err * err * inv_n;
      d[i] = err * p * (1.0 - p) * inv_n;
    }
    estimator.backward(d);
  }
  return loss;
}

struct PpoStats {
  double policy_loss = 0;
  double value_loss = 0;
  double estimator_loss = 0;
  double entropy = 0;
  double kl = 0;
  double clip_fraction = 0;
};

struct PpoOptimizers {
  Adam actor_opt, log_std_opt, critic_opt, estimator_opt;

  static PpoOptimizers make(const Networks& nets, const PpoConfig& cfg) {
    PpoOptimizers o;
    o.actor_opt = Adam(nets.actor.param_count(), cfg.learning_rate);
    o.log_std_opt = Adam(static_cast<int>(nets.log_std.size()), cfg.learning_rate);
    o.critic_opt = Adam(nets.critic.param_count(), cfg.learning_rate);
    o.estimator_opt = Adam(nets.estimator.param_count(), cfg.learning_rate);
    return o;
  }
};

/// One PPO update over a collected batch: clipped surrogate + value loss +
/// entropy bonus + estimator regression, minibatched with a seeded shuffle.
inline PpoStats ppo_update(TrainingBatch& batch, const PpoConfig& cfg,
                           Networks& nets, PpoOptimizers& opt, Rng& rng) {
  batch.normalize_advantages();
  const size_t n = batch.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});

  PpoStats stats;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // deterministic Fisher-Yates with the caller's stream
    for (size_t i = n; i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    const size_t mb = (n + cfg.minibatches - 1) / cfg.minibatches;
    for (size_t start = 0; start < n; start += mb) {
      const std::vector<size_t> idx(order.begin() + start,
                                    order.begin() + std::min(start + mb, n));

      nets.actor.zero_grad();
      VecX log_std_grad;
      const PolicyLossStats ps = policy_loss_and_grad(
          nets.actor, nets.log_std, nets.norm, batch.observations, batch.actions,
          batch.log_probs, batch.advantages, idx, cfg.clip_ratio,
          cfg.entropy_coef, &log_std_grad);
      if (!std::isfinite(ps.policy_loss)) return stats;  // abort iteration
      const VecX ag = clip_by_global_norm(nets.actor.get_grads(), cfg.max_grad_norm);
      nets.actor.set_params(opt.actor_opt.update(nets.actor.get_params(), ag));
      nets.log_std = opt.log_std_opt.update(nets.log_std, log_std_grad);

      nets.critic.zero_grad();
      const double vl = value_loss_and_grad(nets.critic, nets.norm,
                                            batch.observations,
                                            batch.value_targets, idx);
      VecX cg = clip_by_global_norm(nets.critic.get_grads() * cfg.value_coef,
                                    cfg.max_grad_norm);
      nets.critic.set_params(opt.critic_opt.update(nets.critic.get_params(), cg));

      nets.estimator.zero_grad();
      const double el = estimator_loss_and_grad(
          nets.estimator, batch.estimator_inputs, batch.privileged_labels, idx);
      VecX eg = clip_by_global_norm(
          nets.estimator.get_grads() * cfg.estimator_coef, cfg.max_grad_norm);
      nets.estimator.set_params(
          opt.estimator_opt.update(nets.estimator.get_params(), eg));

      stats.policy_loss += ps.policy_loss;
      stats.value_loss += vl;
      stats.estimator_loss += el;
      stats.entropy += ps.entropy;
      stats.kl += ps.kl;
      stats.clip_fraction += ps.clip_fraction;
      ++updates;
    }
  }
  if (updates > 0) {
    stats.policy_loss /= updates;
    stats.value_loss /= updates;
    stats.estimator_loss /= updates;
    stats.entropy /= updates;
    stats.kl /= updates;
    stats.clip_fraction /= updates;
  }
  return stats;
}

}  // namespace climbsim
