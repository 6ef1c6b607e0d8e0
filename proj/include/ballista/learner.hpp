// Copyright 2026 The Ballista Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "ballista/net.hpp"

namespace ballista {

struct NumericalFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PPOConfig {
  double clip = 0.15;
  double gae_lambda = 0.93;
  double gamma = 0.99;
  int steps_per_env = 26;
  int minibatches = 6;
  double entropy_coef = 0.0;  // kept at zero; retained for the config surface
  double desired_kl = 0.02;
  double value_loss_coef = 0.98;
  int epochs = 5;
  double learning_rate = 1e-3;
  double lr_min = 1e-5;
  double lr_max = 1e-2;
  double weight_decay = 0.0;
  double max_grad_norm = 1.0;
  double init_std = 0.5;
  std::vector<int> hidden = {256, 128, 64};
};

/// Fixed-horizon experience, transitions indexed t * n_envs + e.
template <typename Scalar>
struct RolloutBuffer {
  int n_envs = 0;
  int horizon = 0;
  int obs_dim = 0;
  int act_dim = 0;
  MatX<Scalar> obs;
  MatX<Scalar> actions;
  MatX<Scalar> mu_old;
  VecX<Scalar> log_std_old;
  VecX<Scalar> logp_old;
  VecX<Scalar> values;
  VecX<Scalar> rewards;
  VecX<Scalar> dones;
  VecX<Scalar> advantages;
  VecX<Scalar> returns;
  VecX<Scalar> bootstrap;  // per-env value of the state after the last step

  int size() const { return n_envs * horizon; }

  void resize(int n, int h, int obs_d, int act_d) {
    n_envs = n;
    horizon = h;
    obs_dim = obs_d;
    act_dim = act_d;
    const int total = n * h;
    obs.resize(obs_d, total);
    actions.resize(act_d, total);
    mu_old.resize(act_d, total);
    log_std_old.resize(act_d);
    logp_old.resize(total);
    values.resize(total);
    rewards.resize(total);
    dones.resize(total);
    advantages.setZero(total);
    returns.setZero(total);
    bootstrap.resize(n);
  }
};

namespace detail {

template <typename Scalar>
VecX<Scalar> gaussian_log_prob(const MatX<Scalar>& actions, const MatX<Scalar>& mu,
                               const VecX<Scalar>& log_std) {
  const VecX<Scalar> inv_var =
      (-2.0 * log_std.template cast<double>().array()).exp().template cast<Scalar>();
  const Scalar log_norm =
      Scalar(log_std.template cast<double>().sum() +
             0.5 * log_std.size() * std::log(2.0 * M_PI));
  VecX<Scalar> out(actions.cols());
  for (Eigen::Index i = 0; i < actions.cols(); ++i) {
    const auto d = (actions.col(i) - mu.col(i)).array();
    out[i] = Scalar(-0.5) * (d.square() * inv_var.array()).sum() - log_norm;
  }
  return out;
}

}  // namespace detail

/// Rolls the policy for `horizon` steps across all environments. Throws
/// NumericalFault if the policy emits non-finite outputs.
template <typename Scalar, typename VecEnv>
RolloutBuffer<Scalar> collect(const ActorCritic<Scalar>& ac, VecEnv& venv,
                              int horizon, Rng& rng, bool deterministic = false) {
  const int n = venv.size();
  RolloutBuffer<Scalar> buf;
  buf.resize(n, horizon, ac.obs_dim, ac.act_dim);
  buf.log_std_old = ac.log_std;
  const VecX<Scalar> sigma =
      ac.log_std.template cast<double>().array().exp().template cast<Scalar>();

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < horizon; ++t) {
    const MatX<Scalar> x = venv.observations().template cast<Scalar>();
    const MatX<Scalar> mu = ac.actor.forward(x);
    if (!mu.allFinite()) throw NumericalFault("collect: non-finite policy output");
    const MatX<Scalar> values = ac.critic.forward(x);

    MatX<Scalar> act = mu;
    if (!deterministic) {
      for (int e = 0; e < n; ++e)
        for (int d = 0; d < ac.act_dim; ++d)
          act(d, e) += sigma[d] * Scalar(normal(rng));
    }
    const VecX<Scalar> logp = detail::gaussian_log_prob(act, mu, ac.log_std);

    auto res = venv.step(act.template cast<double>().eval());

    const int base = t * n;
    buf.obs.middleCols(base, n) = x;
    buf.actions.middleCols(base, n) = act;
    buf.mu_old.middleCols(base, n) = mu;
    for (int e = 0; e < n; ++e) {
      buf.logp_old[base + e] = logp[e];
      buf.values[base + e] = values(0, e);
      buf.rewards[base + e] = Scalar(res.rewards[e]);
      buf.dones[base + e] = Scalar(res.dones[e] ? 1 : 0);
    }
  }
  const MatX<Scalar> x_last = venv.observations().template cast<Scalar>();
  buf.bootstrap = ac.critic.forward(x_last).row(0).transpose();
  return buf;
}

/// GAE(gamma, lambda) with per-env backward recursion and bootstrap values
/// for non-terminal tails. Advantages are left unnormalized.
template <typename Scalar>
void compute_gae(RolloutBuffer<Scalar>& buf, double gamma, double lambda) {
  const int n = buf.n_envs, h = buf.horizon;
  for (int e = 0; e < n; ++e) {
    double adv = 0.0;
    for (int t = h - 1; t >= 0; --t) {
      const int i = t * n + e;
      const double not_done = 1.0 - static_cast<double>(buf.dones[i]);
      const double v_next = (t == h - 1) ? static_cast<double>(buf.bootstrap[e])
                                         : static_cast<double>(buf.values[(t + 1) * n + e]);
      const double delta = static_cast<double>(buf.rewards[i]) +
                           gamma * v_next * not_done -
                           static_cast<double>(buf.values[i]);
      adv = delta + gamma * lambda * not_done * adv;
      buf.advantages[i] = Scalar(adv);
      buf.returns[i] = Scalar(adv + static_cast<double>(buf.values[i]));
    }
  }
}

template <typename Scalar>
struct Minibatch {
  MatX<Scalar> obs;
  MatX<Scalar> actions;
  MatX<Scalar> mu_old;
  VecX<Scalar> log_std_old;
  VecX<Scalar> logp_old;
  VecX<Scalar> adv;
  VecX<Scalar> ret;
};

template <typename Scalar>
struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double total = 0.0;
  double kl = 0.0;
  double clip_frac = 0.0;
};

/// Clipped-surrogate PPO loss (policy + value, entropy weight zero) with
/// optional analytic gradients. Everything is differentiated by hand; the
/// finite-difference test in the suite pins this down.
template <typename Scalar>
LossStats<Scalar> ppo_loss(const ActorCritic<Scalar>& ac, const Minibatch<Scalar>& mb,
                           const PPOConfig& cfg, ActorCritic<Scalar>* grads) {
  const int n = static_cast<int>(mb.obs.cols());
  const int d = ac.act_dim;
  LossStats<Scalar> stats;

  MlpWorkspace<Scalar> actor_ws, critic_ws;
  const MatX<Scalar> mu = ac.actor.forward(mb.obs, grads ? &actor_ws : nullptr);
  const MatX<Scalar> v = ac.critic.forward(mb.obs, grads ? &critic_ws : nullptr);

  const VecX<Scalar> logp_new = detail::gaussian_log_prob(mb.actions, mu, ac.log_std);
  const VecX<Scalar> sigma_new_sq =
      (2.0 * ac.log_std.template cast<double>().array()).exp().template cast<Scalar>();

  // KL(old || new), the adaptive-lr signal.
  {
    const auto ls_new = ac.log_std.template cast<double>().array();
    const auto ls_old = mb.log_std_old.template cast<double>().array();
    const auto var_old = (2.0 * ls_old).exp();
    const auto var_new = (2.0 * ls_new).exp();
    double kl_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto dmu = (mb.mu_old.col(i) - mu.col(i)).template cast<double>().array();
      kl_sum += ((ls_new - ls_old) + (var_old + dmu.square()) / (2.0 * var_new) - 0.5)
                    .sum();
    }
    stats.kl = kl_sum / n;
  }

  double policy_loss = 0.0, value_loss = 0.0, clipped = 0.0;
  VecX<Scalar> drho = VecX<Scalar>::Zero(n);   // d(policy_loss)/d(rho_i)
  VecX<Scalar> rho_v(n);
  const double eps = cfg.clip;
  for (int i = 0; i < n; ++i) {
    const double rho =
        std::exp(static_cast<double>(logp_new[i]) - static_cast<double>(mb.logp_old[i]));
    rho_v[i] = Scalar(rho);
    const double a = static_cast<double>(mb.adv[i]);
    const double unclipped = rho * a;
    const double clamped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * a;
    policy_loss -= std::min(unclipped, clamped);
    if (std::abs(rho - 1.0) > eps) clipped += 1.0;
    const bool active = (a >= 0.0) ? (rho < 1.0 + eps) : (rho > 1.0 - eps);
    if (active) drho[i] = Scalar(-a / n);

    const double verr = static_cast<double>(v(0, i)) - static_cast<double>(mb.ret[i]);
    value_loss += verr * verr;
  }
  policy_loss /= n;
  value_loss /= n;
  stats.policy_loss = policy_loss;
  stats.value_loss = value_loss;
  stats.clip_frac = clipped / n;
  stats.total = policy_loss + cfg.value_loss_coef * value_loss;

  if (grads) {
    // d rho / d mu = rho * (a - mu) / sigma^2 ; d rho / d log_std has the
    // (a - mu)^2/sigma^2 - 1 factor per dimension.
    MatX<Scalar> dmu(d, n);
    VecX<Scalar> dlogstd = VecX<Scalar>::Zero(d);
    for (int i = 0; i < n; ++i) {
      const auto diff = (mb.actions.col(i) - mu.col(i)).array();
      const auto scaled = diff / sigma_new_sq.array();
      dmu.col(i) = (drho[i] * rho_v[i] * scaled).matrix();
      dlogstd.array() +=
          drho[i] * rho_v[i] * (diff.square() / sigma_new_sq.array() - Scalar(1));
    }
    grads->log_std += dlogstd;
    ac.actor.backward(dmu, actor_ws, grads->actor);

    MatX<Scalar> dv(1, n);
    for (int i = 0; i < n; ++i)
      dv(0, i) = Scalar(cfg.value_loss_coef * 2.0 *
                        (static_cast<double>(v(0, i)) - static_cast<double>(mb.ret[i])) / n);
    ac.critic.backward(dv, critic_ws, grads->critic);
  }
  return stats;
}

struct UpdateStats {
  double kl = 0.0;
  double clip_frac = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double lr = 0.0;
  int minibatches = 0;
};

/// Normalizes advantages in place (zero mean, unit variance over the batch).
template <typename Scalar>
void normalize_advantages(RolloutBuffer<Scalar>& buf) {
  const int total = buf.size();
  const double mean = buf.advantages.template cast<double>().mean();
  double var = 0.0;
  for (int i = 0; i < total; ++i) {
    const double c = static_cast<double>(buf.advantages[i]) - mean;
    var += c * c;
  }
  const double std = std::sqrt(var / total);
  if (std < 1e-8) {
    buf.advantages.array() -= Scalar(mean);
    return;
  }
  buf.advantages = ((buf.advantages.template cast<double>().array() - mean) / std)
                       .template cast<Scalar>();
}

/// One PPO update: shuffled minibatch epochs over the buffer, adaptive
/// learning rate around the desired KL, global gradient-norm clipping, AdamW.
template <typename Scalar>
UpdateStats update(ActorCritic<Scalar>& ac, RolloutBuffer<Scalar>& buf,
                   const PPOConfig& cfg, AdamW<Scalar>& opt, double& lr, Rng& rng) {
  normalize_advantages(buf);
  const int total = buf.size();
  const int mb_size = total / cfg.minibatches;
  if (mb_size < 1) throw std::invalid_argument("update: minibatches exceed batch size");

  std::vector<int> perm(total);
  std::iota(perm.begin(), perm.end(), 0);

  UpdateStats stats;
  Minibatch<Scalar> mb;
  mb.log_std_old = buf.log_std_old;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int m = 0; m < cfg.minibatches; ++m) {
      mb.obs.resize(buf.obs_dim, mb_size);
      mb.actions.resize(buf.act_dim, mb_size);
      mb.mu_old.resize(buf.act_dim, mb_size);
      mb.logp_old.resize(mb_size);
      mb.adv.resize(mb_size);
      mb.ret.resize(mb_size);
      for (int k = 0; k < mb_size; ++k) {
        const int idx = perm[m * mb_size + k];
        mb.obs.col(k) = buf.obs.col(idx);
        mb.actions.col(k) = buf.actions.col(idx);
        mb.mu_old.col(k) = buf.mu_old.col(idx);
        mb.logp_old[k] = buf.logp_old[idx];
        mb.adv[k] = buf.advantages[idx];
        mb.ret[k] = buf.returns[idx];
      }

      ActorCritic<Scalar> grads = ActorCritic<Scalar>::zeros_like(ac);
      const LossStats<Scalar> loss = ppo_loss(ac, mb, cfg, &grads);

      if (!std::isfinite(loss.kl)) {
        lr = std::max(cfg.lr_min, lr * 0.5);
        continue;
      }
      if (cfg.desired_kl > 0.0) {
        if (loss.kl > 2.0 * cfg.desired_kl)
          lr /= 1.5;
        else if (loss.kl < cfg.desired_kl / 2.0)
          lr *= 1.5;
        lr = std::clamp(lr, cfg.lr_min, cfg.lr_max);
      }

      if (cfg.max_grad_norm > 0.0) {
        double sq = 0.0;
        for_each_param(grads, grads, [&](Scalar* g, Scalar*, Eigen::Index nn) {
          sq += Eigen::Map<VecX<Scalar>>(g, nn).template cast<double>().squaredNorm();
        });
        const double norm = std::sqrt(sq);
        if (norm > cfg.max_grad_norm) {
          const Scalar scale = Scalar(cfg.max_grad_norm / norm);
          for_each_param(grads, grads, [&](Scalar* g, Scalar*, Eigen::Index nn) {
            Eigen::Map<VecX<Scalar>>(g, nn) *= scale;
          });
        }
      }

      opt.step(ac, grads, lr);
      if (!ac.finite()) throw NumericalFault("update: non-finite parameters");

      stats.kl += loss.kl;
      stats.clip_frac += loss.clip_frac;
      stats.policy_loss += loss.policy_loss;
      stats.value_loss += loss.value_loss;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    stats.kl /= stats.minibatches;
    stats.clip_frac /= stats.minibatches;
    stats.policy_loss /= stats.minibatches;
    stats.value_loss /= stats.minibatches;
  }
  stats.lr = lr;
  return stats;
}

}  // namespace ballista
