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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ballista/common.hpp"

namespace ballista {

// Dense ELU networks with explicit backward passes. Templated on the scalar
// type: float for training throughput, double for finite-difference checks.

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Linear {
  MatX<Scalar> weight;  // out x in
  VecX<Scalar> bias;    // out
};

template <typename Scalar>
struct MlpWorkspace {
  std::vector<MatX<Scalar>> inputs;  // input to each layer
  std::vector<MatX<Scalar>> pre;     // pre-activation outputs
};

/// Fully connected trunk with ELU between layers (linear final layer).
/// Samples are columns.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  /// `sizes` = {in, hidden..., out}. Torch-style uniform init.
  Mlp(const std::vector<int>& sizes, Rng& rng) {
    layers_.reserve(sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      Linear<Scalar> lin;
      const int in = sizes[l], out = sizes[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      lin.weight.resize(out, in);
      lin.bias.resize(out);
      for (int j = 0; j < out; ++j) {
        for (int i = 0; i < in; ++i)
          lin.weight(j, i) = static_cast<Scalar>(uniform(rng, -bound, bound));
        lin.bias[j] = static_cast<Scalar>(uniform(rng, -bound, bound));
      }
      layers_.push_back(std::move(lin));
    }
  }

  static Mlp zeros_like(const Mlp& other) {
    Mlp z;
    z.layers_.reserve(other.layers_.size());
    for (const auto& lin : other.layers_) {
      Linear<Scalar> g;
      g.weight = MatX<Scalar>::Zero(lin.weight.rows(), lin.weight.cols());
      g.bias = VecX<Scalar>::Zero(lin.bias.size());
      z.layers_.push_back(std::move(g));
    }
    return z;
  }

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::vector<Linear<Scalar>>& layers() { return layers_; }
  const std::vector<Linear<Scalar>>& layers() const { return layers_; }

  MatX<Scalar> forward(const MatX<Scalar>& x, MlpWorkspace<Scalar>* ws = nullptr) const {
    MatX<Scalar> a = x;
    if (ws) {
      ws->inputs.assign(layers_.size(), {});
      ws->pre.assign(layers_.size(), {});
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (ws) ws->inputs[l] = a;
      MatX<Scalar> z = (layers_[l].weight * a).colwise() + layers_[l].bias;
      if (ws) ws->pre[l] = z;
      if (l + 1 < layers_.size()) {
        a = z.unaryExpr([](Scalar v) {
          return v > Scalar(0) ? v : Scalar(std::expm1(static_cast<double>(v)));
        });
      } else {
        a = std::move(z);
      }
    }
    return a;
  }

  /// Accumulates parameter gradients for dL/d(output) into `grads`.
  void backward(const MatX<Scalar>& dout, const MlpWorkspace<Scalar>& ws,
                Mlp& grads) const {
    MatX<Scalar> dz = dout;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      grads.layers_[l].weight.noalias() += dz * ws.inputs[l].transpose();
      grads.layers_[l].bias += dz.rowwise().sum();
      if (l == 0) break;
      MatX<Scalar> da = layers_[l].weight.transpose() * dz;
      // d(ELU)/dz = 1 for z > 0, exp(z) otherwise.
      dz = da.binaryExpr(ws.pre[l - 1], [](Scalar g, Scalar z) {
        return z > Scalar(0) ? g : g * Scalar(std::exp(static_cast<double>(z)));
      });
    }
  }

 private:
  std::vector<Linear<Scalar>> layers_;
};

/// Gaussian-policy actor plus scalar critic with identical trunk shapes and
/// separate weights. The action log-std is a state-independent learnable
/// vector.
template <typename Scalar>
struct ActorCritic {
  Mlp<Scalar> actor;
  Mlp<Scalar> critic;
  VecX<Scalar> log_std;
  int obs_dim = 0;
  int act_dim = 0;

  static ActorCritic make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                          double init_std, Rng& rng) {
    ActorCritic ac;
    ac.obs_dim = obs_dim;
    ac.act_dim = act_dim;
    std::vector<int> actor_sizes{obs_dim};
    actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
    actor_sizes.push_back(act_dim);
    std::vector<int> critic_sizes{obs_dim};
    critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
    critic_sizes.push_back(1);
    ac.actor = Mlp<Scalar>(actor_sizes, rng);
    ac.critic = Mlp<Scalar>(critic_sizes, rng);
    ac.log_std = VecX<Scalar>::Constant(act_dim, Scalar(std::log(init_std)));
    return ac;
  }

  static ActorCritic zeros_like(const ActorCritic& other) {
    ActorCritic z;
    z.obs_dim = other.obs_dim;
    z.act_dim = other.act_dim;
    z.actor = Mlp<Scalar>::zeros_like(other.actor);
    z.critic = Mlp<Scalar>::zeros_like(other.critic);
    z.log_std = VecX<Scalar>::Zero(other.log_std.size());
    return z;
  }

  bool finite() const {
    for (const auto* net : {&actor, &critic})
      for (const auto& lin : net->layers())
        if (!lin.weight.allFinite() || !lin.bias.allFinite()) return false;
    return log_std.allFinite();
  }
};

/// Applies fn(data, size) to every parameter block; `a` and `b` are visited in
/// lockstep so the same traversal pairs parameters with gradients or moments.
template <typename Scalar, typename Fn>
void for_each_param(ActorCritic<Scalar>& a, ActorCritic<Scalar>& b, Fn&& fn) {
  auto visit = [&](Mlp<Scalar>& x, Mlp<Scalar>& y) {
    for (std::size_t l = 0; l < x.layers().size(); ++l) {
      fn(x.layers()[l].weight.data(), y.layers()[l].weight.data(),
         x.layers()[l].weight.size());
      fn(x.layers()[l].bias.data(), y.layers()[l].bias.data(),
         x.layers()[l].bias.size());
    }
  };
  visit(a.actor, b.actor);
  visit(a.critic, b.critic);
  fn(a.log_std.data(), b.log_std.data(), a.log_std.size());
}

/// Adam with decoupled weight decay over the ActorCritic parameter blocks.
template <typename Scalar>
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
        double weight_decay = 0.0)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  void step(ActorCritic<Scalar>& params, ActorCritic<Scalar>& grads, double lr) {
    if (m_.empty()) {
      init_like(params);
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    std::size_t block = 0;
    for_each_param(params, grads, [&](Scalar* p, Scalar* g, Eigen::Index n) {
      auto pm = Eigen::Map<VecX<Scalar>>(p, n);
      auto gm = Eigen::Map<VecX<Scalar>>(g, n);
      auto& m = m_[block];
      auto& v = v_[block];
      m = Scalar(beta1_) * m + Scalar(1.0 - beta1_) * gm;
      v = Scalar(beta2_) * v.array().matrix() +
          Scalar(1.0 - beta2_) * gm.array().square().matrix();
      pm.array() -= Scalar(lr) *
                    ((m.array() / Scalar(bc1)) /
                         ((v.array() / Scalar(bc2)).sqrt() + Scalar(eps_)) +
                     Scalar(weight_decay_) * pm.array());
      ++block;
    });
  }

 private:
  void init_like(ActorCritic<Scalar>& params) {
    ActorCritic<Scalar> dummy = ActorCritic<Scalar>::zeros_like(params);
    for_each_param(params, dummy, [&](Scalar*, Scalar*, Eigen::Index n) {
      m_.push_back(VecX<Scalar>::Zero(n));
      v_.push_back(VecX<Scalar>::Zero(n));
    });
  }

  double beta1_, beta2_, eps_, weight_decay_;
  long t_ = 0;
  std::vector<VecX<Scalar>> m_;
  std::vector<VecX<Scalar>> v_;
};

}  // namespace ballista
