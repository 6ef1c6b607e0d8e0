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

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ballista/ballistics.hpp"
#include "ballista/plant.hpp"
#include "ballista/task.hpp"

namespace ballista {

struct EnvConfig {
  int decimation = 4;                    // physics steps per control step (50 Hz)
  double release_delay = 0.1;            // [s] between release command and detach
  double post_release_zero_delay = 0.25; // [s] after detach until actions are zeroed
  double detach_threshold = 0.25;        // [m] ball-hand separation for the throw reward
  int max_steps = 200;                   // 4 s episode cap
  int privileged_fade_iters = 100;
  double stability_wait_default = 2.0;   // [s] used unless the curriculum ramps it

  double action_scale_yaw = 1.5;
  double action_scale_crouch = 0.3;
  double action_scale_arm = 2.0;

  // Stability band for the base height, as factors of the nominal height.
  double height_lo_factor = 0.5;
  double height_hi_factor = 1.2;

  bool observe_tilt = false;  // substitute tilt/tilt-rate into the lateral velocity channels
  bool obs_ball_released = true;
  bool obs_estimate_displacement = true;
  bool arm_only = false;

  double est_coarse_dt = 5e-3;     // coarse grid for the observation estimate
  double reward_coarse_dt = 1e-3;  // coarse grid for the emitted reward
  double ballistic_t_max = 10.0;
  BallisticModel model = BallisticModel::vacuum();

  // Fixed observation scaling.
  double scale_lin_vel = 0.5;
  double scale_dof_vel = 0.05;
  double scale_r = 0.2;
  double scale_est = 0.2;

  double control_dt(double physics_dt) const { return decimation * physics_dt; }
};

/// Read-only snapshot of the curriculum shared with environments between
/// training iterations.
struct CurriculumView {
  TaskMode task{TaskKind::kGeneral, 1.0, 3.0};
  double body_action_scale = 1.0;
  double stability_wait = 2.0;
};

/// One thrower episode: plant, target, ball-release state machine, reward
/// emission timing and the episode summary.
class ThrowEnv {
 public:
  static constexpr int kObsDim = 24;
  static constexpr int kActDim = 6;
  using Obs = Eigen::Matrix<double, kObsDim, 1>;
  using Action = Eigen::Matrix<double, kActDim, 1>;

  struct StepResult {
    Obs obs;
    double reward = 0.0;
    bool done = false;
    RewardBreakdown breakdown;
  };

  ThrowEnv(const EnvConfig& cfg, const PlantConfig& plant_cfg,
           const RewardConfig& reward_cfg, std::uint64_t seed)
      : cfg_(cfg),
        base_plant_cfg_(plant_cfg),
        reward_cfg_(reward_cfg),
        rng_(seed),
        est_stats_(0.002) {
    base_plant_cfg_.sync_derived();
    limits_.height_lo = cfg.height_lo_factor * base_plant_cfg_.h_nominal;
    limits_.height_hi = cfg.height_hi_factor * base_plant_cfg_.h_nominal;
    view_.stability_wait = cfg.stability_wait_default;
  }

  void set_curriculum(const CurriculumView& view) { view_ = view; }
  void set_training_iteration(int iteration) { iteration_ = iteration; }

  double fade_beta() const {
    if (cfg_.privileged_fade_iters <= 0) return 1.0;
    return std::clamp(static_cast<double>(iteration_) / cfg_.privileged_fade_iters,
                      0.0, 1.0);
  }

  Obs reset() {
    auto [rcfg, rstate] = randomize(base_plant_cfg_, PlantState{}, rng_);
    plant_cfg_ = rcfg;
    plant_ = rstate;
    target_ = sample_target(view_.task, rng_);
    target_cart_ = to_cartesian(target_);
    body_hold_ = plant_.q.head<2>();

    time_ = 0.0;
    steps_ = 0;
    done_ = false;
    latched_ = false;
    detached_ = false;
    emitted_ = false;
    release_timer_ = 0.0;
    prev_action_.setZero();
    // The fade surrogate draws from the estimate distribution as of the last
    // episode boundary, so within-episode noise carries no information about
    // the current throw.
    noise_mean_ = est_stats_.mean();
    noise_half_ = std::sqrt(3.0) * est_stats_.stddev();
    summary_ = EpisodeSummary{};
    summary_.min_base_height = plant_.q[kCrouch];
    summary_.max_base_height = plant_.q[kCrouch];
    summary_.target_r = target_.r;
    summary_.target_theta_tilde = target_.theta_tilde;
    summary_.target_phi = target_.phi;
    return build_observation();
  }

  StepResult step(const Action& action) {
    if (done_) throw std::logic_error("ThrowEnv::step called on finished episode");
    StepResult out;

    if (!action.allFinite()) {
      summary_.faulted = true;
      summary_.stability = 0;
      summary_.episode_length = time_;
      done_ = true;
      out.obs = build_observation();
      out.done = true;
      return out;
    }

    if (!latched_ && action[5] > 1.0) {
      latched_ = true;
      release_timer_ = cfg_.release_delay;
    }
    prev_action_ = action;

    const MotorCommand cmd = motor_command(action);
    const double dt = plant_cfg_.dt;
    for (int sub = 0; sub < cfg_.decimation; ++sub) {
      plant_ = ballista::step(plant_, cmd, plant_cfg_);
      time_ += dt;
      if (latched_ && !detached_) {
        release_timer_ -= dt;
        if (release_timer_ <= 0.0) {
          detached_ = true;
          plant_.ball_attached = false;
          summary_.released = true;
          summary_.detach_time = time_;
        }
      }
      if (detached_) step_ball(dt);
      summary_.min_base_height = std::min(summary_.min_base_height, plant_.q[kCrouch]);
      summary_.max_base_height = std::max(summary_.max_base_height, plant_.q[kCrouch]);
      summary_.max_tilt = std::max(summary_.max_tilt, std::abs(plant_.tilt));
      if (std::abs(plant_.tilt) > plant_cfg_.fall_bound) summary_.fell = true;
      if (plant_.fault) summary_.faulted = true;
      if (summary_.fell || summary_.faulted) break;
    }
    ++steps_;

    double reward = 0.0;
    if (detached_ && !emitted_) {
      const auto [hand, hand_vel] = end_effector_state(plant_, plant_cfg_);
      if ((plant_.ball_pos - hand).norm() >= cfg_.detach_threshold)
        reward += emit_throw_reward(out.breakdown);
    }

    out.breakdown.roll = roll_penalty(plant_.tilt, reward_cfg_);
    reward += reward_cfg_.lambda3 * out.breakdown.roll;

    bool done = summary_.fell || summary_.faulted || steps_ >= cfg_.max_steps ||
                (emitted_ && time_ >= summary_.detach_time + view_.stability_wait);
    if (done && detached_ && !emitted_)
      reward += emit_throw_reward(out.breakdown);

    if (done) {
      done_ = true;
      summary_.episode_length = time_;
      summary_.stability = stability_reward(summary_, limits_);
      out.breakdown.stability = summary_.stability;
      reward += reward_cfg_.lambda2 * summary_.stability;
    }

    summary_.episode_reward += reward;
    out.breakdown.total = reward;
    out.reward = reward;
    out.done = done;
    out.obs = build_observation();
    return out;
  }

  bool done() const { return done_; }
  bool throw_reward_emitted() const { return emitted_; }
  const EpisodeSummary& summary() const { return summary_; }
  const TargetCommand& target() const { return target_; }
  const Vec3& target_cartesian() const { return target_cart_; }
  bool detached() const { return detached_; }
  double time() const { return time_; }
  const PlantState& plant() const { return plant_; }
  const PlantConfig& plant_config() const { return plant_cfg_; }
  const StabilityLimits& stability_limits() const { return limits_; }
  double last_true_estimate() const { return last_true_estimate_; }
  const CurriculumView& curriculum() const { return view_; }

 private:
  MotorCommand motor_command(const Action& action) const {
    MotorCommand cmd;
    const bool zeroed =
        detached_ && (time_ - summary_.detach_time) >= cfg_.post_release_zero_delay;

    if (cfg_.arm_only) {
      // Body joints hold their randomized initial positions.
      cmd.target_offset[kYaw] = body_hold_[0] - plant_cfg_.default_pose[kYaw];
      cmd.target_offset[kCrouch] = body_hold_[1] - plant_cfg_.default_pose[kCrouch];
    } else if (!zeroed) {
      cmd.target_offset[kYaw] =
          view_.body_action_scale * action[0] * cfg_.action_scale_yaw;
      cmd.target_offset[kCrouch] =
          view_.body_action_scale * action[1] * cfg_.action_scale_crouch;
    }
    if (!zeroed) {
      cmd.target_offset[kShoulderYaw] = action[2] * cfg_.action_scale_arm;
      cmd.target_offset[kShoulderPitch] = action[3] * cfg_.action_scale_arm;
      cmd.target_offset[kElbow] = action[4] * cfg_.action_scale_arm;
    }
    return cmd;
  }

  void step_ball(double dt) {
    if (cfg_.model.law == DragLaw::kVacuum) {
      const double g = cfg_.model.gravity;
      plant_.ball_pos += plant_.ball_vel * dt;
      plant_.ball_pos.z() -= 0.5 * g * dt * dt;
      plant_.ball_vel.z() -= g * dt;
    } else {
      detail::rk4_step(plant_.ball_pos, plant_.ball_vel, cfg_.model.drag_coeff,
                       cfg_.model.gravity, dt);
    }
  }

  double emit_throw_reward(RewardBreakdown& breakdown) {
    const ReleaseState release{plant_.ball_pos, plant_.ball_vel};
    summary_.error = displacement_error(release, target_cart_, cfg_.model,
                                        cfg_.reward_coarse_dt, cfg_.ballistic_t_max);
    const Trajectory traj = predict_trajectory(release, cfg_.model,
                                               cfg_.reward_coarse_dt,
                                               cfg_.ballistic_t_max);
    const auto [t_land, p_land] = landing_state(release, cfg_.model, traj);
    summary_.landing_distance = std::hypot(p_land.x(), p_land.y());
    emitted_ = true;
    breakdown.throwing = throwing_reward(summary_.error, target_.r);
    summary_.accuracy = breakdown.throwing;
    return reward_cfg_.lambda1 * breakdown.throwing;
  }

  double true_estimate() {
    if (emitted_) return summary_.error;
    ReleaseState release;
    if (detached_) {
      release = ReleaseState{plant_.ball_pos, plant_.ball_vel};
    } else {
      const auto [pos, vel] = end_effector_state(plant_, plant_cfg_);
      release = ReleaseState{pos, vel};
    }
    return displacement_error(release, target_cart_, cfg_.model,
                              cfg_.est_coarse_dt, cfg_.ballistic_t_max);
  }

  Obs build_observation() {
    const auto& dr = plant_cfg_.dr;
    const bool noisy = dr.enabled;
    const auto noise = [&](double range) {
      return noisy ? uniform(rng_, -range, range) : 0.0;
    };

    Obs obs = Obs::Zero();
    const Vec3 base_vel = cfg_.observe_tilt
                              ? Vec3(plant_.tilt, plant_.tilt_rate, plant_.qdot[kCrouch])
                              : Vec3(0.0, 0.0, plant_.qdot[kCrouch]);
    for (int i = 0; i < 3; ++i)
      obs[i] = cfg_.scale_lin_vel * (base_vel[i] + noise(dr.root_lin_vel_noise));

    obs[3] = target_.theta_tilde;
    obs[4] = target_.phi / M_PI;
    obs[5] = cfg_.scale_r * target_.r;

    for (int i = 0; i < 5; ++i) {
      obs[6 + i] = plant_.q[i] - plant_cfg_.default_pose[i] + noise(dr.joint_pos_noise);
      obs[11 + i] = cfg_.scale_dof_vel * (plant_.qdot[i] + noise(dr.joint_vel_noise));
    }
    obs.segment<kActDim>(16) = prev_action_;
    obs[22] = (cfg_.obs_ball_released && detached_) ? 1.0 : 0.0;

    // Privileged channel: the displacement the throw would score if released
    // right now, cross-faded into distribution-matched noise over training.
    last_true_estimate_ = true_estimate();
    est_stats_.push(last_true_estimate_);
    const double beta = fade_beta();
    const double surrogate = noise_mean_ + uniform(rng_, -noise_half_, noise_half_);
    if (cfg_.obs_estimate_displacement)
      obs[23] = cfg_.scale_est *
                ((1.0 - beta) * last_true_estimate_ + beta * surrogate);
    return obs;
  }

  EnvConfig cfg_;
  PlantConfig base_plant_cfg_;
  PlantConfig plant_cfg_;
  RewardConfig reward_cfg_;
  Rng rng_;
  CurriculumView view_;
  StabilityLimits limits_;
  int iteration_ = 0;

  PlantState plant_;
  TargetCommand target_;
  Vec3 target_cart_{Vec3::Zero()};
  Eigen::Vector2d body_hold_{Eigen::Vector2d::Zero()};
  Action prev_action_{Action::Zero()};

  double time_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  bool latched_ = false;
  bool detached_ = false;
  bool emitted_ = false;
  double release_timer_ = 0.0;

  EpisodeSummary summary_;
  RunningStats est_stats_;
  double noise_mean_ = 0.0;
  double noise_half_ = 0.0;
  double last_true_estimate_ = 0.0;
};

/// Batch of independent environments stepped in parallel, with auto-reset.
class ThrowVectorEnv {
 public:
  ThrowVectorEnv(const std::vector<std::uint64_t>& seeds, const EnvConfig& cfg,
                 const PlantConfig& plant_cfg, const RewardConfig& reward_cfg,
                 int max_threads = -1)
      : threads_(max_threads) {
    envs_.reserve(seeds.size());
    for (std::uint64_t s : seeds) envs_.emplace_back(cfg, plant_cfg, reward_cfg, s);
    obs_.resize(ThrowEnv::kObsDim, static_cast<Eigen::Index>(seeds.size()));
    completed_.resize(seeds.size());
  }

  static std::vector<std::uint64_t> sequential_seeds(int n, std::uint64_t seed0) {
    std::vector<std::uint64_t> seeds(n);
    for (int i = 0; i < n; ++i) seeds[i] = split_mix(seed0 + static_cast<std::uint64_t>(i));
    return seeds;
  }

  int size() const { return static_cast<int>(envs_.size()); }
  ThrowEnv& env(int i) { return envs_[i]; }

  void set_curriculum(const CurriculumView& view) {
    for (auto& e : envs_) e.set_curriculum(view);
  }
  void set_training_iteration(int it) {
    for (auto& e : envs_) e.set_training_iteration(it);
  }

  void reset_all() {
    parallel_for(size(), [&](int i) { obs_.col(i) = envs_[i].reset(); }, threads_);
    for (auto& c : completed_) c.clear();
  }

  const Eigen::MatrixXd& observations() const { return obs_; }

  struct BatchResult {
    Eigen::VectorXd rewards;
    std::vector<std::uint8_t> dones;
  };

  /// Element-wise step; finished environments report their final reward and
  /// are reset in place with a fresh target.
  BatchResult step(const Eigen::MatrixXd& actions) {
    if (actions.rows() != ThrowEnv::kActDim || actions.cols() != size())
      throw std::invalid_argument("ThrowVectorEnv::step: action matrix shape mismatch");
    BatchResult result;
    result.rewards.resize(size());
    result.dones.assign(size(), 0);
    parallel_for(
        size(),
        [&](int i) {
          auto res = envs_[i].step(actions.col(i));
          result.rewards[i] = res.reward;
          result.dones[i] = res.done ? 1 : 0;
          if (res.done) {
            completed_[i].push_back(envs_[i].summary());
            obs_.col(i) = envs_[i].reset();
          } else {
            obs_.col(i) = res.obs;
          }
        },
        threads_);
    return result;
  }

  /// Summaries of episodes finished since the last drain, in env order.
  std::vector<EpisodeSummary> drain_completed() {
    std::vector<EpisodeSummary> out;
    for (auto& c : completed_) {
      out.insert(out.end(), c.begin(), c.end());
      c.clear();
    }
    return out;
  }

 private:
  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::vector<ThrowEnv> envs_;
  Eigen::MatrixXd obs_;
  std::vector<std::vector<EpisodeSummary>> completed_;
  int threads_;
};

}  // namespace ballista
