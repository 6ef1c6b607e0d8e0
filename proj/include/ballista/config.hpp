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

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ballista/curriculum.hpp"
#include "ballista/env.hpp"
#include "ballista/learner.hpp"
#include "ballista/tuner.hpp"

namespace ballista {

struct EvalConfig {
  int episodes = 512;
  int distance_bins = 8;
  int phi_bins = 8;
  int theta_bins = 4;
  bool deterministic = true;
};

struct SweepConfig {
  int budget = 20;
  int workers = 1;
  bool synthetic = false;      // optimize a built-in benchmark instead of training
  int trial_iterations = 60;   // reduced-budget training per trial
  int trial_envs = 64;
  int trial_eval_episodes = 96;
  TpeConfig tpe;
};

/// Everything a run needs: robot profile, task, actuation mode, module
/// configs and output locations. Profile defaults are applied first and any
/// value can be overridden from the JSON config file.
struct RunConfig {
  RobotProfile profile = RobotProfile::kHumanoid;
  TaskKind task = TaskKind::kGeneral;
  bool arm_only = false;

  std::vector<std::uint64_t> seeds = {0};
  int iterations = 1000;
  int env_count = 256;
  int checkpoint_every = 250;
  std::string out_dir = "runs/out";

  // Reward-coefficient generators: lambda1 = reward_scale,
  // lambda2 = reward_scale * stability_pct, lambda3 = reward_scale * roll_pct.
  // The quadruped profile instead pins (1.0, 0.1, 0.0).
  double reward_scale = 2.54;
  double stability_pct = 0.02;
  double roll_pct = 0.17;

  double max_dist = 0.0;  // 0 = profile/task default

  Thresholds thresholds;
  RewardConfig reward;
  PlantConfig plant;
  EnvConfig env;
  PPOConfig ppo;
  EvalConfig eval;
  SweepConfig sweep;

  static RunConfig make(RobotProfile profile, TaskKind task, bool arm_only) {
    RunConfig cfg;
    cfg.profile = profile;
    cfg.task = task;
    cfg.arm_only = arm_only;
    cfg.apply_profile_defaults();
    return cfg;
  }

  void apply_profile_defaults() {
    plant = profile == RobotProfile::kQuadruped ? PlantConfig::quadruped()
                                                : PlantConfig::humanoid();
    plant.sync_derived();
    if (profile == RobotProfile::kQuadruped) {
      reward.lambda1 = 1.0;
      reward.lambda2 = 0.1;
      reward.lambda3 = 0.0;
    } else {
      reward.lambda1 = reward_scale;
      reward.lambda2 = reward_scale * stability_pct;
      reward.lambda3 = reward_scale * roll_pct;
    }
    if (max_dist <= 0.0) {
      if (profile == RobotProfile::kHumanoid)
        max_dist = task == TaskKind::kDistance ? 12.0 : 5.0;
      else
        max_dist = task == TaskKind::kDistance ? 14.0 : 8.0;
    }
    env.arm_only = arm_only;
  }

  CurriculumState make_curriculum() const {
    return CurriculumState::make(profile, task, max_dist, thresholds,
                                 env.stability_wait_default);
  }

  void validate() const {
    if (env_count < 1) throw std::invalid_argument("config: env_count must be >= 1");
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: at least one seed required");
    if (!(ppo.clip > 0.0 && ppo.clip < 1.0))
      throw std::invalid_argument("config: ppo.clip must be in (0, 1)");
    if (!(plant.h_min < plant.h_max))
      throw std::invalid_argument("config: plant.h_min must be < h_max");
  }
};

// ---- JSON (de)serialization ----

inline std::string to_string(RobotProfile p) {
  return p == RobotProfile::kQuadruped ? "quadruped" : "humanoid";
}
inline std::string to_string(TaskKind t) {
  return t == TaskKind::kDistance ? "distance" : "general";
}

inline RobotProfile profile_from_string(const std::string& s) {
  if (s == "humanoid") return RobotProfile::kHumanoid;
  if (s == "quadruped") return RobotProfile::kQuadruped;
  throw std::invalid_argument("unknown profile: " + s);
}
inline TaskKind task_from_string(const std::string& s) {
  if (s == "distance") return TaskKind::kDistance;
  if (s == "general") return TaskKind::kGeneral;
  throw std::invalid_argument("unknown task: " + s);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["profile"] = to_string(c.profile);
  j["task"] = to_string(c.task);
  j["mode"] = c.arm_only ? "arm_only" : "full_body";
  j["seeds"] = c.seeds;
  j["iterations"] = c.iterations;
  j["env_count"] = c.env_count;
  j["checkpoint_every"] = c.checkpoint_every;
  j["out_dir"] = c.out_dir;
  j["max_dist"] = c.max_dist;

  j["reward"] = {
      {"reward_scale", c.reward_scale},
      {"stability_pct", c.stability_pct},
      {"roll_pct", c.roll_pct},
      {"lambda1", c.reward.lambda1},
      {"lambda2", c.reward.lambda2},
      {"lambda3", c.reward.lambda3},
      {"roll_margin", c.reward.roll_margin},
      {"roll_sigmoid_gain", c.reward.roll_sigmoid_gain},
      {"roll_sigmoid_center", c.reward.roll_sigmoid_center},
      {"detach_threshold", c.reward.detach_threshold},
  };
  j["curriculum"] = {
      {"accuracy_threshold", c.thresholds.accuracy},
      {"stability_threshold", c.thresholds.stability},
  };
  j["plant"] = {
      {"link1", c.plant.link1},
      {"link2", c.plant.link2},
      {"shoulder_offset_x", c.plant.shoulder_offset_x},
      {"shoulder_offset_y", c.plant.shoulder_offset_y},
      {"mass1", c.plant.mass1},
      {"mass2", c.plant.mass2},
      {"ball_mass", c.plant.ball_mass},
      {"body_mass", c.plant.body_mass},
      {"h_min", c.plant.h_min},
      {"h_max", c.plant.h_max},
      {"h_nominal", c.plant.h_nominal},
      {"body_kp", c.plant.body_kp},
      {"body_kd", c.plant.body_kd},
      {"arm_kp", c.plant.arm_kp},
      {"arm_kd", c.plant.arm_kd},
      {"tilt_inertia", c.plant.tilt_inertia},
      {"tilt_stiffness", c.plant.tilt_stiffness},
      {"tilt_damping", c.plant.tilt_damping},
      {"tilt_coupling", c.plant.tilt_coupling},
      {"fall_bound", c.plant.fall_bound},
      {"dt", c.plant.dt},
      {"randomize", c.plant.dr.enabled},
  };
  j["env"] = {
      {"decimation", c.env.decimation},
      {"release_delay", c.env.release_delay},
      {"post_release_zero_delay", c.env.post_release_zero_delay},
      {"detach_threshold", c.env.detach_threshold},
      {"max_steps", c.env.max_steps},
      {"privileged_fade_iters", c.env.privileged_fade_iters},
      {"stability_wait_default", c.env.stability_wait_default},
      {"action_scale_yaw", c.env.action_scale_yaw},
      {"action_scale_crouch", c.env.action_scale_crouch},
      {"action_scale_arm", c.env.action_scale_arm},
      {"height_lo_factor", c.env.height_lo_factor},
      {"height_hi_factor", c.env.height_hi_factor},
      {"observe_tilt", c.env.observe_tilt},
      {"obs_ball_released", c.env.obs_ball_released},
      {"obs_estimate_displacement", c.env.obs_estimate_displacement},
      {"drag_coeff", c.env.model.drag_coeff},
      {"gravity", c.env.model.gravity},
  };
  j["ppo"] = {
      {"clip", c.ppo.clip},
      {"gae_lambda", c.ppo.gae_lambda},
      {"gamma", c.ppo.gamma},
      {"steps_per_env", c.ppo.steps_per_env},
      {"minibatches", c.ppo.minibatches},
      {"entropy_coef", c.ppo.entropy_coef},
      {"desired_kl", c.ppo.desired_kl},
      {"value_loss_coef", c.ppo.value_loss_coef},
      {"epochs", c.ppo.epochs},
      {"learning_rate", c.ppo.learning_rate},
      {"weight_decay", c.ppo.weight_decay},
      {"max_grad_norm", c.ppo.max_grad_norm},
      {"init_std", c.ppo.init_std},
      {"hidden", c.ppo.hidden},
  };
  j["eval"] = {
      {"episodes", c.eval.episodes},
      {"distance_bins", c.eval.distance_bins},
      {"phi_bins", c.eval.phi_bins},
      {"theta_bins", c.eval.theta_bins},
      {"deterministic", c.eval.deterministic},
  };
  j["sweep"] = {
      {"budget", c.sweep.budget},
      {"workers", c.sweep.workers},
      {"synthetic", c.sweep.synthetic},
      {"trial_iterations", c.sweep.trial_iterations},
      {"trial_envs", c.sweep.trial_envs},
      {"trial_eval_episodes", c.sweep.trial_eval_episodes},
      {"tpe_quantile", c.sweep.tpe.quantile},
      {"tpe_candidates", c.sweep.tpe.n_candidates},
      {"tpe_startup", c.sweep.tpe.n_startup},
  };
  return j;
}

namespace detail {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses a config JSON over defaults: profile/task/mode are read first, the
/// profile defaults applied, then every present field overrides.
inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("profile")) c.profile = profile_from_string(j["profile"]);
  if (j.contains("task")) c.task = task_from_string(j["task"]);
  if (j.contains("mode")) {
    const std::string mode = j["mode"];
    if (mode != "arm_only" && mode != "full_body")
      throw std::invalid_argument("unknown mode: " + mode);
    c.arm_only = mode == "arm_only";
  }
  if (j.contains("reward")) {
    detail::maybe(j["reward"], "reward_scale", c.reward_scale);
    detail::maybe(j["reward"], "stability_pct", c.stability_pct);
    detail::maybe(j["reward"], "roll_pct", c.roll_pct);
  }
  detail::maybe(j, "max_dist", c.max_dist);
  c.apply_profile_defaults();

  detail::maybe(j, "seeds", c.seeds);
  detail::maybe(j, "iterations", c.iterations);
  detail::maybe(j, "env_count", c.env_count);
  detail::maybe(j, "checkpoint_every", c.checkpoint_every);
  detail::maybe(j, "out_dir", c.out_dir);

  if (j.contains("reward")) {
    const auto& r = j["reward"];
    detail::maybe(r, "lambda1", c.reward.lambda1);
    detail::maybe(r, "lambda2", c.reward.lambda2);
    detail::maybe(r, "lambda3", c.reward.lambda3);
    detail::maybe(r, "roll_margin", c.reward.roll_margin);
    detail::maybe(r, "roll_sigmoid_gain", c.reward.roll_sigmoid_gain);
    detail::maybe(r, "roll_sigmoid_center", c.reward.roll_sigmoid_center);
    detail::maybe(r, "detach_threshold", c.reward.detach_threshold);
  }
  if (j.contains("curriculum")) {
    detail::maybe(j["curriculum"], "accuracy_threshold", c.thresholds.accuracy);
    detail::maybe(j["curriculum"], "stability_threshold", c.thresholds.stability);
  }
  if (j.contains("plant")) {
    const auto& p = j["plant"];
    detail::maybe(p, "link1", c.plant.link1);
    detail::maybe(p, "link2", c.plant.link2);
    detail::maybe(p, "shoulder_offset_x", c.plant.shoulder_offset_x);
    detail::maybe(p, "shoulder_offset_y", c.plant.shoulder_offset_y);
    detail::maybe(p, "mass1", c.plant.mass1);
    detail::maybe(p, "mass2", c.plant.mass2);
    detail::maybe(p, "ball_mass", c.plant.ball_mass);
    detail::maybe(p, "body_mass", c.plant.body_mass);
    detail::maybe(p, "h_min", c.plant.h_min);
    detail::maybe(p, "h_max", c.plant.h_max);
    detail::maybe(p, "h_nominal", c.plant.h_nominal);
    detail::maybe(p, "body_kp", c.plant.body_kp);
    detail::maybe(p, "body_kd", c.plant.body_kd);
    detail::maybe(p, "arm_kp", c.plant.arm_kp);
    detail::maybe(p, "arm_kd", c.plant.arm_kd);
    detail::maybe(p, "tilt_inertia", c.plant.tilt_inertia);
    detail::maybe(p, "tilt_stiffness", c.plant.tilt_stiffness);
    detail::maybe(p, "tilt_damping", c.plant.tilt_damping);
    detail::maybe(p, "tilt_coupling", c.plant.tilt_coupling);
    detail::maybe(p, "fall_bound", c.plant.fall_bound);
    detail::maybe(p, "dt", c.plant.dt);
    detail::maybe(p, "randomize", c.plant.dr.enabled);
    c.plant.sync_derived();
  }
  if (j.contains("env")) {
    const auto& e = j["env"];
    detail::maybe(e, "decimation", c.env.decimation);
    detail::maybe(e, "release_delay", c.env.release_delay);
    detail::maybe(e, "post_release_zero_delay", c.env.post_release_zero_delay);
    detail::maybe(e, "detach_threshold", c.env.detach_threshold);
    detail::maybe(e, "max_steps", c.env.max_steps);
    detail::maybe(e, "privileged_fade_iters", c.env.privileged_fade_iters);
    detail::maybe(e, "stability_wait_default", c.env.stability_wait_default);
    detail::maybe(e, "action_scale_yaw", c.env.action_scale_yaw);
    detail::maybe(e, "action_scale_crouch", c.env.action_scale_crouch);
    detail::maybe(e, "action_scale_arm", c.env.action_scale_arm);
    detail::maybe(e, "height_lo_factor", c.env.height_lo_factor);
    detail::maybe(e, "height_hi_factor", c.env.height_hi_factor);
    detail::maybe(e, "observe_tilt", c.env.observe_tilt);
    detail::maybe(e, "obs_ball_released", c.env.obs_ball_released);
    detail::maybe(e, "obs_estimate_displacement", c.env.obs_estimate_displacement);
    double cd = c.env.model.drag_coeff, g = c.env.model.gravity;
    detail::maybe(e, "drag_coeff", cd);
    detail::maybe(e, "gravity", g);
    c.env.model = cd > 0.0 ? BallisticModel::newtonian_drag(cd, g)
                           : BallisticModel::vacuum(g);
  }
  if (j.contains("ppo")) {
    const auto& p = j["ppo"];
    detail::maybe(p, "clip", c.ppo.clip);
    detail::maybe(p, "gae_lambda", c.ppo.gae_lambda);
    detail::maybe(p, "gamma", c.ppo.gamma);
    detail::maybe(p, "steps_per_env", c.ppo.steps_per_env);
    detail::maybe(p, "minibatches", c.ppo.minibatches);
    detail::maybe(p, "entropy_coef", c.ppo.entropy_coef);
    detail::maybe(p, "desired_kl", c.ppo.desired_kl);
    detail::maybe(p, "value_loss_coef", c.ppo.value_loss_coef);
    detail::maybe(p, "epochs", c.ppo.epochs);
    detail::maybe(p, "learning_rate", c.ppo.learning_rate);
    detail::maybe(p, "weight_decay", c.ppo.weight_decay);
    detail::maybe(p, "max_grad_norm", c.ppo.max_grad_norm);
    detail::maybe(p, "init_std", c.ppo.init_std);
    detail::maybe(p, "hidden", c.ppo.hidden);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    detail::maybe(e, "episodes", c.eval.episodes);
    detail::maybe(e, "distance_bins", c.eval.distance_bins);
    detail::maybe(e, "phi_bins", c.eval.phi_bins);
    detail::maybe(e, "theta_bins", c.eval.theta_bins);
    detail::maybe(e, "deterministic", c.eval.deterministic);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    detail::maybe(s, "budget", c.sweep.budget);
    detail::maybe(s, "workers", c.sweep.workers);
    detail::maybe(s, "synthetic", c.sweep.synthetic);
    detail::maybe(s, "trial_iterations", c.sweep.trial_iterations);
    detail::maybe(s, "trial_envs", c.sweep.trial_envs);
    detail::maybe(s, "trial_eval_episodes", c.sweep.trial_eval_episodes);
    detail::maybe(s, "tpe_quantile", c.sweep.tpe.quantile);
    detail::maybe(s, "tpe_candidates", c.sweep.tpe.n_candidates);
    detail::maybe(s, "tpe_startup", c.sweep.tpe.n_startup);
  }
  c.env.arm_only = c.arm_only;
  c.validate();
  return c;
}

/// Applies a sweep assignment onto a run config. Unknown names are ignored;
/// the foot-pitch toggle has no counterpart on the reduced plant and is
/// accepted as a no-op.
inline void apply_sweep_params(RunConfig& cfg, const Assignment& params) {
  const auto get = [&](const char* name, double fallback) {
    const auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  };
  cfg.stability_pct = get("stability_reward_pct", cfg.stability_pct);
  cfg.roll_pct = get("roll_reward_pct", cfg.roll_pct);
  cfg.reward_scale = get("reward_scale", cfg.reward_scale);
  cfg.thresholds.stability = get("stability_threshold", cfg.thresholds.stability);
  cfg.thresholds.accuracy = get("accuracy_threshold", cfg.thresholds.accuracy);
  cfg.ppo.desired_kl = get("desired_kl", cfg.ppo.desired_kl);
  cfg.ppo.value_loss_coef = get("value_loss_coef", cfg.ppo.value_loss_coef);
  cfg.env.observe_tilt = get("body_roll_state", cfg.env.observe_tilt ? 1.0 : 0.0) > 0.5;
  cfg.env.obs_estimate_displacement =
      get("estimate_displacement_state", cfg.env.obs_estimate_displacement ? 1.0 : 0.0) > 0.5;
  cfg.env.obs_ball_released =
      get("ball_released_state", cfg.env.obs_ball_released ? 1.0 : 0.0) > 0.5;
  if (cfg.profile == RobotProfile::kHumanoid) {
    cfg.reward.lambda1 = cfg.reward_scale;
    cfg.reward.lambda2 = cfg.reward_scale * cfg.stability_pct;
    cfg.reward.lambda3 = cfg.reward_scale * cfg.roll_pct;
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  is >> j;
  return config_from_json(j);
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config file: " + path);
  os << to_json(cfg).dump(2) << "\n";
}

}  // namespace ballista
