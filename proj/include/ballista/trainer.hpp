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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ballista/checkpoint.hpp"
#include "ballista/config.hpp"
#include "ballista/curriculum.hpp"
#include "ballista/env.hpp"
#include "ballista/learner.hpp"

namespace ballista {

struct CurvePoint {
  int iteration = 0;
  double mean_reward = 0.0;
  double accuracy = 0.0;
  double stability_rate = 0.0;
  double kl = 0.0;
  double lr = 0.0;
  double level = 0.0;
  double body_action_scale = 0.0;
  double stability_wait = 0.0;
  int episodes = 0;
  double mean_error = 0.0;
  double fade_beta = 0.0;
};

struct TrainResult {
  ActorCritic<float> policy;
  std::vector<CurvePoint> curve;
  CurriculumState curriculum;
  std::string checkpoint_path;
  std::string curves_path;
};

inline constexpr const char* kCurvesHeader =
    "iteration,mean_reward,accuracy,stability_rate,kl,lr,level,"
    "body_action_scale,stability_wait,episodes,mean_error,fade_beta\n";

inline constexpr const char* kCurriculumHeader =
    "iteration,level,body_action_scale,stability_wait,range_lo,range_hi,"
    "mean_accuracy,stability_rate\n";

/// Full training loop for one seed: collect -> GAE -> PPO update ->
/// curriculum update -> privileged fade, with periodic checkpoints and CSV
/// curves. On a numerical fault an emergency checkpoint is written before the
/// fault propagates.
inline TrainResult train_run(const RunConfig& cfg, std::uint64_t seed,
                             std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);

  Rng rng(seed);
  ActorCritic<float> ac = ActorCritic<float>::make(
      ThrowEnv::kObsDim, ThrowEnv::kActDim, cfg.ppo.hidden, cfg.ppo.init_std, rng);
  AdamW<float> opt(0.9, 0.999, 1e-8, cfg.ppo.weight_decay);
  double lr = cfg.ppo.learning_rate;

  CurriculumState curriculum = cfg.make_curriculum();
  ThrowVectorEnv venv(ThrowVectorEnv::sequential_seeds(cfg.env_count, seed),
                      cfg.env, cfg.plant, cfg.reward);
  auto view = [&] {
    return CurriculumView{task_mode(curriculum), curriculum.body_action_scale,
                          curriculum.stability_wait};
  };
  venv.set_curriculum(view());
  venv.set_training_iteration(0);
  venv.reset_all();

  std::ofstream curves(dir / "curves.csv");
  curves << kCurvesHeader;
  std::ofstream cur_trace(dir / "curriculum.csv");
  cur_trace << kCurriculumHeader;

  TrainResult result;
  result.curves_path = (dir / "curves.csv").string();
  result.checkpoint_path = (dir / "ckpt_final.bin").string();

  const auto emergency = [&] {
    save_checkpoint(ac, cfg.ppo.hidden, (dir / "ckpt_fault.bin").string());
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    venv.set_training_iteration(it);

    RolloutBuffer<float> buf;
    UpdateStats stats;
    try {
      buf = collect(ac, venv, cfg.ppo.steps_per_env, rng);
      compute_gae(buf, cfg.ppo.gamma, cfg.ppo.gae_lambda);
      stats = update(ac, buf, cfg.ppo, opt, lr, rng);
    } catch (const NumericalFault&) {
      emergency();
      throw;
    }

    const auto summaries = venv.drain_completed();
    IterationMetrics metrics;
    CurvePoint pt;
    pt.iteration = it;
    pt.episodes = static_cast<int>(summaries.size());
    if (!summaries.empty()) {
      double acc = 0.0, stab = 0.0, rew = 0.0, err = 0.0;
      for (const auto& s : summaries) {
        acc += s.accuracy;
        stab += s.stability;
        rew += s.episode_reward;
        err += s.released ? s.error : s.target_r;
      }
      metrics.mean_accuracy = acc / summaries.size();
      metrics.stability_rate = stab / summaries.size();
      pt.mean_reward = rew / summaries.size();
      pt.mean_error = err / summaries.size();
    }
    pt.accuracy = metrics.mean_accuracy;
    pt.stability_rate = metrics.stability_rate;
    pt.kl = stats.kl;
    pt.lr = stats.lr;
    pt.fade_beta = venv.env(0).fade_beta();

    curriculum = update(curriculum, metrics);
    const int remaining = cfg.iterations - (it + 1);
    if (remaining >= 1 && remaining <= curriculum.final_ramp_iters)
      curriculum = final_distance_ramp(curriculum, remaining);
    venv.set_curriculum(view());

    pt.level = curriculum.level;
    pt.body_action_scale = curriculum.body_action_scale;
    pt.stability_wait = curriculum.stability_wait;
    result.curve.push_back(pt);

    curves << csv_row({static_cast<double>(pt.iteration), pt.mean_reward,
                       pt.accuracy, pt.stability_rate, pt.kl, pt.lr, pt.level,
                       pt.body_action_scale, pt.stability_wait,
                       static_cast<double>(pt.episodes), pt.mean_error,
                       pt.fade_beta});
    const auto [range_lo, range_hi] = task_range(curriculum);
    cur_trace << csv_row({static_cast<double>(curriculum.iteration),
                          curriculum.level, curriculum.body_action_scale,
                          curriculum.stability_wait, range_lo, range_hi,
                          metrics.mean_accuracy, metrics.stability_rate});

    if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(ac, cfg.ppo.hidden,
                      (dir / ("ckpt_" + std::to_string(it + 1) + ".bin")).string());

    if (log && (it % 50 == 0 || it + 1 == cfg.iterations))
      *log << "iter " << it << " reward " << pt.mean_reward << " acc "
           << pt.accuracy << " stab " << pt.stability_rate << " level "
           << pt.level << "\n";
  }

  save_checkpoint(ac, cfg.ppo.hidden, result.checkpoint_path);
  result.policy = std::move(ac);
  result.curriculum = curriculum;
  return result;
}

}  // namespace ballista
