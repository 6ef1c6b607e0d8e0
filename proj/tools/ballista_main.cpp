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

// Command-line front end: training, evaluation, sweeps, ballistics
// verification and plot-data export.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical fault,
// 3 tolerance failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ballista/checkpoint.hpp"
#include "ballista/config.hpp"
#include "ballista/eval.hpp"
#include "ballista/trainer.hpp"
#include "ballista/tuner.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ballista;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitTolerance = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode, profile, task;
  int iterations = 0;
  int envs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "run config JSON");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "override the config seed list with one seed");
  cmd->add_option("--out", flags.out, "override output directory");
  cmd->add_option("--mode", flags.mode, "arm_only|full_body")
      ->check(CLI::IsMember({"arm_only", "full_body"}));
  cmd->add_option("--profile", flags.profile, "humanoid|quadruped")
      ->check(CLI::IsMember({"humanoid", "quadruped"}));
  cmd->add_option("--task", flags.task, "distance|general")
      ->check(CLI::IsMember({"distance", "general"}));
  cmd->add_option("--iterations", flags.iterations, "override training iterations");
  cmd->add_option("--envs", flags.envs, "override environment count");
}

RunConfig resolve_config(const CommonFlags& flags) {
  nlohmann::json j;
  if (!flags.config_path.empty()) {
    std::ifstream is(flags.config_path);
    if (!is) throw std::invalid_argument("cannot open config: " + flags.config_path);
    is >> j;
  }
  if (!flags.profile.empty()) j["profile"] = flags.profile;
  if (!flags.task.empty()) j["task"] = flags.task;
  if (!flags.mode.empty()) j["mode"] = flags.mode;
  RunConfig cfg = config_from_json(j);
  if (flags.seed) cfg.seeds = {*flags.seed};
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.iterations > 0) cfg.iterations = flags.iterations;
  if (flags.envs > 0) cfg.env_count = flags.envs;
  cfg.validate();
  return cfg;
}

int cmd_train(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  for (const std::uint64_t seed : cfg.seeds) {
    std::cout << "training seed " << seed << " -> " << cfg.out_dir << "\n";
    const TrainResult result = train_run(cfg, seed, &std::cout);
    std::cout << "final checkpoint: " << result.checkpoint_path << "\n";
  }
  return kExitOk;
}

int cmd_eval(const CommonFlags& flags, const std::string& checkpoint_path,
             int episodes) {
  RunConfig cfg = resolve_config(flags);
  if (episodes >= 0) cfg.eval.episodes = episodes;
  const ActorCritic<float> ac = load_checkpoint(checkpoint_path);
  if (ac.obs_dim != ThrowEnv::kObsDim || ac.act_dim != ThrowEnv::kActDim)
    throw std::invalid_argument("checkpoint layout does not match the environment");

  // Full-difficulty evaluation: curriculum at level 1.
  CurriculumState cur = cfg.make_curriculum();
  cur.level = 1.0;
  if (cur.has_body_ramp()) {
    cur.body_action_scale = 1.0;
    cur.stability_wait = 2.0;
  }
  const CurriculumView view{task_mode(cur), cur.body_action_scale, cur.stability_wait};

  const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();
  const EvalReport report =
      evaluate_policy(mean_policy(ac), cfg, view, seed, cfg.eval.episodes);
  write_eval_report(report, cfg, cfg.out_dir);
  std::cout << "episodes " << report.episodes.size() << " mean_error "
            << report.mean_error << " stability " << report.stability_rate
            << " -> " << cfg.out_dir << "\n";
  return kExitOk;
}

double synthetic_objective(const Assignment& params) {
  // Smooth deterministic stand-in for a training run so sweep plumbing can be
  // exercised in milliseconds.
  double score = 2.0;
  const auto quad = [&](const char* name, double lo, double hi, double opt) {
    const auto it = params.find(name);
    if (it == params.end()) return;
    const double u = (it->second - lo) / (hi - lo);
    score -= (u - opt) * (u - opt);
  };
  quad("accuracy_threshold", 0.0, 1.0, 0.51);
  quad("stability_threshold", 0.0, 1.0, 0.22);
  quad("reward_scale", 0.5, 5.0, 0.45);
  quad("roll_reward_pct", 0.0, 0.5, 0.34);
  return score;
}

int cmd_sweep(const CommonFlags& flags, int budget, int workers, bool synthetic) {
  RunConfig cfg = resolve_config(flags);
  if (budget > 0) cfg.sweep.budget = budget;
  if (workers > 0) cfg.sweep.workers = workers;
  if (synthetic) cfg.sweep.synthetic = true;
  fs::create_directories(cfg.out_dir);
  const std::string history_path = (fs::path(cfg.out_dir) / "history.jsonl").string();

  const SearchSpace space = SearchSpace::study_default();
  const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();

  const auto run_trial = [&](const Assignment& params, int trial_id) -> double {
    if (cfg.sweep.synthetic) return synthetic_objective(params);
    RunConfig trial_cfg = cfg;
    trial_cfg.iterations = cfg.sweep.trial_iterations;
    trial_cfg.env_count = cfg.sweep.trial_envs;
    trial_cfg.checkpoint_every = 0;
    trial_cfg.out_dir =
        (fs::path(cfg.out_dir) / ("trial_" + std::to_string(trial_id))).string();
    apply_sweep_params(trial_cfg, params);
    const TrainResult result = train_run(trial_cfg, seed + trial_id, nullptr);
    CurriculumState cur = trial_cfg.make_curriculum();
    cur.level = result.curriculum.level;
    const CurriculumView view{task_mode(cur), result.curriculum.body_action_scale,
                              result.curriculum.stability_wait};
    const EvalReport report =
        evaluate_policy(mean_policy(result.policy), trial_cfg, view, seed,
                        cfg.sweep.trial_eval_episodes);
    return sweep_objective(report.mean_accuracy, report.stability_rate);
  };

  const SweepResult result = run_sweep(space, cfg.sweep.budget, cfg.sweep.workers,
                                       run_trial, history_path, cfg.sweep.tpe, seed);

  nlohmann::json best;
  best["id"] = result.best.id;
  best["objective"] = result.best.objective;
  best["params"] = result.best.params;
  std::ofstream os(fs::path(cfg.out_dir) / "best.json");
  os << best.dump(2) << "\n";
  std::cout << "sweep complete: " << cfg.sweep.budget << " trials, best objective "
            << result.best.objective << "\n";
  return kExitOk;
}

int cmd_ballistics_check(int cases, double tolerance, const std::string& dump_csv) {
  Rng rng(42);
  double max_diff = 0.0;
  for (int i = 0; i < cases; ++i) {
    ReleaseState release;
    release.position = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.2, 2.0));
    release.velocity =
        Vec3(uniform(rng, -10, 10), uniform(rng, -10, 10), uniform(rng, -4, 12));
    const BallisticModel model =
        (i % 2 == 0) ? BallisticModel::vacuum()
                     : BallisticModel::newtonian_drag(uniform(rng, 0.005, 0.1));
    const Vec3 target(uniform(rng, -8, 8), uniform(rng, -8, 8), uniform(rng, 0, 4));
    const double refined = displacement_error(release, target, model);
    const double brute = min_distance_bruteforce(release, target, model, 2e-5);
    max_diff = std::max(max_diff, std::abs(refined - brute));
  }

  // Zero-drag model must coincide with the vacuum closed form.
  double max_cd0 = 0.0;
  for (int i = 0; i < 20; ++i) {
    ReleaseState release;
    release.position = Vec3(0, 0, uniform(rng, 0.5, 2.0));
    release.velocity = Vec3(uniform(rng, -8, 8), uniform(rng, -8, 8), uniform(rng, 0, 8));
    const Trajectory vac = predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 10.0);
    const Trajectory cd0 =
        predict_trajectory(release, BallisticModel::newtonian_drag(0.0), 1e-3, 10.0);
    for (std::size_t k = 0; k < std::min(vac.size(), cd0.size()); ++k)
      max_cd0 = std::max(max_cd0, (vac.positions[k] - cd0.positions[k]).norm());
  }

  if (!dump_csv.empty()) {
    const ReleaseState release{Vec3(0, 0, 1), Vec3(3, 0, 3)};
    const Trajectory traj =
        predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 10.0);
    std::ofstream os(dump_csv);
    trajectory_to_csv(traj, os);
  }

  std::cout << "cases " << cases << " max |dE| " << max_diff << " (tolerance "
            << tolerance << "), cd=0 max sample gap " << max_cd0 << "\n";
  if (max_diff > tolerance || max_cd0 > 1e-9) {
    std::cout << "FAIL\n";
    return kExitTolerance;
  }
  std::cout << "PASS\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ballista: full-body throwing on a reduced articulated thrower"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, sweep_flags, init_flags;

  auto* init = app.add_subcommand("init-config", "write a config with all defaults");
  std::string init_out = "ballista.json";
  init->add_option("--out", init_out, "output path");
  add_common(init, init_flags, false);

  auto* train = app.add_subcommand("train", "train policies for every seed");
  add_common(train, train_flags, true);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint;
  int eval_episodes = -1;
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  eval->add_option("--episodes", eval_episodes, "episode count (0 = empty report)");
  add_common(eval, eval_flags, true);

  auto* sweep = app.add_subcommand("sweep", "TPE hyperparameter sweep");
  int budget = 0, workers = 0;
  bool synthetic = false;
  sweep->add_option("--budget", budget, "complete-trial budget");
  sweep->add_option("--workers", workers, "parallel trial evaluators");
  sweep->add_flag("--synthetic", synthetic, "use the built-in benchmark objective");
  add_common(sweep, sweep_flags, true);

  auto* check = app.add_subcommand("ballistics-check", "oracle equivalence gate");
  int cases = 1000;
  double tolerance = 1e-4;
  std::string dump_csv;
  check->add_option("--cases", cases, "random case count");
  check->add_option("--tolerance", tolerance, "max allowed |dE| in metres");
  check->add_option("--dump", dump_csv, "write a sample trajectory CSV");

  auto* plot = app.add_subcommand("plot-data", "polar-grid difference export");
  std::string grid_a, grid_b, plot_out = "polar_diff.csv";
  plot->add_option("--grid-a", grid_a, "first polar_grid.csv")->required();
  plot->add_option("--grid-b", grid_b, "second polar_grid.csv")->required();
  plot->add_option("--out", plot_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (init->parsed()) {
      RunConfig cfg;
      if (!init_flags.profile.empty()) cfg.profile = profile_from_string(init_flags.profile);
      if (!init_flags.task.empty()) cfg.task = task_from_string(init_flags.task);
      if (!init_flags.mode.empty()) cfg.arm_only = init_flags.mode == "arm_only";
      cfg.apply_profile_defaults();
      save_config(cfg, init_out);
      std::cout << "wrote " << init_out << "\n";
      return kExitOk;
    }
    if (train->parsed()) return cmd_train(train_flags);
    if (eval->parsed()) return cmd_eval(eval_flags, checkpoint, eval_episodes);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, budget, workers, synthetic);
    if (check->parsed()) return cmd_ballistics_check(cases, tolerance, dump_csv);
    if (plot->parsed()) {
      polar_grid_difference(grid_a, grid_b, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return kExitOk;
    }
  } catch (const NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
