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

#include "ballista/env.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "ballista/curriculum.hpp"

namespace ballista {
namespace {

EnvConfig quiet_env_config() {
  EnvConfig cfg;
  return cfg;
}

PlantConfig quiet_plant_config(bool randomize = true) {
  PlantConfig cfg = PlantConfig::humanoid();
  cfg.sync_derived();
  cfg.dr.enabled = randomize;
  return cfg;
}

RewardConfig humanoid_reward() {
  RewardConfig r;
  r.lambda1 = 2.54;
  r.lambda2 = 2.54 * 0.02;
  r.lambda3 = 2.54 * 0.17;
  return r;
}

CurriculumView general_view(double lo = 1.0, double hi = 3.0) {
  return CurriculumView{TaskMode{TaskKind::kGeneral, lo, hi}, 1.0, 2.0};
}

/// Wind back, swing forward, release mid-swing. Strong enough to detach the
/// ball with meaningful velocity on the default plant.
ThrowEnv::Action scripted_throw_action(int step) {
  ThrowEnv::Action a = ThrowEnv::Action::Zero();
  if (step < 15) {
    a[3] = -0.35;
    a[4] = -0.3;
  } else {
    a[1] = 0.8;   // push up with the crouch
    a[3] = 1.1;   // shoulder swing
    a[4] = 0.9;   // elbow extension
    if (step >= 22) a[5] = 1.5;
  }
  return a;
}

TEST(ThrowEnv, ResetIsSeedDeterministic) {
  ThrowEnv a(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 99);
  ThrowEnv b(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 99);
  a.set_curriculum(general_view());
  b.set_curriculum(general_view());
  const ThrowEnv::Obs oa = a.reset();
  const ThrowEnv::Obs ob = b.reset();
  EXPECT_TRUE(oa.isApprox(ob, 0.0));
  EXPECT_EQ(a.target().r, b.target().r);
}

TEST(ThrowEnv, DistanceResetAtLevelZeroIsFourMetres) {
  const CurriculumState cur =
      CurriculumState::make(RobotProfile::kHumanoid, TaskKind::kDistance, 12.0);
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 1);
  env.set_curriculum({task_mode(cur), cur.body_action_scale, cur.stability_wait});
  env.reset();
  EXPECT_DOUBLE_EQ(env.target().r, 4.0);
  EXPECT_DOUBLE_EQ(env.target().theta_tilde, 0.0);
  EXPECT_DOUBLE_EQ(env.target().phi, 0.0);
}

TEST(ThrowEnv, BallReleasedObservationStartsAtZero) {
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 2);
  env.set_curriculum(general_view());
  const ThrowEnv::Obs obs = env.reset();
  EXPECT_EQ(obs[22], 0.0);
}

TEST(ThrowEnv, NoReleaseMeansNoStability) {
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 3);
  env.set_curriculum(general_view());
  env.reset();
  ThrowEnv::Action a = ThrowEnv::Action::Zero();
  a[5] = 0.5;  // below the release threshold every step
  while (true) {
    const auto res = env.step(a);
    if (res.done) break;
  }
  EXPECT_FALSE(env.summary().released);
  EXPECT_EQ(env.summary().stability, 0);
  EXPECT_EQ(env.summary().accuracy, 0.0);
}

TEST(ThrowEnv, DetachHappensAfterTheConfiguredDelay) {
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 4);
  env.set_curriculum(general_view());
  env.reset();
  ThrowEnv::Action idle = ThrowEnv::Action::Zero();
  for (int i = 0; i < 5; ++i) env.step(idle);
  const double t_latch = env.time();
  ThrowEnv::Action release = ThrowEnv::Action::Zero();
  release[5] = 1.2;
  double detach_time = -1.0;
  for (int i = 0; i < 20 && detach_time < 0; ++i) {
    env.step(release);
    if (env.detached()) detach_time = env.summary().detach_time;
  }
  ASSERT_GT(detach_time, 0.0);
  EXPECT_NEAR(detach_time - t_latch, 0.1, 0.02 + 1e-9);  // one control step slack
}

TEST(ThrowEnv, ReleaseLatchIsMonotone) {
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 5);
  env.set_curriculum(general_view());
  env.reset();
  ThrowEnv::Action a = ThrowEnv::Action::Zero();
  double prev = 0.0;
  for (int i = 0; !env.done() && i < 200; ++i) {
    a[5] = (i == 10) ? 1.5 : -2.0;  // command release once, then try to retract
    const auto res = env.step(a);
    EXPECT_GE(res.obs[22], prev);
    prev = res.obs[22];
    if (res.done) break;
  }
  EXPECT_TRUE(env.summary().released);
}

TEST(ThrowEnv, ScriptedThrowRewardMatchesBruteForceOracle) {
  EnvConfig ecfg = quiet_env_config();
  ThrowEnv env(ecfg, quiet_plant_config(), humanoid_reward(), 6);
  env.set_curriculum(general_view(2.0, 4.0));
  env.reset();

  int emissions = 0;
  double emitted_throwing = -1.0;
  ReleaseState emission_state;
  bool was_emitted = false;
  for (int i = 0; !env.done() && i < 200; ++i) {
    const auto res = env.step(scripted_throw_action(i));
    if (env.throw_reward_emitted() && !was_emitted) {
      ++emissions;
      emitted_throwing = res.breakdown.throwing;
      emission_state = ReleaseState{env.plant().ball_pos, env.plant().ball_vel};
    }
    was_emitted = env.throw_reward_emitted();
    if (res.done) break;
  }
  ASSERT_TRUE(env.summary().released);
  ASSERT_EQ(emissions, 1);
  ASSERT_GE(emitted_throwing, 0.0);

  const double brute = min_distance_bruteforce(
      emission_state, env.target_cartesian(), BallisticModel::vacuum(), 2e-5);
  EXPECT_NEAR(env.summary().error, brute, 1e-4);
  EXPECT_DOUBLE_EQ(emitted_throwing,
                   throwing_reward(env.summary().error, env.target().r));
}

TEST(ThrowEnv, RewardAccountingIdentity) {
  Rng rng(7);
  for (int episode = 0; episode < 10; ++episode) {
    const RewardConfig rcfg = humanoid_reward();
    ThrowEnv env(quiet_env_config(), quiet_plant_config(), rcfg, 100 + episode);
    env.set_curriculum(general_view());
    env.reset();
    double total = 0.0, throwing = 0.0, roll = 0.0;
    int stability = 0;
    while (!env.done()) {
      ThrowEnv::Action a;
      for (int j = 0; j < 6; ++j) a[j] = uniform(rng, -1.5, 1.5);
      const auto res = env.step(a);
      total += res.reward;
      throwing += res.breakdown.throwing;
      roll += res.breakdown.roll;
      stability = res.breakdown.stability;
      ASSERT_DOUBLE_EQ(res.reward,
                       res.breakdown.total);
    }
    const double expected = rcfg.lambda1 * throwing + rcfg.lambda2 * stability +
                            rcfg.lambda3 * roll;
    EXPECT_NEAR(total, expected, 1e-9);
    EXPECT_NEAR(env.summary().episode_reward, total, 1e-9);
    // The throwing term is emitted at most once.
    EXPECT_LE(throwing, 1.0);
    if (env.summary().released) EXPECT_EQ(throwing, env.summary().accuracy);
  }
}

TEST(ThrowEnv, ActionsZeroedAfterPostReleaseDelay) {
  EnvConfig ecfg = quiet_env_config();
  PlantConfig pcfg = quiet_plant_config(false);
  ThrowEnv env(ecfg, pcfg, humanoid_reward(), 8);
  env.set_curriculum(general_view());
  env.reset();
  // Release immediately, then command a large offset; once zeroing kicks in
  // the arm must head back to the default pose.
  ThrowEnv::Action a = ThrowEnv::Action::Zero();
  a[5] = 2.0;
  env.step(a);
  ThrowEnv::Action wild = ThrowEnv::Action::Zero();
  wild[3] = 2.0;
  wild[5] = 2.0;
  for (int i = 0; i < 40 && !env.done(); ++i) env.step(wild);
  ASSERT_TRUE(env.detached());
  ASSERT_GT(env.time(), env.summary().detach_time + 0.3);
  // Well past the zero delay: joints near default pose despite the command.
  const double err =
      std::abs(env.plant().q[kShoulderPitch] - pcfg.default_pose[kShoulderPitch]);
  EXPECT_LT(err, 0.2);
}

TEST(ThrowEnv, NanActionFaultsEpisode) {
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 9);
  env.set_curriculum(general_view());
  env.reset();
  ThrowEnv::Action a = ThrowEnv::Action::Zero();
  a[2] = std::numeric_limits<double>::quiet_NaN();
  const auto res = env.step(a);
  EXPECT_TRUE(res.done);
  EXPECT_TRUE(env.summary().faulted);
  EXPECT_EQ(env.summary().stability, 0);
  EXPECT_THROW(env.step(ThrowEnv::Action::Zero()), std::logic_error);
}

TEST(ThrowEnv, ArmOnlyModeFreezesBodyJoints) {
  EnvConfig ecfg = quiet_env_config();
  ecfg.arm_only = true;
  ThrowEnv env(ecfg, quiet_plant_config(), humanoid_reward(), 10);
  env.set_curriculum(general_view());
  env.reset();
  const double yaw0 = env.plant().q[kYaw];
  const double crouch0 = env.plant().q[kCrouch];
  Rng rng(11);
  for (int i = 0; i < 100 && !env.done(); ++i) {
    ThrowEnv::Action a;
    for (int j = 0; j < 6; ++j) a[j] = uniform(rng, -2, 2);
    env.step(a);
    ASSERT_EQ(env.plant().q[kYaw], yaw0);
    ASSERT_EQ(env.plant().q[kCrouch], crouch0);
  }
}

TEST(ThrowEnv, PrivilegedFadeBlendsToMatchedNoise) {
  EnvConfig ecfg = quiet_env_config();
  PlantConfig pcfg = quiet_plant_config(false);  // no obs noise
  ThrowEnv env(ecfg, pcfg, humanoid_reward(), 12);
  env.set_curriculum(general_view());

  env.set_training_iteration(0);
  EXPECT_DOUBLE_EQ(env.fade_beta(), 0.0);
  const ThrowEnv::Obs obs0 = env.reset();
  EXPECT_NEAR(obs0[23], ecfg.scale_est * env.last_true_estimate(), 1e-12);

  env.set_training_iteration(50);
  EXPECT_DOUBLE_EQ(env.fade_beta(), 0.5);
  env.set_training_iteration(100);
  EXPECT_DOUBLE_EQ(env.fade_beta(), 1.0);
  env.set_training_iteration(250);
  EXPECT_DOUBLE_EQ(env.fade_beta(), 1.0);
}

TEST(ThrowEnv, FadedChannelDecorrelatesFromTruth) {
  EnvConfig ecfg = quiet_env_config();
  PlantConfig pcfg = quiet_plant_config(false);
  ThrowEnv env(ecfg, pcfg, humanoid_reward(), 13);
  env.set_curriculum(general_view());
  env.set_training_iteration(200);  // beta = 1
  Rng rng(14);
  // Warm the estimate statistics the way 100+ training iterations would have.
  for (int e = 0; e < 40; ++e) {
    env.reset();
    while (!env.done()) {
      ThrowEnv::Action a;
      for (int j = 0; j < 6; ++j) a[j] = uniform(rng, -1, 1);
      env.step(a);
    }
  }
  std::vector<double> channel, truth;
  while (channel.size() < 10000) {
    ThrowEnv::Obs obs = env.reset();
    while (!env.done() && channel.size() < 10000) {
      channel.push_back(obs[23]);
      truth.push_back(env.last_true_estimate());
      ThrowEnv::Action a;
      for (int j = 0; j < 6; ++j) a[j] = uniform(rng, -1, 1);
      const auto res = env.step(a);
      obs = res.obs;
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const double mc = mean(channel), mt = mean(truth);
  double num = 0, dc = 0, dt = 0;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    num += (channel[i] - mc) * (truth[i] - mt);
    dc += (channel[i] - mc) * (channel[i] - mc);
    dt += (truth[i] - mt) * (truth[i] - mt);
  }
  const double rho = num / std::sqrt(dc * dt);
  EXPECT_LT(std::abs(rho), 0.05);
}

TEST(VectorEnv, BatchOfOneMatchesSingleEnv) {
  const auto seeds = std::vector<std::uint64_t>{12345};
  ThrowVectorEnv venv(seeds, quiet_env_config(), quiet_plant_config(), humanoid_reward());
  ThrowEnv env(quiet_env_config(), quiet_plant_config(), humanoid_reward(), 12345);
  venv.set_curriculum(general_view());
  env.set_curriculum(general_view());
  venv.reset_all();
  ThrowEnv::Obs obs = env.reset();
  EXPECT_TRUE(venv.observations().col(0).isApprox(obs, 0.0));
  Rng rng(15);
  for (int i = 0; i < 60; ++i) {
    Eigen::MatrixXd act(6, 1);
    for (int j = 0; j < 6; ++j) act(j, 0) = uniform(rng, -1, 1);
    const auto batch = venv.step(act);
    if (!env.done()) {
      const auto res = env.step(act.col(0));
      ASSERT_DOUBLE_EQ(batch.rewards[0], res.reward);
      if (res.done) break;  // auto-reset diverges past this point by design
      ASSERT_TRUE(venv.observations().col(0).isApprox(res.obs, 0.0));
    }
  }
}

TEST(VectorEnv, PermutingSeedsPermutesOutputs) {
  const std::vector<std::uint64_t> seeds{11, 22, 33, 44};
  const std::vector<int> perm{2, 0, 3, 1};
  ThrowVectorEnv a(seeds, quiet_env_config(), quiet_plant_config(), humanoid_reward());
  std::vector<std::uint64_t> permuted_seeds(4);
  for (int i = 0; i < 4; ++i) permuted_seeds[i] = seeds[perm[i]];
  ThrowVectorEnv b(permuted_seeds, quiet_env_config(), quiet_plant_config(),
                   humanoid_reward());
  a.set_curriculum(general_view());
  b.set_curriculum(general_view());
  a.reset_all();
  b.reset_all();
  Rng rng(16);
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd act_a(6, 4);
    for (int c = 0; c < 4; ++c)
      for (int j = 0; j < 6; ++j) act_a(j, c) = uniform(rng, -1, 1);
    Eigen::MatrixXd act_b(6, 4);
    for (int i = 0; i < 4; ++i) act_b.col(i) = act_a.col(perm[i]);
    const auto ra = a.step(act_a);
    const auto rb = b.step(act_b);
    for (int i = 0; i < 4; ++i) {
      ASSERT_DOUBLE_EQ(rb.rewards[i], ra.rewards[perm[i]]);
      ASSERT_EQ(rb.dones[i], ra.dones[perm[i]]);
      ASSERT_TRUE(b.observations().col(i).isApprox(a.observations().col(perm[i]), 0.0));
    }
  }
}

TEST(VectorEnv, ShapeMismatchThrows) {
  ThrowVectorEnv venv(ThrowVectorEnv::sequential_seeds(4, 0), quiet_env_config(),
                      quiet_plant_config(), humanoid_reward());
  venv.set_curriculum(general_view());
  venv.reset_all();
  EXPECT_THROW(venv.step(Eigen::MatrixXd::Zero(6, 3)), std::invalid_argument);
  EXPECT_THROW(venv.step(Eigen::MatrixXd::Zero(5, 4)), std::invalid_argument);
}

TEST(VectorEnv, ThroughputSmoke) {
  const int n = 64;
  ThrowVectorEnv venv(ThrowVectorEnv::sequential_seeds(n, 0), quiet_env_config(),
                      quiet_plant_config(), humanoid_reward());
  venv.set_curriculum(general_view());
  venv.reset_all();
  Rng rng(17);
  Eigen::MatrixXd act(6, n);
  const int iters = 400;
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < iters; ++t) {
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < 6; ++j) act(j, c) = uniform(rng, -1, 1);
    venv.step(act);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double steps_per_s = static_cast<double>(n) * iters / elapsed;
  const double cores = std::max(1u, std::thread::hardware_concurrency());
  const double required = 50000.0 * std::min(1.0, cores / 8.0);
  ASSERT_GT(steps_per_s, required)
      << "measured " << steps_per_s << " env-steps/s on " << cores << " cores";
}

}  // namespace
}  // namespace ballista
