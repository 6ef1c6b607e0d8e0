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

#include "ballista/plant.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace ballista {
namespace {

PlantConfig test_config() {
  PlantConfig cfg = PlantConfig::humanoid();
  cfg.sync_derived();
  return cfg;
}

PlantState default_state(const PlantConfig& cfg) {
  PlantState st;
  st.q = cfg.default_pose;
  const auto [pos, vel] = end_effector_state(st, cfg);
  st.ball_pos = pos;
  st.ball_vel = vel;
  st.ee_vel_prev = vel;
  return st;
}

TEST(ForwardKinematics, HomePoseAllJointsZero) {
  const PlantConfig cfg = test_config();
  JointVec q = JointVec::Zero();
  const ArmPoints pts = forward_kinematics(q, cfg);
  // Arm hangs straight down from the offset shoulder at zero crouch.
  EXPECT_NEAR(pts.hand.x(), cfg.shoulder_offset_x, 1e-12);
  EXPECT_NEAR(pts.hand.y(), cfg.shoulder_offset_y, 1e-12);
  EXPECT_NEAR(pts.hand.z(), -(cfg.link1 + cfg.link2), 1e-12);
}

TEST(ForwardKinematics, BaseYawRotatesHandAboutZ) {
  const PlantConfig cfg = test_config();
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    JointVec q;
    q << 0.0, uniform(rng, 0.3, 0.9), uniform(rng, -2, 2), uniform(rng, -2.5, 2.5),
        uniform(rng, -2.5, 2.5);
    const Vec3 hand0 = forward_kinematics(q, cfg).hand;
    const double yaw = uniform(rng, -M_PI, M_PI);
    q[kYaw] = yaw;
    const Vec3 hand1 = forward_kinematics(q, cfg).hand;
    const Vec3 expected(std::cos(yaw) * hand0.x() - std::sin(yaw) * hand0.y(),
                        std::sin(yaw) * hand0.x() + std::cos(yaw) * hand0.y(),
                        hand0.z());
    EXPECT_LT((hand1 - expected).norm(), 1e-12);
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const PlantConfig cfg = test_config();
  Rng rng(2);
  const double eps = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    PlantState st;
    st.q << uniform(rng, -M_PI, M_PI), uniform(rng, 0.3, 0.9), uniform(rng, -2.2, 2.2),
        uniform(rng, -2.6, 2.6), uniform(rng, -2.6, 2.6);
    st.qdot << uniform(rng, -5, 5), uniform(rng, -2, 2), uniform(rng, -8, 8),
        uniform(rng, -10, 10), uniform(rng, -10, 10);
    const Vec3 analytic = ee_jacobian(st, cfg) * st.qdot;

    PlantState plus = st, minus = st;
    plus.q += eps * st.qdot;
    minus.q -= eps * st.qdot;
    const Vec3 fd = (forward_kinematics(plus.q, cfg).hand -
                     forward_kinematics(minus.q, cfg).hand) /
                    (2 * eps);
    EXPECT_LT((analytic - fd).norm() / std::max(1.0, analytic.norm()), 1e-5);
  }
}

TEST(PlantStep, EquilibriumAtDefaultPose) {
  const PlantConfig cfg = test_config();
  PlantState st = default_state(cfg);
  const MotorCommand zero;
  for (int i = 0; i < 400; ++i) st = step(st, zero, cfg);
  EXPECT_LT((st.q - cfg.default_pose).norm(), 1e-9);
  EXPECT_LT(st.qdot.norm(), 1e-9);
  EXPECT_NEAR(st.tilt, 0.0, 1e-9);
}

TEST(PlantStep, ElbowSettlesToConstantTarget) {
  PlantConfig cfg = test_config();
  cfg.joints[kElbow].max_torque = 1e9;  // no limits for this check
  cfg.joints[kElbow].max_vel = 1e9;
  PlantState st = default_state(cfg);
  MotorCommand cmd;
  cmd.target_offset[kElbow] = 0.5;
  const double target = cfg.default_pose[kElbow] + 0.5;
  for (int i = 0; i < 200; ++i) st = step(st, cmd, cfg);  // 1 s
  EXPECT_NEAR(st.q[kElbow], target, 0.02 * 0.5);
}

TEST(PlantStep, ViolentSwingExcitesTiltOnlyWithCoupling) {
  PlantConfig cfg = test_config();
  PlantState st = default_state(cfg);
  MotorCommand cmd;
  cmd.target_offset[kShoulderYaw] = 2.0;  // lateral whip
  cmd.target_offset[kShoulderPitch] = 1.5;
  double max_tilt = 0.0;
  for (int i = 0; i < 200; ++i) {
    st = step(st, cmd, cfg);
    max_tilt = std::max(max_tilt, std::abs(st.tilt));
  }
  EXPECT_GT(max_tilt, 0.01);

  cfg.tilt_coupling = 0.0;
  st = default_state(cfg);
  for (int i = 0; i < 200; ++i) {
    st = step(st, cmd, cfg);
    EXPECT_EQ(st.tilt, 0.0);
  }
}

TEST(PlantStep, EnergyDissipatesWithZeroCommands) {
  PlantConfig cfg = test_config();
  cfg.tilt_coupling = 0.0;  // one-way coupling is not part of the energy budget
  PlantState st = default_state(cfg);
  st.q[kShoulderPitch] += 0.4;
  st.q[kElbow] -= 0.3;
  st.qdot[kShoulderYaw] = 1.0;
  const MotorCommand zero;
  const auto energy = [&](const PlantState& s) {
    double e = 0.5 * cfg.tilt_inertia * s.tilt_rate * s.tilt_rate +
               0.5 * cfg.tilt_stiffness * s.tilt * s.tilt;
    for (int i = 0; i < 5; ++i) {
      const double inertia =
          i == kCrouch ? cfg.inertia[i] * cfg.body_mass / cfg.body_mass_nominal
                       : cfg.inertia[i];
      e += 0.5 * inertia * s.qdot[i] * s.qdot[i] +
           0.5 * cfg.kp(i) * std::pow(cfg.default_pose[i] - s.q[i], 2);
    }
    return e;
  };
  double prev = energy(st);
  for (int i = 0; i < 600; ++i) {
    st = step(st, zero, cfg);
    const double e = energy(st);
    EXPECT_LE(e, prev + 1e-9);
    prev = e;
  }
}

TEST(PlantStep, FaultOnNonFiniteState) {
  const PlantConfig cfg = test_config();
  PlantState st = default_state(cfg);
  st.q[kElbow] = std::numeric_limits<double>::quiet_NaN();
  const PlantState next = step(st, MotorCommand{}, cfg);
  EXPECT_TRUE(next.fault);
}

TEST(Randomize, ArmOffsetsCoverTheConfiguredRange) {
  const PlantConfig cfg = test_config();
  Rng rng(3);
  double lo = 1e9, hi = -1e9, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto [rcfg, rstate] = randomize(cfg, PlantState{}, rng);
    const double off = rstate.q[kShoulderPitch] - cfg.default_pose[kShoulderPitch];
    lo = std::min(lo, off);
    hi = std::max(hi, off);
    sum += off;
  }
  EXPECT_GE(lo, -0.3);
  EXPECT_LE(hi, 0.3);
  EXPECT_LT(lo, -0.29);  // the range is actually visited
  EXPECT_GT(hi, 0.29);
  EXPECT_NEAR(sum / n, 0.0, 0.005);
}

TEST(Randomize, DisabledLeavesEverythingAlone) {
  PlantConfig cfg = test_config();
  cfg.dr.enabled = false;
  Rng rng(4);
  const auto [rcfg, rstate] = randomize(cfg, PlantState{}, rng);
  EXPECT_EQ(rcfg.body_mass, cfg.body_mass);
  EXPECT_TRUE(rstate.q.isApprox(cfg.default_pose));
  EXPECT_EQ(rstate.qdot.norm(), 0.0);
}

TEST(Randomize, BodyMassClampedAtFloor) {
  PlantConfig cfg = test_config();
  cfg.body_mass = 0.3;  // variation +-0.5 kg would cross zero
  Rng rng(5);
  double lo = 1e9;
  for (int i = 0; i < 100000; ++i) {
    const auto [rcfg, rstate] = randomize(cfg, PlantState{}, rng);
    lo = std::min(lo, rcfg.body_mass);
    ASSERT_GE(rcfg.body_mass, cfg.dr.mass_floor);
  }
  EXPECT_NEAR(lo, cfg.dr.mass_floor, 1e-6);
}

TEST(Randomize, OtherJointsUseTighterRange) {
  const PlantConfig cfg = test_config();
  Rng rng(6);
  for (int i = 0; i < 20000; ++i) {
    const auto [rcfg, rstate] = randomize(cfg, PlantState{}, rng);
    EXPECT_LE(std::abs(rstate.q[kYaw] - cfg.default_pose[kYaw]), 0.025);
    EXPECT_LE(std::abs(rstate.q[kCrouch] - cfg.default_pose[kCrouch]), 0.025);
  }
}

TEST(PlantStep, DeterministicUnderIdenticalSeeds) {
  const PlantConfig cfg = test_config();
  Rng rng_a(7), rng_b(7);
  auto [cfg_a, st_a] = randomize(cfg, PlantState{}, rng_a);
  auto [cfg_b, st_b] = randomize(cfg, PlantState{}, rng_b);
  Rng cmd_rng(8);
  for (int i = 0; i < 500; ++i) {
    MotorCommand cmd;
    for (int j = 0; j < 5; ++j) cmd.target_offset[j] = uniform(cmd_rng, -1, 1);
    st_a = step(st_a, cmd, cfg_a);
    st_b = step(st_b, cmd, cfg_b);
    ASSERT_EQ(memcmp(st_a.q.data(), st_b.q.data(), 5 * sizeof(double)), 0);
    ASSERT_EQ(st_a.tilt, st_b.tilt);
  }
}

}  // namespace
}  // namespace ballista
