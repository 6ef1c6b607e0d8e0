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

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ballista/common.hpp"

namespace ballista {

// Reduced thrower: five actuated DoF (base yaw, crouch height, shoulder yaw,
// shoulder pitch, elbow pitch) plus one passive tilt DoF that stands in for
// the roll stability of the full robot. Joint dynamics are decoupled
// torque-limited PD on per-joint effective inertias; the arm hangs from a
// laterally offset shoulder so yaw and arm swings excite the tilt.

enum JointIndex : int {
  kYaw = 0,
  kCrouch = 1,
  kShoulderYaw = 2,
  kShoulderPitch = 3,
  kElbow = 4,
};

using JointVec = Eigen::Matrix<double, 5, 1>;

struct JointLimits {
  double lo = -M_PI;
  double hi = M_PI;
  double max_vel = 10.0;
  double max_torque = 20.0;
};

struct DomainRandomization {
  bool enabled = true;
  double arm_init_range = 0.3;      // [rad], shoulder yaw/pitch and elbow
  double other_init_range = 0.025;  // [rad or m], base yaw and crouch
  double mass_variation = 0.5;      // [kg]
  double mass_floor = 0.1;          // [kg]
  double root_lin_vel_noise = 0.05; // per-step observation noise ranges
  double joint_pos_noise = 0.01;
  double joint_vel_noise = 0.05;
};

struct PlantConfig {
  // Geometry. The shoulder sits offset from the base axis so that base yaw
  // carries the arm through space.
  double link1 = 0.30;  // [m], upper arm
  double link2 = 0.25;  // [m], forearm
  double shoulder_offset_x = 0.10;
  double shoulder_offset_y = 0.15;

  double mass1 = 0.7;      // [kg], upper arm
  double mass2 = 0.4;      // [kg], forearm
  double ball_mass = 0.15;       // [kg]
  double body_mass = 8.0;        // [kg], randomized
  double body_mass_nominal = 8.0;

  double h_min = 0.30;      // [m], crouch mechanical range
  double h_max = 0.90;
  double h_nominal = 0.62;

  double body_kp = 40.0, body_kd = 1.0;  // base yaw + crouch
  double arm_kp = 10.0, arm_kd = 1.0;

  std::array<JointLimits, 5> joints = {{
      {-M_PI, M_PI, 6.0, 25.0},    // base yaw
      {0.30, 0.90, 2.5, 30.0},     // crouch (limits overwritten from h_min/h_max)
      {-2.2, 2.2, 12.0, 15.0},     // shoulder yaw
      {-2.6, 2.6, 14.0, 18.0},     // shoulder pitch
      {-2.6, 2.6, 18.0, 8.0},      // elbow pitch
  }};

  // Effective inertias seen by each actuator. The crouch entry is scaled by
  // the randomized body mass at runtime.
  std::array<double, 5> inertia = {0.6, 0.8, 0.06, 0.10, 0.02};

  JointVec default_pose = (JointVec() << 0.0, 0.62, 0.0, 0.4, 0.6).finished();

  // Passive tilt dynamics, driven by lateral hand acceleration.
  double tilt_inertia = 0.35;    // [kg m^2]
  double tilt_stiffness = 28.0;  // [N m/rad]
  double tilt_damping = 1.0;     // [N m s/rad]
  double tilt_coupling = 1.2;    // dimensionless
  double fall_bound = 0.35;      // [rad]

  double dt = 0.005;  // [s], physics step

  double stop_stiffness = 4000.0;  // soft joint stops beyond the travel range
  double stop_damping = 50.0;

  DomainRandomization dr;

  static PlantConfig humanoid() {
    PlantConfig cfg;
    cfg.body_kp = 40.0;
    cfg.body_kd = 1.0;
    cfg.arm_kp = 10.0;
    cfg.arm_kd = 1.0;
    return cfg;
  }

  static PlantConfig quadruped() {
    PlantConfig cfg;
    cfg.body_kp = 80.0;
    cfg.body_kd = 1.0;
    cfg.arm_kp = 20.0;
    cfg.arm_kd = 1.0;
    cfg.body_mass = 12.0;
    cfg.body_mass_nominal = 12.0;
    cfg.tilt_stiffness = 45.0;  // four legs hold roll stiffer
    cfg.tilt_inertia = 0.5;
    return cfg;
  }

  /// Re-derives the crouch joint limits and default pose after h_min/h_max or
  /// h_nominal change.
  void sync_derived() {
    joints[kCrouch].lo = h_min;
    joints[kCrouch].hi = h_max;
    default_pose[kCrouch] = h_nominal;
  }

  double kp(int joint) const { return joint <= kCrouch ? body_kp : arm_kp; }
  double kd(int joint) const { return joint <= kCrouch ? body_kd : arm_kd; }
};

struct PlantState {
  JointVec q = JointVec::Zero();
  JointVec qdot = JointVec::Zero();
  double tilt = 0.0;       // [rad]
  double tilt_rate = 0.0;  // [rad/s]
  bool ball_attached = true;
  Vec3 ball_pos{Vec3::Zero()};
  Vec3 ball_vel{Vec3::Zero()};
  Vec3 ee_vel_prev{Vec3::Zero()};
  bool fault = false;
};

/// Joint position targets relative to the default pose.
struct MotorCommand {
  JointVec target_offset = JointVec::Zero();
};

namespace detail {

inline Vec3 rot_z(double a, const Vec3& v) {
  const double c = std::cos(a), s = std::sin(a);
  return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
}

}  // namespace detail

struct ArmPoints {
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 hand;
};

inline ArmPoints forward_kinematics(const JointVec& q, const PlantConfig& cfg) {
  const double yaw = q[kYaw];
  const double arm_yaw = yaw + q[kShoulderYaw];
  ArmPoints pts;
  pts.shoulder =
      detail::rot_z(yaw, Vec3(cfg.shoulder_offset_x, cfg.shoulder_offset_y, 0.0)) +
      Vec3(0.0, 0.0, q[kCrouch]);
  const double p1 = q[kShoulderPitch];
  const double p2 = q[kShoulderPitch] + q[kElbow];
  const Vec3 dir1 = detail::rot_z(arm_yaw, Vec3(std::sin(p1), 0.0, -std::cos(p1)));
  const Vec3 dir2 = detail::rot_z(arm_yaw, Vec3(std::sin(p2), 0.0, -std::cos(p2)));
  pts.elbow = pts.shoulder + cfg.link1 * dir1;
  pts.hand = pts.elbow + cfg.link2 * dir2;
  return pts;
}

inline Eigen::Matrix<double, 3, 5> ee_jacobian(const PlantState& state,
                                               const PlantConfig& cfg) {
  const ArmPoints pts = forward_kinematics(state.q, cfg);
  const double arm_yaw = state.q[kYaw] + state.q[kShoulderYaw];
  const double p1 = state.q[kShoulderPitch];
  const double p2 = state.q[kShoulderPitch] + state.q[kElbow];
  const Vec3 z = Vec3::UnitZ();

  Eigen::Matrix<double, 3, 5> jac;
  jac.col(kYaw) = z.cross(pts.hand);
  jac.col(kCrouch) = z;
  jac.col(kShoulderYaw) = z.cross(pts.hand - pts.shoulder);
  jac.col(kShoulderPitch) = detail::rot_z(
      arm_yaw, Vec3(cfg.link1 * std::cos(p1) + cfg.link2 * std::cos(p2), 0.0,
                    cfg.link1 * std::sin(p1) + cfg.link2 * std::sin(p2)));
  jac.col(kElbow) = detail::rot_z(
      arm_yaw, Vec3(cfg.link2 * std::cos(p2), 0.0, cfg.link2 * std::sin(p2)));
  return jac;
}

inline std::pair<Vec3, Vec3> end_effector_state(const PlantState& state,
                                                const PlantConfig& cfg) {
  const ArmPoints pts = forward_kinematics(state.q, cfg);
  const Vec3 vel = ee_jacobian(state, cfg) * state.qdot;
  return {pts.hand, vel};
}

/// One physics step: torque-limited PD per joint, soft stops, velocity caps,
/// semi-implicit Euler, then the passive tilt response to lateral hand
/// acceleration. An attached ball rigidly follows the hand.
inline PlantState step(const PlantState& state, const MotorCommand& cmd,
                       const PlantConfig& cfg) {
  PlantState next = state;
  if (state.fault) return next;

  const double dt = cfg.dt;
  for (int i = 0; i < 5; ++i) {
    const JointLimits& lim = cfg.joints[i];
    const double target =
        std::clamp(cfg.default_pose[i] + cmd.target_offset[i], lim.lo, lim.hi);
    double tau = cfg.kp(i) * (target - next.q[i]) - cfg.kd(i) * next.qdot[i];
    tau = std::clamp(tau, -lim.max_torque, lim.max_torque);
    if (next.q[i] > lim.hi)
      tau += cfg.stop_stiffness * (lim.hi - next.q[i]) - cfg.stop_damping * next.qdot[i];
    else if (next.q[i] < lim.lo)
      tau += cfg.stop_stiffness * (lim.lo - next.q[i]) - cfg.stop_damping * next.qdot[i];

    double inertia = cfg.inertia[i];
    if (i == kCrouch) inertia *= cfg.body_mass / cfg.body_mass_nominal;
    next.qdot[i] += dt * tau / inertia;
    next.qdot[i] = std::clamp(next.qdot[i], -lim.max_vel, lim.max_vel);
    next.q[i] += dt * next.qdot[i];
  }

  const auto [ee_pos, ee_vel] = end_effector_state(next, cfg);
  const double lateral_accel = (ee_vel.y() - state.ee_vel_prev.y()) / dt;
  next.ee_vel_prev = ee_vel;

  const double tilt_torque = -cfg.tilt_stiffness * next.tilt -
                             cfg.tilt_damping * next.tilt_rate +
                             cfg.tilt_coupling * cfg.mass2 * cfg.link2 * lateral_accel;
  next.tilt_rate += dt * tilt_torque / cfg.tilt_inertia;
  next.tilt += dt * next.tilt_rate;

  if (next.ball_attached) {
    next.ball_pos = ee_pos;
    next.ball_vel = ee_vel;
  }

  if (!next.q.allFinite() || !next.qdot.allFinite() || !std::isfinite(next.tilt) ||
      !std::isfinite(next.tilt_rate))
    next.fault = true;
  return next;
}

/// Fresh-episode domain randomization: joint init offsets and body mass per
/// the configured ranges. Observation noise ranges ride along in the config.
inline std::pair<PlantConfig, PlantState> randomize(const PlantConfig& cfg,
                                                    const PlantState& state,
                                                    Rng& rng) {
  PlantConfig rcfg = cfg;
  PlantState rstate = state;
  rstate.q = cfg.default_pose;
  rstate.qdot.setZero();
  rstate.tilt = 0.0;
  rstate.tilt_rate = 0.0;
  rstate.fault = false;
  rstate.ball_attached = true;

  if (cfg.dr.enabled) {
    for (int i : {kShoulderYaw, kShoulderPitch, kElbow})
      rstate.q[i] += uniform(rng, -cfg.dr.arm_init_range, cfg.dr.arm_init_range);
    for (int i : {kYaw, kCrouch})
      rstate.q[i] += uniform(rng, -cfg.dr.other_init_range, cfg.dr.other_init_range);
    for (int i = 0; i < 5; ++i)
      rstate.q[i] = std::clamp(rstate.q[i], cfg.joints[i].lo, cfg.joints[i].hi);
    rcfg.body_mass = std::max(
        cfg.dr.mass_floor,
        cfg.body_mass + uniform(rng, -cfg.dr.mass_variation, cfg.dr.mass_variation));
  }

  const auto [ee_pos, ee_vel] = end_effector_state(rstate, rcfg);
  rstate.ball_pos = ee_pos;
  rstate.ball_vel = ee_vel;
  rstate.ee_vel_prev = ee_vel;
  return {rcfg, rstate};
}

}  // namespace ballista
