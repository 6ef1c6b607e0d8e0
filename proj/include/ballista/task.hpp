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

#include "ballista/common.hpp"

namespace ballista {

/// Throw target in spherical coordinates: theta_tilde is the cosine of the
/// polar angle (1 = straight up, 0 = on the ground plane), phi the azimuth,
/// r the radius.
struct TargetCommand {
  double theta_tilde = 0.0;  // [0, 1]
  double phi = 0.0;          // [0, 2*pi)
  double r = 1.0;            // [m], > 0
};

enum class TaskKind { kDistance, kGeneral };

struct TaskMode {
  TaskKind kind = TaskKind::kGeneral;
  double range_lo = 1.0;  // [m]
  double range_hi = 3.0;  // [m]
};

struct RewardConfig {
  double lambda1 = 2.54;   // throwing term weight
  double lambda2 = 0.0508; // stability term weight
  double lambda3 = 0.4318; // roll term weight
  double roll_margin = 0.1;        // [rad], safe band where the term is positive
  double roll_sigmoid_gain = 10.0; // [1/rad]
  double roll_sigmoid_center = 0.3;// [rad]
  double detach_threshold = 0.25;  // [m], ball-hand separation that triggers the throw reward
};

struct RewardBreakdown {
  double throwing = 0.0;  // [0, 1], unscaled
  double roll = 0.0;      // per-step, >= -1
  int stability = 0;      // {0, 1}
  double total = 0.0;     // lambda-weighted sum actually emitted
};

/// End-of-episode facts the stability gate is judged on.
struct EpisodeSummary {
  bool released = false;
  double detach_time = 0.0;       // [s], valid when released
  double error = 0.0;             // [m], valid when released
  double accuracy = 0.0;          // throwing reward actually emitted, 0 if unreleased
  double landing_distance = 0.0;  // [m], horizontal landing range, valid when released
  double target_r = 0.0;          // commanded target, for binning
  double target_theta_tilde = 0.0;
  double target_phi = 0.0;
  double min_base_height = 0.0;   // [m], over every physics step
  double max_base_height = 0.0;
  double max_tilt = 0.0;          // [rad], max |tilt| over the episode
  bool fell = false;              // tilt exceeded the fall bound
  bool faulted = false;           // non-finite state or NaN action
  int stability = 0;
  double episode_reward = 0.0;    // lambda-weighted sum over the episode
  double episode_length = 0.0;    // [s]
};

struct StabilityLimits {
  double height_lo = 0.0;  // [m]
  double height_hi = 1e9;  // [m]
};

inline Vec3 to_cartesian(const TargetCommand& cmd) {
  if (cmd.theta_tilde < 0.0 || cmd.theta_tilde > 1.0)
    throw std::invalid_argument("to_cartesian: theta_tilde must be in [0, 1]");
  if (cmd.phi < 0.0 || cmd.phi >= 2.0 * M_PI)
    throw std::invalid_argument("to_cartesian: phi must be in [0, 2*pi)");
  if (!(cmd.r > 0.0)) throw std::invalid_argument("to_cartesian: r must be > 0");
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cmd.theta_tilde * cmd.theta_tilde));
  return Vec3(cmd.r * sin_theta * std::cos(cmd.phi),
              cmd.r * sin_theta * std::sin(cmd.phi),
              cmd.r * cmd.theta_tilde);
}

inline TargetCommand sample_target(const TaskMode& mode, Rng& rng) {
  if (mode.range_lo > mode.range_hi)
    throw std::invalid_argument("sample_target: range_lo > range_hi");
  TargetCommand cmd;
  if (mode.kind == TaskKind::kGeneral) {
    cmd.theta_tilde = uniform(rng, 0.0, 1.0);
    cmd.phi = uniform(rng, 0.0, 2.0 * M_PI);
  }
  cmd.r = mode.range_lo == mode.range_hi
              ? mode.range_lo
              : uniform(rng, mode.range_lo, mode.range_hi);
  return cmd;
}

/// Linear accuracy reward: 1 - min(E / r, 1).
inline double throwing_reward(double error, double target_distance) {
  if (!(target_distance > 0.0))
    throw std::invalid_argument("throwing_reward: target distance must be > 0");
  if (error < 0.0) throw std::invalid_argument("throwing_reward: error must be >= 0");
  return 1.0 - std::min(error / target_distance, 1.0);
}

/// Smooth roll band: slightly positive inside |roll| < margin, saturating to
/// -1 well outside it. Zero exactly at |roll| == margin.
inline double roll_penalty(double roll, const RewardConfig& cfg) {
  const double a = std::abs(roll);
  const double numer = std::exp(1.0 - a / cfg.roll_margin) - 1.0;
  const double denom =
      1.0 + std::exp(-cfg.roll_sigmoid_gain * (a - cfg.roll_sigmoid_center));
  return numer / denom;
}

/// Binary stability gate, emitted once at the episode's final step: the plant
/// never fell, base height stayed within limits for the whole episode, and the
/// ball was actually thrown.
inline int stability_reward(const EpisodeSummary& summary,
                            const StabilityLimits& limits) {
  if (summary.faulted || summary.fell || !summary.released) return 0;
  if (summary.min_base_height < limits.height_lo) return 0;
  if (summary.max_base_height > limits.height_hi) return 0;
  return 1;
}

}  // namespace ballista
