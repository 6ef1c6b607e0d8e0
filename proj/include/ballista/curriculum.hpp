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
#include <utility>

#include "ballista/task.hpp"

namespace ballista {

enum class RobotProfile { kHumanoid, kQuadruped };

struct Thresholds {
  double accuracy = 0.51;
  double stability = 0.22;
};

/// Per-iteration aggregates the adaptive schedule is gated on.
struct IterationMetrics {
  double mean_accuracy = 0.0;   // mean throwing reward over finished episodes
  double stability_rate = 0.0;  // fraction of stable finished episodes
};

struct CurriculumState {
  int iteration = 0;
  double level = 0.0;             // [0, 1], non-decreasing
  double body_action_scale = 1.0; // [0, 1], non-decreasing
  double stability_wait = 2.0;    // [s] in [0, 2], non-decreasing
  double max_dist = 5.0;          // [m]
  int final_ramp_iters = 100;
  RobotProfile profile = RobotProfile::kHumanoid;
  TaskKind task = TaskKind::kGeneral;
  Thresholds thresholds;

  bool has_body_ramp() const {
    return profile == RobotProfile::kQuadruped && task == TaskKind::kDistance;
  }

  static CurriculumState make(RobotProfile profile, TaskKind task,
                              double max_dist, Thresholds thresholds = {},
                              double stability_wait_default = 2.0) {
    CurriculumState st;
    st.profile = profile;
    st.task = task;
    st.max_dist = max_dist;
    st.thresholds = thresholds;
    if (st.has_body_ramp()) {
      st.body_action_scale = 0.0;
      st.stability_wait = 0.0;
    } else {
      st.body_action_scale = 1.0;
      st.stability_wait = stability_wait_default;
    }
    return st;
  }
};

/// Adaptive advance: difficulty moves 1% of the range only when both metrics
/// clear their thresholds. The quadruped distance profile also ramps body
/// actions (2% steps) and the post-release wait (0.02 s steps) on the same
/// trigger.
inline CurriculumState update(const CurriculumState& state,
                              const IterationMetrics& metrics) {
  CurriculumState next = state;
  next.iteration = state.iteration + 1;
  const bool advance = metrics.mean_accuracy >= state.thresholds.accuracy &&
                       metrics.stability_rate >= state.thresholds.stability;
  if (advance) {
    next.level = std::min(1.0, state.level + 0.01);
    if (state.has_body_ramp()) {
      next.body_action_scale = std::min(1.0, state.body_action_scale + 0.02);
      next.stability_wait = std::min(2.0, state.stability_wait + 0.02);
    }
  }
  return next;
}

/// Current target-distance range. General widens [1, 3] -> [1, max_dist]; the
/// humanoid distance task is a single target moving 4 -> max_dist; the
/// quadruped distance task is pinned at max_dist throughout.
inline std::pair<double, double> task_range(const CurriculumState& state) {
  if (state.task == TaskKind::kGeneral)
    return {1.0, 3.0 + state.level * (state.max_dist - 3.0)};
  if (state.profile == RobotProfile::kHumanoid) {
    const double d = 4.0 + state.level * (state.max_dist - 4.0);
    return {d, d};
  }
  return {state.max_dist, state.max_dist};
}

inline TaskMode task_mode(const CurriculumState& state) {
  const auto [lo, hi] = task_range(state);
  return TaskMode{state.task, lo, hi};
}

/// Forces completion over the last `remaining_iters` iterations: the level
/// advances by the constant step that reaches 1 exactly at the end.
inline CurriculumState final_distance_ramp(const CurriculumState& state,
                                           int remaining_iters) {
  CurriculumState next = state;
  if (remaining_iters <= 0 || state.level >= 1.0) return next;
  next.level = std::min(1.0, state.level + (1.0 - state.level) / remaining_iters);
  return next;
}

}  // namespace ballista
