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
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ballista/common.hpp"

namespace ballista {

/// Projectile launch conditions in the robot frame.
struct ReleaseState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
};

enum class DragLaw { kVacuum, kNewtonianDrag };

struct BallisticModel {
  DragLaw law = DragLaw::kVacuum;
  double drag_coeff = 0.0;  // [1/m], quadratic drag: dv/dt = -g z - cd |v| v
  double gravity = 9.81;    // [m/s^2]

  static BallisticModel vacuum(double gravity = 9.81) {
    return BallisticModel{DragLaw::kVacuum, 0.0, gravity};
  }
  static BallisticModel newtonian_drag(double drag_coeff, double gravity = 9.81) {
    if (drag_coeff < 0.0) throw std::invalid_argument("drag_coeff must be >= 0");
    return BallisticModel{DragLaw::kNewtonianDrag, drag_coeff, gravity};
  }
};

/// Sampled flight path. Samples are on a uniform grid; the last sample is the
/// first one at or below the ground plane unless `truncated` is set.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  double dt = 0.0;
  bool truncated = false;   // never descended to z <= 0 within t_max
  double ground_time = 0.0; // interpolated z = 0 crossing (last time if truncated)

  std::size_t size() const { return times.size(); }
};

namespace detail {

inline Vec3 vacuum_position(const ReleaseState& r, double g, double t) {
  Vec3 p = r.position + r.velocity * t;
  p.z() -= 0.5 * g * t * t;
  return p;
}

inline Vec3 vacuum_velocity(const ReleaseState& r, double g, double t) {
  Vec3 v = r.velocity;
  v.z() -= g * t;
  return v;
}

inline Vec3 drag_accel(const Vec3& v, double cd, double g) {
  Vec3 a = -cd * v.norm() * v;
  a.z() -= g;
  return a;
}

// Classic RK4 on (p, v).
inline void rk4_step(Vec3& p, Vec3& v, double cd, double g, double h) {
  const Vec3 k1p = v;
  const Vec3 k1v = drag_accel(v, cd, g);
  const Vec3 k2p = v + 0.5 * h * k1v;
  const Vec3 k2v = drag_accel(v + 0.5 * h * k1v, cd, g);
  const Vec3 k3p = v + 0.5 * h * k2v;
  const Vec3 k3v = drag_accel(v + 0.5 * h * k2v, cd, g);
  const Vec3 k4p = v + h * k3v;
  const Vec3 k4v = drag_accel(v + h * k3v, cd, g);
  p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// Minimizes f on [a, b]; returns argmin.
template <typename F>
double golden_section(F&& f, double a, double b, int iters = 80,
                      double tol = 1e-12) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - (b - a) * kInvPhi;
  double d = a + (b - a) * kInvPhi;
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters && (d - c) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * kInvPhi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * kInvPhi;
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Integrates the flight path from `release` until ground contact or t_max.
/// The vacuum variant is evaluated in closed form at each sample time; drag
/// uses fixed-step RK4.
inline Trajectory predict_trajectory(const ReleaseState& release,
                                     const BallisticModel& model, double dt,
                                     double t_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict_trajectory: dt must be > 0");
  if (!release.position.allFinite() || !release.velocity.allFinite())
    throw std::invalid_argument("predict_trajectory: non-finite release state");

  Trajectory traj;
  traj.dt = dt;

  // Degenerate release: already on the ground heading down.
  if (release.position.z() <= 0.0 && release.velocity.z() <= 0.0) {
    traj.times.push_back(0.0);
    traj.positions.push_back(release.position);
    traj.velocities.push_back(release.velocity);
    traj.ground_time = 0.0;
    return traj;
  }

  const double g = model.gravity;
  const double cd = model.law == DragLaw::kNewtonianDrag ? model.drag_coeff : 0.0;
  Vec3 p = release.position;
  Vec3 v = release.velocity;
  const std::size_t max_samples = static_cast<std::size_t>(t_max / dt) + 2;

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (model.law == DragLaw::kVacuum) {
      p = detail::vacuum_position(release, g, t);
      v = detail::vacuum_velocity(release, g, t);
    } else if (k > 0) {
      detail::rk4_step(p, v, cd, g, dt);
    }
    traj.times.push_back(t);
    traj.positions.push_back(p);
    traj.velocities.push_back(v);

    if (k > 0 && p.z() <= 0.0) {
      if (model.law == DragLaw::kVacuum) {
        // Exact root of z0 + vz t - g t^2 / 2.
        const double z0 = release.position.z();
        const double vz = release.velocity.z();
        traj.ground_time = (vz + std::sqrt(std::max(0.0, vz * vz + 2.0 * g * z0))) / g;
      } else {
        // Bisection on the cubic Hermite z between the bracketing samples.
        const double za = traj.positions[k - 1].z();
        const double va = traj.velocities[k - 1].z();
        const double zb = p.z();
        const double vb = v.z();
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double s = 0.5 * (lo + hi);
          const double s2 = s * s, s3 = s2 * s;
          const double z = (2 * s3 - 3 * s2 + 1) * za + (s3 - 2 * s2 + s) * dt * va +
                           (-2 * s3 + 3 * s2) * zb + (s3 - s2) * dt * vb;
          (z > 0.0 ? lo : hi) = s;
        }
        traj.ground_time = traj.times[k - 1] + 0.5 * (lo + hi) * dt;
      }
      return traj;
    }
    if (t >= t_max || k + 1 >= max_samples) {
      traj.truncated = true;
      traj.ground_time = t;
      return traj;
    }
  }
}

/// Continuous-time position lookup. Vacuum uses the closed form; drag uses
/// cubic Hermite interpolation between stored RK4 samples.
inline Vec3 position_at(const ReleaseState& release, const BallisticModel& model,
                        const Trajectory& traj, double t) {
  if (model.law == DragLaw::kVacuum)
    return detail::vacuum_position(release, model.gravity, t);

  if (traj.size() < 2 || t <= traj.times.front()) return traj.positions.front();
  if (t >= traj.times.back()) return traj.positions.back();
  const std::size_t k = std::min(
      static_cast<std::size_t>(t / traj.dt), traj.size() - 2);
  const double h = traj.times[k + 1] - traj.times[k];
  const double s = (t - traj.times[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * traj.positions[k] + h10 * h * traj.velocities[k] +
         h01 * traj.positions[k + 1] + h11 * h * traj.velocities[k + 1];
}

/// Interpolated ground contact (time, position). For a truncated trajectory
/// this is the last sample.
inline std::pair<double, Vec3> landing_state(const ReleaseState& release,
                                             const BallisticModel& model,
                                             const Trajectory& traj) {
  return {traj.ground_time, position_at(release, model, traj, traj.ground_time)};
}

/// Minimum distance between the flight path and `target` over continuous time,
/// computed by coarse sampling plus golden-section refinement of the
/// bracketing interval.
inline double displacement_error(const ReleaseState& release, const Vec3& target,
                                 const BallisticModel& model,
                                 double coarse_dt = 1e-3, double t_max = 10.0) {
  if (target.z() < 0.0)
    throw std::invalid_argument("displacement_error: target.z must be >= 0");

  if (release.position.z() <= 0.0 && release.velocity.z() <= 0.0)
    return (release.position - target).norm();

  const Trajectory traj = predict_trajectory(release, model, coarse_dt, t_max);
  const std::size_t n = traj.size();
  if (n == 1) return (traj.positions[0] - target).norm();

  const auto dist = [&](double t) {
    return (position_at(release, model, traj, t) - target).norm();
  };

  // Candidate grid: the above-ground samples plus the interpolated ground
  // point; the terminal sample sits past the z = 0 crossing and is out of
  // the minimization domain.
  const double t_end = traj.truncated ? traj.times.back() : traj.ground_time;
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t k = 0; k + 1 < n || traj.truncated; ++k) {
    if (k >= n) break;
    if (traj.times[k] >= t_end) break;
    grid.push_back(traj.times[k]);
  }
  grid.push_back(t_end);

  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double d = dist(grid[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  const double lo = best > 0 ? grid[best - 1] : grid.front();
  const double hi = best + 1 < grid.size() ? grid[best + 1] : grid.back();
  const double t_star = detail::golden_section(dist, lo, hi);
  return std::min(best_d, dist(t_star));
}

/// Exhaustive minimum over a densely sampled trajectory. Test oracle; dt_fine
/// must be at most 1e-4 s.
inline double min_distance_bruteforce(const ReleaseState& release,
                                      const Vec3& target,
                                      const BallisticModel& model,
                                      double dt_fine, double t_max = 10.0) {
  if (!(dt_fine > 0.0) || dt_fine > 1e-4)
    throw std::invalid_argument("min_distance_bruteforce: dt_fine must be in (0, 1e-4]");
  if (target.z() < 0.0)
    throw std::invalid_argument("min_distance_bruteforce: target.z must be >= 0");

  if (release.position.z() <= 0.0 && release.velocity.z() <= 0.0)
    return (release.position - target).norm();

  const double g = model.gravity;
  const double cd = model.law == DragLaw::kNewtonianDrag ? model.drag_coeff : 0.0;
  Vec3 p = release.position;
  Vec3 v = release.velocity;
  double best = (p - target).norm();
  Vec3 prev_p = p;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * dt_fine;
    if (model.law == DragLaw::kVacuum) {
      p = detail::vacuum_position(release, g, t);
    } else {
      detail::rk4_step(p, v, cd, g, dt_fine);
    }
    if (k > 0 && p.z() <= 0.0 && prev_p.z() > 0.0) {
      // Include the interpolated ground point, then stop.
      const double frac = prev_p.z() / std::max(prev_p.z() - p.z(), 1e-300);
      const Vec3 ground = prev_p + frac * (p - prev_p);
      best = std::min(best, (ground - target).norm());
      break;
    }
    best = std::min(best, (p - target).norm());
    if (t >= t_max) break;
    prev_p = p;
  }
  return best;
}

inline void trajectory_to_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,x,y,z\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << csv_row({traj.times[k], traj.positions[k].x(), traj.positions[k].y(),
                   traj.positions[k].z()});
  }
}

}  // namespace ballista
