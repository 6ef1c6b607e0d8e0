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

#include "ballista/ballistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace ballista {
namespace {

TEST(PredictTrajectory, VacuumClosedFormLanding) {
  // Flat throw from 1 m: t_land = sqrt(2 z0 / g), x = v t_land.
  const ReleaseState release{Vec3(0, 0, 1), Vec3(3, 0, 0)};
  const Trajectory traj =
      predict_trajectory(release, BallisticModel::vacuum(), 1e-4, 10.0);
  const auto [t_land, p_land] = landing_state(release, BallisticModel::vacuum(), traj);
  const double t_expected = std::sqrt(2.0 / 9.81);
  EXPECT_NEAR(t_land, t_expected, 1e-6);
  EXPECT_NEAR(t_land, 0.4515, 1e-4);
  EXPECT_NEAR(p_land.x(), 3.0 * t_expected, 1e-6);
  EXPECT_NEAR(p_land.x(), 1.3545, 1e-3);
  EXPECT_FALSE(traj.truncated);
}

TEST(PredictTrajectory, StraightDrop) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(0, 0, 0)};
  const Trajectory traj =
      predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 10.0);
  const auto [t_land, p_land] = landing_state(release, BallisticModel::vacuum(), traj);
  EXPECT_NEAR(p_land.x(), 0.0, 1e-12);
  EXPECT_NEAR(p_land.y(), 0.0, 1e-12);
  EXPECT_NEAR(p_land.z(), 0.0, 1e-6);
  // Samples descend monotonically: all but the last stay above ground.
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) EXPECT_GT(traj.positions[k].z(), 0.0);
  EXPECT_LE(traj.positions.back().z(), 0.0);
}

TEST(PredictTrajectory, ZeroDragMatchesVacuum) {
  const ReleaseState release{Vec3(0.2, -0.1, 1.5), Vec3(4, 1, 5)};
  const Trajectory vac = predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 10.0);
  const Trajectory cd0 =
      predict_trajectory(release, BallisticModel::newtonian_drag(0.0), 1e-3, 10.0);
  ASSERT_EQ(vac.size(), cd0.size());
  for (std::size_t k = 0; k < vac.size(); ++k)
    EXPECT_LT((vac.positions[k] - cd0.positions[k]).norm(), 1e-9);
}

TEST(PredictTrajectory, InvalidDtThrows) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(1, 0, 0)};
  EXPECT_THROW(predict_trajectory(release, BallisticModel::vacuum(), 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(predict_trajectory(release, BallisticModel::vacuum(), -1e-3, 1.0),
               std::invalid_argument);
}

TEST(PredictTrajectory, TruncatedFlag) {
  // Strongly upward throw with a small horizon never descends.
  const ReleaseState release{Vec3(0, 0, 1), Vec3(0, 0, 20)};
  const Trajectory traj =
      predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 0.5);
  EXPECT_TRUE(traj.truncated);
  EXPECT_GT(traj.positions.back().z(), 0.0);
}

TEST(DisplacementError, OnTrajectoryTargetIsZero) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(3, 0, 3)};
  const BallisticModel model = BallisticModel::vacuum();
  const double t = 0.37;
  const Vec3 target = detail::vacuum_position(release, model.gravity, t);
  ASSERT_GT(target.z(), 0.0);
  EXPECT_LE(displacement_error(release, target, model), 1e-6);
}

TEST(DisplacementError, MatchesBruteForceOnSpecCase) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(3, 0, 3)};
  const Vec3 target(2, 0, 1);
  const BallisticModel model = BallisticModel::vacuum();
  const double refined = displacement_error(release, target, model);
  const double brute = min_distance_bruteforce(release, target, model, 1e-5);
  EXPECT_NEAR(refined, brute, 1e-4);
}

TEST(DisplacementError, FarTargetMatchesBruteForce) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(3, 0, 3)};
  const Vec3 target(100, 0, 0);
  const BallisticModel model = BallisticModel::vacuum();
  const double refined = displacement_error(release, target, model);
  const double brute = min_distance_bruteforce(release, target, model, 1e-5);
  EXPECT_NEAR(refined, brute, 1e-4);
  // The minimum sits at the trajectory end, roughly the landing-to-target gap.
  const Trajectory traj = predict_trajectory(release, model, 1e-3, 10.0);
  const auto [t_land, p_land] = landing_state(release, model, traj);
  EXPECT_NEAR(refined, (p_land - target).norm(), 1e-3);
}

TEST(DisplacementError, DegenerateGroundRelease) {
  const ReleaseState release{Vec3(1, 2, 0), Vec3(0, 0, -1)};
  const Vec3 target(4, 6, 0);
  EXPECT_DOUBLE_EQ(displacement_error(release, target, BallisticModel::vacuum()), 5.0);
}

TEST(DisplacementError, NegativeTargetZThrows) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(1, 0, 0)};
  EXPECT_THROW(displacement_error(release, Vec3(1, 0, -0.5), BallisticModel::vacuum()),
               std::invalid_argument);
}

TEST(BruteForce, DropThroughTarget) {
  // The oracle's own resolution is |v| * dt / 2 near an exact pass-through.
  const ReleaseState release{Vec3(0, 0, 1), Vec3(0, 0, 0)};
  EXPECT_NEAR(min_distance_bruteforce(release, Vec3(0, 0, 0.5),
                                      BallisticModel::vacuum(), 1e-5),
              0.0, 1e-4);
  EXPECT_NEAR(min_distance_bruteforce(release, Vec3(1, 0, 0.5),
                                      BallisticModel::vacuum(), 1e-5),
              1.0, 1e-7);
}

TEST(BruteForce, RejectsCoarseDt) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(1, 0, 0)};
  EXPECT_THROW(
      min_distance_bruteforce(release, Vec3(1, 0, 0), BallisticModel::vacuum(), 1e-3),
      std::invalid_argument);
}

TEST(DisplacementError, RandomCasesAgreeWithBruteForce) {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    ReleaseState release;
    release.position = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.2, 2));
    release.velocity =
        Vec3(uniform(rng, -10, 10), uniform(rng, -10, 10), uniform(rng, -4, 12));
    const BallisticModel model =
        (i % 2 == 0) ? BallisticModel::vacuum()
                     : BallisticModel::newtonian_drag(uniform(rng, 0.005, 0.1));
    const Vec3 target(uniform(rng, -8, 8), uniform(rng, -8, 8), uniform(rng, 0, 4));
    const double refined = displacement_error(release, target, model);
    const double brute = min_distance_bruteforce(release, target, model, 2e-5);
    ASSERT_NEAR(refined, brute, 1e-4)
        << "case " << i << " release v " << release.velocity.transpose();
  }
}

TEST(Ballistics, FortyFiveDegreeRangeLaw) {
  // Level-ground launch at 45 degrees lands at v^2 / g.
  for (int i = 1; i <= 10; ++i) {
    const double v = 1.0 + 1.5 * i;
    const double c = v / std::sqrt(2.0);
    const ReleaseState release{Vec3(0, 0, 0), Vec3(c, 0, c)};
    const Trajectory traj =
        predict_trajectory(release, BallisticModel::vacuum(), 1e-5, 20.0);
    const auto [t_land, p_land] = landing_state(release, BallisticModel::vacuum(), traj);
    const double expected = v * v / 9.81;
    EXPECT_NEAR(p_land.x() / expected, 1.0, 1e-6) << "speed " << v;
  }
}

TEST(Ballistics, DragShortensRange) {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    ReleaseState release;
    release.position = Vec3(0, 0, uniform(rng, 0.5, 1.5));
    release.velocity = Vec3(uniform(rng, 2, 10), 0, uniform(rng, 1, 8));
    const Trajectory vac =
        predict_trajectory(release, BallisticModel::vacuum(), 1e-3, 20.0);
    const Trajectory drag = predict_trajectory(
        release, BallisticModel::newtonian_drag(uniform(rng, 0.01, 0.1)), 1e-3, 20.0);
    const double x_vac =
        landing_state(release, BallisticModel::vacuum(), vac).second.x();
    const double x_drag =
        landing_state(release, BallisticModel::newtonian_drag(0.05), drag).second.x();
    EXPECT_LT(x_drag, x_vac);
  }
}

TEST(DisplacementError, RotationInvariantAboutZ) {
  Rng rng(3);
  const auto rot_z = [](double a, const Vec3& v) {
    return Vec3(std::cos(a) * v.x() - std::sin(a) * v.y(),
                std::sin(a) * v.x() + std::cos(a) * v.y(), v.z());
  };
  for (int i = 0; i < 25; ++i) {
    ReleaseState release;
    release.position = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.3, 2));
    release.velocity = Vec3(uniform(rng, -8, 8), uniform(rng, -8, 8), uniform(rng, 0, 8));
    const Vec3 target(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, 0, 3));
    const double angle = uniform(rng, 0, 2 * M_PI);
    const ReleaseState rotated{rot_z(angle, release.position),
                               rot_z(angle, release.velocity)};
    const double e0 = displacement_error(release, target, BallisticModel::vacuum());
    const double e1 =
        displacement_error(rotated, rot_z(angle, target), BallisticModel::vacuum());
    EXPECT_NEAR(e0, e1, 1e-9);
  }
}

TEST(Ballistics, CsvDump) {
  const ReleaseState release{Vec3(0, 0, 1), Vec3(2, 0, 2)};
  const Trajectory traj =
      predict_trajectory(release, BallisticModel::vacuum(), 1e-2, 10.0);
  std::ostringstream os;
  trajectory_to_csv(traj, os);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind("t,x,y,z\n", 0), 0u);
  EXPECT_GT(std::count(out.begin(), out.end(), '\n'), 10);
}

}  // namespace
}  // namespace ballista
