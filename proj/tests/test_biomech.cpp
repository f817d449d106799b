// Copyright 2026 The contispine Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "contispine/biomech.hpp"

namespace {

using namespace contispine;
using namespace contispine::biomech;

const Anthropometrics kBody{};
const MomentArms kArms{};

TEST(Lumbar, Unloaded) {
  const Anthropometrics a{0.0, 0.0, 0.5, 9.81};
  const auto f = lumbar_forces(a, kArms, deg2rad(40.0), 0.0);
  EXPECT_EQ(f.F_e, 0.0);
  EXPECT_EQ(f.F_p, 0.0);
  EXPECT_EQ(f.F_s, 0.0);
}

TEST(Lumbar, FiniteDifferenceSensitivities) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(0.0, kPi / 2), fx(0.0, 400.0);
  const double h = 1.0;  // exact for a linear map; only rounding remains
  const double expected = -kArms.D_exo / kArms.D_e;
  for (int i = 0; i < 200; ++i) {
    const double theta = th(rng), f0 = fx(rng);
    const auto lo = lumbar_forces(kBody, kArms, theta, f0);
    const auto hi = lumbar_forces(kBody, kArms, theta, f0 + h);
    EXPECT_NEAR((hi.F_s - lo.F_s) / h, -1.0, 1e-9);
    EXPECT_NEAR((hi.F_e - lo.F_e) / h / expected, 1.0, 1e-9);
    EXPECT_NEAR((hi.F_p - lo.F_p) / h / expected, 1.0, 1e-9);
  }
}

TEST(Lumbar, MomentBalanceReconstruction) {
  for (double deg = 0.0; deg <= 90.0; deg += 5.0) {
    const double theta = deg2rad(deg);
    const double fx = 3.0 * deg;
    const auto f = lumbar_forces(kBody, kArms, theta, fx);
    const double residual = f.F_e * kArms.D_e + fx * kArms.D_exo -
                            kBody.m_load * kBody.g * kArms.D_load(theta, kBody) -
                            kBody.m_body * kBody.g * kArms.D_body(theta, kBody);
    EXPECT_NEAR(residual, 0.0, 1e-9);
  }
}

TEST(Lumbar, AssistAtSeventyDegrees) {
  const double theta = deg2rad(70.0);
  const auto without = lumbar_forces(kBody, kArms, theta, 0.0);
  const auto with = lumbar_forces(kBody, kArms, theta, 250.0);
  EXPECT_LT(with.F_p, without.F_p);
  EXPECT_LT(with.F_s, without.F_s);
  EXPECT_LT(with.F_e, without.F_e);
  EXPECT_NEAR(without.F_s - with.F_s, 250.0, 1e-9);
}

TEST(Lumbar, MoreAssistNeverIncreasesLoads) {
  for (double deg = 0.0; deg <= 90.0; deg += 10.0) {
    auto prev = lumbar_forces(kBody, kArms, deg2rad(deg), 0.0);
    for (double fx = 10.0; fx <= 400.0; fx += 10.0) {
      const auto f = lumbar_forces(kBody, kArms, deg2rad(deg), fx);
      EXPECT_LE(f.F_e, prev.F_e);
      EXPECT_LE(f.F_p, prev.F_p);
      EXPECT_LE(f.F_s, prev.F_s);
      prev = f;
    }
  }
}

TEST(Lumbar, Errors) {
  EXPECT_THROW(lumbar_forces(kBody, kArms, -0.1, 0.0), DomainError);
  EXPECT_THROW(lumbar_forces(kBody, kArms, 1.7, 0.0), DomainError);
  EXPECT_THROW(lumbar_forces(kBody, kArms, 0.5, -1.0), DomainError);
  MomentArms bad = kArms;
  bad.D_e = 0.0;
  EXPECT_THROW(lumbar_forces(kBody, bad, 0.5, 0.0), DomainError);
}

TEST(Lumbar, UprightAssistIsInfeasible) {
  const auto f = lumbar_forces(kBody, kArms, 0.0, 50.0);
  EXPECT_LT(f.F_s, 0.0);
  EXPECT_FALSE(f.feasible());
}

TEST(Trajectory, Endpoints) {
  const auto s0 = stoop_trajectory(0.0);
  EXPECT_EQ(s0.theta, 0.0);
  EXPECT_EQ(s0.theta_dot, 0.0);
  const auto s4 = stoop_trajectory(4.0);
  EXPECT_NEAR(rad2deg(s4.theta), 70.0, 1e-12);
  EXPECT_NEAR(s4.theta_dot, 0.0, 1e-12);
  EXPECT_NEAR(stoop_trajectory(8.0).theta, 0.0, 1e-12);
  EXPECT_THROW(stoop_trajectory(-1.0), DomainError);
}

TEST(Trajectory, DerivativesMatchFiniteDifferences) {
  const double h = 1e-4;
  for (double t = 0.1; t < 7.9; t += 0.37) {
    const auto s = stoop_trajectory(t);
    const double dth = (stoop_trajectory(t + h).theta - stoop_trajectory(t - h).theta) / (2 * h);
    const double ddth =
        (stoop_trajectory(t + h).theta_dot - stoop_trajectory(t - h).theta_dot) / (2 * h);
    EXPECT_NEAR(dth, s.theta_dot, 1e-6);
    EXPECT_NEAR(ddth, s.theta_ddot, 1e-6);
  }
}

TEST(Trajectory, SymmetricAndPeriodic) {
  for (double tau = 0.0; tau <= 4.0; tau += 0.25) {
    EXPECT_NEAR(stoop_trajectory(4.0 - tau).theta, stoop_trajectory(4.0 + tau).theta, 1e-12);
    EXPECT_NEAR(stoop_trajectory(tau).theta, stoop_trajectory(tau + 8.0).theta, 1e-12);
  }
}

TEST(Assist, Profile) {
  EXPECT_DOUBLE_EQ(assist_profile(0.0), 250.0);
  EXPECT_NEAR(assist_profile(4.0), 0.0, 1e-12);
  EXPECT_NEAR(assist_profile(2.0), 125.0, 1e-12);
  EXPECT_EQ(assist_profile(-0.1), 0.0);
  EXPECT_EQ(assist_profile(4.1), 0.0);
  double prev = assist_profile(0.0);
  for (double t = 0.01; t <= 4.0; t += 0.01) {
    const double f = assist_profile(t);
    EXPECT_LE(f, prev);
    prev = f;
  }
}

TEST(Reduction, ZeroAssist) {
  LiftPhase lift;
  lift.F_max = 0.0;
  const auto r = reduction_report(kBody, kArms, lift);
  EXPECT_EQ(r.compression.percent(), 0.0);
  EXPECT_EQ(r.shear.percent(), 0.0);
  EXPECT_EQ(r.muscle.percent(), 0.0);
}

TEST(Reduction, ShearDifferenceEqualsAssistRowByRow) {
  const auto r = reduction_report(kBody, kArms);
  for (const auto& s : r.series) {
    EXPECT_NEAR(s.without.F_s - s.with.F_s, assist_profile(s.t, 250.0, 4.0), 1e-9);
    EXPECT_EQ(s.with.F_exo, assist_profile(s.t, 250.0, 4.0));
  }
}

TEST(Reduction, PositiveAndMonotoneInPeakForce) {
  double prev[3] = {0.0, 0.0, 0.0};
  for (double fm : {50.0, 100.0, 150.0, 200.0, 250.0}) {
    LiftPhase lift;
    lift.F_max = fm;
    const auto r = reduction_report(kBody, kArms, lift);
    const double now[3] = {r.compression.percent(), r.shear.percent(), r.muscle.percent()};
    for (int k = 0; k < 3; ++k) {
      EXPECT_GT(now[k], prev[k]) << "F_max " << fm;
      prev[k] = now[k];
    }
  }
}

TEST(Reduction, CoincidentPeaksGiveFullShearReduction) {
  // With a moderate assist the assisted shear still peaks at full flexion,
  // where the assist is largest, so the shear peak drops by exactly F_max.
  LiftPhase lift;
  lift.F_max = 100.0;
  const auto r = reduction_report(kBody, kArms, lift);
  const double peak_shear = (kBody.m_body + kBody.m_load) * kBody.g * std::sin(lift.theta_max);
  EXPECT_NEAR(r.shear.peak_without, peak_shear, 1e-9);
  EXPECT_NEAR(r.shear.absolute(), std::min(100.0, peak_shear), 1e-9);
}

}  // namespace
