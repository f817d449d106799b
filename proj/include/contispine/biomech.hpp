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

// Static lumbar model at L5/S1 during stoop lifting. The exoskeleton force acts
// perpendicular to the trunk, so it enters the moment balance and the shear
// balance but not the compression balance.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "contispine/errors.hpp"
#include "contispine/units.hpp"

namespace contispine::biomech {

struct Anthropometrics {
  double m_body = 41.0;  // upper-body mass, kg
  double m_load = 15.0;  // lifted mass, kg
  double L_trunk = 0.50;
  double g = kGravity;

  void validate() const {
    if (!(m_body >= 0.0) || !(m_load >= 0.0)) throw DomainError("masses must be >= 0");
    if (!(L_trunk > 0.0)) throw DomainError("trunk length must be > 0");
    if (!(g > 0.0)) throw DomainError("gravity must be > 0");
  }
};

/// Moment arms about L5/S1. The load and body arms grow with trunk flexion:
///   D_load(theta) = L_trunk sin(theta) + load_offset
///   D_body(theta) = body_fraction L_trunk sin(theta)
/// These defaults are demonstration values, not measured anthropometry.
struct MomentArms {
  double D_e = 0.05;
  double D_exo = 0.30;
  double load_offset = 0.25;
  double body_fraction = 0.5;
  double r_l = 0.30;  // trunk lever turning assist torque into cable force

  double D_load(double theta, const Anthropometrics& a) const {
    return a.L_trunk * std::sin(theta) + load_offset;
  }
  double D_body(double theta, const Anthropometrics& a) const {
    return body_fraction * a.L_trunk * std::sin(theta);
  }

  void validate() const {
    if (!(D_e > 0.0)) throw DomainError("erector arm D_e must be > 0");
    if (!(D_exo > 0.0)) throw DomainError("exoskeleton arm D_exo must be > 0");
    if (!(load_offset >= 0.0) || !(body_fraction >= 0.0)) {
      throw DomainError("arm model coefficients must be >= 0");
    }
    if (!(r_l > 0.0)) throw DomainError("trunk lever r_l must be > 0");
  }
};

struct SpineForces {
  double F_e;    // erector spinae
  double F_p;    // disc compression
  double F_s;    // disc shear
  double F_exo;
  double theta;

  // Negative muscle or shear force means the assist would have to push.
  bool feasible() const { return F_e >= 0.0 && F_s >= 0.0; }
};

inline SpineForces lumbar_forces(const Anthropometrics& a, const MomentArms& arms, double theta,
                                 double F_exo) {
  if (!(theta >= 0.0 && theta <= kPi / 2.0 + 1e-12)) {
    throw DomainError("trunk angle must lie in [0, 90] deg");
  }
  if (!(F_exo >= 0.0)) throw DomainError("exoskeleton force must be >= 0");
  if (arms.D_e == 0.0) throw DomainError("erector arm D_e must be non-zero");
  const double w_load = a.m_load * a.g;
  const double w_body = a.m_body * a.g;
  const double F_e = (-F_exo * arms.D_exo + w_load * arms.D_load(theta, a) +
                      w_body * arms.D_body(theta, a)) /
                     arms.D_e;
  const double F_p = F_e + (w_body + w_load) * std::cos(theta);
  const double F_s = -F_exo + (w_body + w_load) * std::sin(theta);
  return {F_e, F_p, F_s, F_exo, theta};
}

struct TrunkState {
  double theta;
  double theta_dot;
  double theta_ddot;
};

/// Stoop cycle: flex from upright to theta_max over the first half of the
/// cycle, extend back over the second half, cosine-shaped. Periodic in t.
inline TrunkState stoop_trajectory(double t, double cycle = 8.0,
                                   double theta_max = deg2rad(70.0)) {
  if (!(t >= 0.0)) throw DomainError("time must be >= 0");
  if (!(cycle > 0.0)) throw DomainError("cycle must be > 0");
  const double w = 2.0 * kPi / cycle;
  const double phase = std::fmod(t, cycle);
  const double amp = 0.5 * theta_max;
  return {amp * (1.0 - std::cos(w * phase)), amp * w * std::sin(w * phase),
          amp * w * w * std::cos(w * phase)};
}

/// Assist force decaying from F_max at t = 0 to zero at t = window along a
/// half cosine. Zero outside [0, window].
inline double assist_profile(double t, double F_max = 250.0, double window = 4.0) {
  if (t < 0.0 || t > window) return 0.0;
  return 0.5 * F_max * (1.0 + std::cos(kPi * t / window));
}

struct LiftPhase {
  double cycle = 8.0;
  double theta_max = deg2rad(70.0);
  double F_max = 250.0;
  double dt = 1e-3;
};

struct LiftSample {
  double t;
  double theta;
  SpineForces without;
  SpineForces with;
};

struct ForceReduction {
  double peak_without;
  double peak_with;
  double absolute() const { return peak_without - peak_with; }
  double percent() const { return peak_without > 0.0 ? 100.0 * absolute() / peak_without : 0.0; }
};

struct ReductionReport {
  std::vector<LiftSample> series;
  ForceReduction compression;
  ForceReduction shear;
  ForceReduction muscle;
  bool feasible = true;
};

/// Lift from full flexion back to upright (second half of the stoop cycle)
/// with the assist profile aligned to the start of the lift. Compares peaks
/// with and without assistance.
inline ReductionReport reduction_report(const Anthropometrics& a, const MomentArms& arms,
                                        const LiftPhase& lift = {}) {
  a.validate();
  arms.validate();
  if (!(lift.dt > 0.0)) throw DomainError("sampling step must be > 0");
  const double window = 0.5 * lift.cycle;
  const auto steps = static_cast<std::size_t>(std::llround(window / lift.dt));

  ReductionReport rep;
  rep.series.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * lift.dt;
    const double theta =
        std::clamp(stoop_trajectory(t + window, lift.cycle, lift.theta_max).theta, 0.0, kPi / 2);
    const double f = assist_profile(t, lift.F_max, window);
    rep.series.push_back({t, theta, lumbar_forces(a, arms, theta, 0.0),
                          lumbar_forces(a, arms, theta, f)});
  }

  auto peak = [&](auto member) {
    ForceReduction r{rep.series.front().without.*member, rep.series.front().with.*member};
    for (const auto& s : rep.series) {
      r.peak_without = std::max(r.peak_without, s.without.*member);
      r.peak_with = std::max(r.peak_with, s.with.*member);
    }
    return r;
  };
  rep.compression = peak(&SpineForces::F_p);
  rep.shear = peak(&SpineForces::F_s);
  rep.muscle = peak(&SpineForces::F_e);
  rep.feasible = std::all_of(rep.series.begin(), rep.series.end(),
                             [](const LiftSample& s) { return s.with.feasible(); });
  return rep;
}

}  // namespace contispine::biomech
