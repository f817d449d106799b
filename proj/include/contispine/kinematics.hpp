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

// Serial disc-chain kinematics: joint transforms, end pose, range-of-motion
// design, and the single-cable length <-> bend mapping.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "contispine/errors.hpp"
#include "contispine/units.hpp"

namespace contispine::kinematics {

using Pose = Eigen::Isometry3d;

/// Geometry of one disc/joint pair, shared by all n discs of the chain.
///
/// Lengths in metres. `rho` is the radial offset of the cable hole in the
/// sagittal plane; `e` is the offset from the distal disc frame to the
/// shoulder-brace connection. `psi_limit` is the per-joint axial limit, which
/// defaults to 90 deg / n when unset.
struct DiscGeometry {
  double r = 0.07;
  double d = 0.00216;
  double l = 0.01;
  double rho = 0.03;
  int n = 20;
  Eigen::Vector3d e{0.0, 0.0, 0.02};
  std::optional<double> psi_limit;

  double transverse_limit() const {
    return psi_limit.value_or(deg2rad(90.0) / static_cast<double>(n));
  }

  void validate() const {
    if (!(r > 0.0)) throw DomainError("disc radius r must be > 0");
    if (!(d > 0.0)) throw DomainError("disc gap d must be > 0");
    if (!(l > 0.0)) throw DomainError("joint spacing l must be > 0");
    if (!(rho > 0.0 && rho <= r)) {
      throw DomainError("cable hole offset rho must lie in (0, r]");
    }
    if (n < 1) throw DomainError("disc count n must be >= 1");
    if (!e.allFinite()) throw DomainError("end offset e must be finite");
    if (psi_limit && !(*psi_limit >= 0.0)) {
      throw DomainError("transverse limit must be >= 0");
    }
  }
};

/// Rotation of disc i+1 relative to disc i (radians).
struct JointAngles {
  double sagittal = 0.0;    // about x
  double frontal = 0.0;     // about y
  double transverse = 0.0;  // about z
};

using ChainConfiguration = std::vector<JointAngles>;

/// Rot_x(phi) Rot_y(theta) Rot_z(psi) Tran(0, 0, l).
inline Pose joint_transform(const JointAngles& a, double l) {
  Pose t = Pose::Identity();
  t.rotate(Eigen::AngleAxisd(a.sagittal, Eigen::Vector3d::UnitX()));
  t.rotate(Eigen::AngleAxisd(a.frontal, Eigen::Vector3d::UnitY()));
  t.rotate(Eigen::AngleAxisd(a.transverse, Eigen::Vector3d::UnitZ()));
  t.translate(Eigen::Vector3d(0.0, 0.0, l));
  return t;
}

inline Pose joint_transform(const JointAngles& a, const DiscGeometry& g) {
  return joint_transform(a, g.l);
}

/// Angle between the local z axes of two neighbouring discs.
inline double joint_deviation(const JointAngles& a) {
  const double c = std::clamp(std::cos(a.sagittal) * std::cos(a.frontal), -1.0, 1.0);
  return std::acos(c);
}

/// Maximal inter-disc rotation from disc radius and gap.
inline double beta_from_geometry(double r, double d) {
  if (!(r > 0.0) || !(d >= 0.0)) {
    throw DomainError("beta_from_geometry requires r > 0 and d >= 0");
  }
  const double ratio = r / (r + d / 2.0);
  if (ratio > 1.0) throw DomainError("r/(r+d/2) exceeds 1");
  return kPi - 2.0 * std::asin(ratio);
}

inline double beta_from_geometry(const DiscGeometry& g) {
  return beta_from_geometry(g.r, g.d);
}

/// Closed-form inverse of beta_from_geometry for the gap d.
inline double solve_d_for_beta(double r, double beta_target) {
  if (!(r > 0.0)) throw DomainError("solve_d_for_beta requires r > 0");
  if (!(beta_target > 0.0 && beta_target < kPi)) {
    throw DomainError("beta_target must lie in (0, pi)");
  }
  return 2.0 * r * (1.0 / std::sin((kPi - beta_target) / 2.0) - 1.0);
}

enum class LimitMode { strict, permissive };

/// Throws LimitViolation for the first joint whose combined sagittal/frontal
/// deviation exceeds beta or whose axial rotation exceeds the transverse limit.
inline void check_joint_limits(std::span<const JointAngles> angles, const DiscGeometry& g) {
  const double beta = beta_from_geometry(g);
  const double psi_max = g.transverse_limit();
  constexpr double kSlack = 1e-12;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (joint_deviation(angles[i]) > beta + kSlack) {
      throw LimitViolation(i, "joint " + std::to_string(i + 1) +
                                  " bend exceeds the mechanical limit beta");
    }
    if (std::abs(angles[i].transverse) > psi_max + kSlack) {
      throw LimitViolation(i, "joint " + std::to_string(i + 1) +
                                  " axial rotation exceeds the transverse limit");
    }
  }
}

/// Frames of discs 0..n expressed in the base frame (frame 0 is identity).
inline std::vector<Pose> disc_frames(std::span<const JointAngles> angles, double l) {
  std::vector<Pose> frames;
  frames.reserve(angles.size() + 1);
  frames.push_back(Pose::Identity());
  for (const auto& a : angles) frames.push_back(frames.back() * joint_transform(a, l));
  return frames;
}

inline Pose end_pose(std::span<const JointAngles> angles, const DiscGeometry& g,
                     LimitMode mode = LimitMode::strict) {
  if (angles.size() != static_cast<std::size_t>(g.n)) {
    throw DomainError("end_pose expects one angle triple per joint (" +
                      std::to_string(g.n) + "), got " + std::to_string(angles.size()));
  }
  if (mode == LimitMode::strict) check_joint_limits(angles, g);
  Pose t = Pose::Identity();
  for (const auto& a : angles) t = t * joint_transform(a, g.l);
  t.translate(g.e);
  return t;
}

inline ChainConfiguration uniform_sagittal_bend(int n, double total_bend) {
  return ChainConfiguration(static_cast<std::size_t>(n),
                            JointAngles{total_bend / static_cast<double>(n), 0.0, 0.0});
}

// ---------------------------------------------------------------------------
// Range-of-motion design

struct Interval {
  double lo;
  double hi;
};

struct RomSample {
  double r;
  double d;
  double beta;
};

/// Evaluates beta on an nr x nd grid over the half-open ranges (lo, hi].
/// Rows are ordered r-major.
inline std::vector<RomSample> rom_sweep(Interval r_range, Interval d_range, std::size_t nr,
                                        std::size_t nd) {
  if (nr == 0 || nd == 0) throw DomainError("rom_sweep grid must be non-empty");
  if (!(r_range.lo >= 0.0 && r_range.hi > r_range.lo) ||
      !(d_range.lo >= 0.0 && d_range.hi > d_range.lo)) {
    throw DomainError("rom_sweep ranges must be positive and non-empty");
  }
  std::vector<RomSample> out;
  out.reserve(nr * nd);
  for (std::size_t i = 0; i < nr; ++i) {
    const double r = r_range.lo + (r_range.hi - r_range.lo) * static_cast<double>(i + 1) /
                                      static_cast<double>(nr);
    for (std::size_t j = 0; j < nd; ++j) {
      const double d = d_range.lo + (d_range.hi - d_range.lo) * static_cast<double>(j + 1) /
                                        static_cast<double>(nd);
      out.push_back({r, d, beta_from_geometry(r, d)});
    }
  }
  return out;
}

struct MotionRequirements {
  double sagittal_flexion = deg2rad(70.0);
  double lateral_flexion = deg2rad(20.0);
  double transverse_rotation = deg2rad(90.0);
};

struct RequirementRow {
  std::string name;
  double required;    // rad
  double capability;  // rad
  double margin;      // rad
  bool asserted;      // transverse rotation is reported, not asserted
  bool pass;
};

struct RequirementReport {
  double beta;
  int min_discs;  // smallest n meeting every asserted bending requirement
  std::vector<RequirementRow> rows;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const RequirementRow& r) { return !r.asserted || r.pass; });
  }
};

inline RequirementReport check_requirements(const DiscGeometry& g,
                                            const MotionRequirements& req = {}) {
  RequirementReport rep;
  rep.beta = beta_from_geometry(g);
  const double n = static_cast<double>(g.n);
  const double bend_capability = n * rep.beta;
  const double axial_capability = n * g.transverse_limit();

  auto add = [&](std::string name, double required, double capability, bool asserted) {
    rep.rows.push_back({std::move(name), required, capability, capability - required, asserted,
                        capability >= required});
  };
  add("sagittal_flexion", req.sagittal_flexion, bend_capability, true);
  add("lateral_flexion", req.lateral_flexion, bend_capability, true);
  add("transverse_rotation", req.transverse_rotation, axial_capability, false);

  const double worst = std::max(req.sagittal_flexion, req.lateral_flexion);
  rep.min_discs = static_cast<int>(std::ceil(worst / rep.beta - 1e-12));
  return rep;
}

// ---------------------------------------------------------------------------
// Cable routing: one hole per disc at (0, -rho, 0) in the disc frame, i.e. on
// the inside of a positive sagittal bend, joined by straight segments.

inline double cable_length(std::span<const JointAngles> angles, const DiscGeometry& g) {
  const auto frames = disc_frames(angles, g.l);
  const Eigen::Vector3d hole(0.0, -g.rho, 0.0);
  double length = 0.0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    length += (frames[k] * hole - frames[k - 1] * hole).norm();
  }
  return length;
}

/// Straight length minus bent length for a uniform sagittal bend.
inline double uniform_bend_retraction(double total_bend, const DiscGeometry& g) {
  const auto bent = uniform_sagittal_bend(g.n, total_bend);
  return static_cast<double>(g.n) * g.l - cable_length(bent, g);
}

/// Largest total bend for which retraction is still monotone and every joint
/// stays within beta. Past atan(l/rho) per joint the hole segments start to
/// lengthen again.
inline double max_total_bend(const DiscGeometry& g) {
  const double per_joint = std::min(beta_from_geometry(g), std::atan(g.l / g.rho));
  return static_cast<double>(g.n) * per_joint;
}

inline double max_retraction(const DiscGeometry& g) {
  return uniform_bend_retraction(max_total_bend(g), g);
}

/// Total bend (rad) produced by retracting the cable, under the uniform bend
/// assumption. Bisection on the monotone retraction curve.
inline double bend_from_retraction(double retraction, const DiscGeometry& g,
                                   double tolerance = 1e-6, int max_iterations = 200) {
  const double hi_bend = max_total_bend(g);
  const double hi_retraction = uniform_bend_retraction(hi_bend, g);
  constexpr double kRoundOff = 1e-12;  // a straight chain can sum to -1e-17
  if (!(retraction >= -kRoundOff) || retraction > hi_retraction + kRoundOff) {
    throw DomainError("retraction outside the achievable range [0, " +
                      std::to_string(hi_retraction) + "] m");
  }
  double lo = 0.0;
  double hi = hi_bend;
  for (int it = 0; it < max_iterations && hi - lo > tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (uniform_bend_retraction(mid, g) < retraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct CalibrationPair {
  double retraction;  // m
  double bend;        // rad, total
};

/// Least-squares fit of the hole offset rho in (0, r] to measured
/// (retraction, bend) pairs. Coarse scan then golden-section refinement.
inline double calibrate_hole_radius(std::span<const CalibrationPair> pairs, DiscGeometry g) {
  if (pairs.empty()) throw DomainError("calibration needs at least one pair");
  const bool informative = std::any_of(pairs.begin(), pairs.end(),
                                       [](const CalibrationPair& p) { return p.bend > 0.0; });
  if (!informative) throw DomainError("degenerate calibration: every bend is zero");
  for (const auto& p : pairs) {
    if (p.bend < 0.0 || p.retraction < 0.0) {
      throw DomainError("calibration pairs must be non-negative");
    }
  }

  auto sse = [&](double rho) {
    g.rho = rho;
    double s = 0.0;
    for (const auto& p : pairs) {
      const double e = uniform_bend_retraction(p.bend, g) - p.retraction;
      s += e * e;
    }
    return s;
  };

  constexpr int kScan = 400;
  const double upper = g.r;
  const double step = upper / kScan;
  int best = 1;
  double best_val = sse(step);
  for (int i = 2; i <= kScan; ++i) {
    const double v = sse(step * i);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }

  double a = std::max(step * (best - 1), 1e-12);
  double b = std::min(step * (best + 1), upper);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sse(c);
  double fd = sse(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sse(d);
    }
  }
  return 0.5 * (a + b);
}

/// The single steerability datum: 5.23 cm of retraction gives 100 deg of bend.
inline constexpr CalibrationPair kSteerCalibration{0.0523, deg2rad(100.0)};

/// Hole offset fitted to kSteerCalibration for the default chain. Computed
/// once on first use.
inline double calibrated_hole_radius() {
  static const double rho = [] {
    const CalibrationPair pair = kSteerCalibration;
    return calibrate_hole_radius(std::span(&pair, 1), DiscGeometry{});
  }();
  return rho;
}

inline DiscGeometry default_geometry() {
  DiscGeometry g;
  g.rho = calibrated_hole_radius();
  return g;
}

}  // namespace contispine::kinematics
