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

// Planar tendon statics of the disc chain. One cable pulls the distal disc;
// each disc is held by three concurrent forces (cable or neighbour reaction
// from above, backbone reaction, neighbour reaction from below). Friction and
// disc weight are neglected.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "contispine/errors.hpp"
#include "contispine/kinematics.hpp"

namespace contispine::statics {

struct TendonLoad {
  double cable_force;  // F_c, N
  double r1;           // arm of the cable force about the joint centre, m
  double r2;           // arm of the backbone force about the joint centre, m

  void validate() const {
    if (!(cable_force >= 0.0)) throw DomainError("cable force must be >= 0");
    if (!(r1 > 0.0)) throw DomainError("moment arm r1 must be > 0");
    if (!(r2 > 0.0)) throw DomainError("moment arm r2 must be > 0");
  }
};

enum class Parity { odd, even };

struct DistalBalance {
  double alpha;
  double backbone_force;  // F_an
  double reaction_force;  // F_rn
};

struct TendonSolution {
  double alpha = 0.0;
  double distal_backbone_force = 0.0;        // F_an
  double intermediate_backbone_force = 0.0;  // F_a1 .. F_a(n-1)
  double reaction_force = 0.0;               // F_r1 .. F_rn
  double base_backbone_force = 0.0;          // F_a0
  std::optional<double> base_moment;         // M, even n only
  Parity parity = Parity::odd;
};

inline DistalBalance distal_disc_balance(const TendonLoad& load) {
  if (load.r2 == 0.0) throw DomainError("moment arm r2 must be non-zero");
  const double alpha = std::atan(load.r1 / load.r2);
  return {alpha, load.cable_force * std::tan(alpha), load.cable_force / std::cos(alpha)};
}

struct BaseReaction {
  double backbone_force;
  std::optional<double> moment;
};

/// Odd n: backbone force only. Even n: the base also needs a moment 2 F_a0 r2.
inline BaseReaction base_reaction(const TendonSolution& /*sol*/, const TendonLoad& load, int n) {
  const double f_a0 = load.cable_force * std::hypot(load.r1, load.r2) / load.r2;
  BaseReaction out{f_a0, std::nullopt};
  if (n % 2 == 0) out.moment = 2.0 * f_a0 * load.r2;
  return out;
}

inline TendonSolution propagate_chain(const TendonLoad& load, int n) {
  load.validate();
  if (n < 2) throw DomainError("propagate_chain needs n >= 2 discs");
  const auto distal = distal_disc_balance(load);
  TendonSolution sol;
  sol.alpha = distal.alpha;
  sol.distal_backbone_force = load.cable_force * load.r1 / load.r2;
  sol.intermediate_backbone_force = 2.0 * sol.distal_backbone_force;
  sol.reaction_force = load.cable_force * std::hypot(load.r1, load.r2) / load.r2;
  sol.parity = (n % 2 == 0) ? Parity::even : Parity::odd;
  const auto base = base_reaction(sol, load, n);
  sol.base_backbone_force = base.backbone_force;
  sol.base_moment = base.moment;
  return sol;
}

/// Arms from the disc geometry under the symmetric-contact construction:
/// r1 from the hole offset, r2 from half the joint spacing, both shortened by
/// cos(bend/2). A modelling extension; direct arms are canonical.
inline TendonLoad moment_arms_from_geometry(const kinematics::DiscGeometry& g,
                                            double bend_per_joint, double cable_force = 0.0) {
  if (std::abs(bend_per_joint) > kinematics::beta_from_geometry(g) + 1e-12) {
    throw DomainError("joint bend exceeds beta");
  }
  const double c = std::cos(bend_per_joint / 2.0);
  return {cable_force, g.rho * c, 0.5 * g.l * c};
}

// ---------------------------------------------------------------------------
// Free-body oracle.
//
// Each disc i (1..n) is drawn in its own sagittal plane with local axes
// u (along the chain) and v (disc y axis). Its lower joint sits at u = 0, its
// centre at u = r2 and its upper joint at u = 2 r2. Force directions come only
// from geometry: the load from above (cable at the hole, or the upper
// neighbour's reaction through the upper joint) meets the backbone line u = r2
// at the concurrency point P_i; the lower reaction then runs from the lower
// joint through P_i; the backbone pushes normal to the chain, away from P_i.
// Magnitudes are taken from the solution under test, the free body is placed
// at the disc's pose from forward kinematics, and the force and moment sums
// are reported. The base only checks force balance against F_a0.

namespace detail {

struct PlanarForce {
  Eigen::Vector2d point;      // (u, v) application point
  Eigen::Vector2d direction;  // unit
  double magnitude;
};

inline Eigen::Vector2d unit(const Eigen::Vector2d& v) { return v / v.norm(); }

// Intersection of the line through p along dir with the line u = u0.
inline Eigen::Vector2d meet_u(const Eigen::Vector2d& p, const Eigen::Vector2d& dir, double u0) {
  const double t = (u0 - p.x()) / dir.x();
  return p + t * dir;
}

}  // namespace detail

struct DiscResidual {
  double force;   // N
  double moment;  // N m
};

/// Per-disc residuals, index 0 is the base, index i is disc i.
inline std::vector<DiscResidual> free_body_residuals_per_disc(
    const TendonSolution& sol, const TendonLoad& load, int n,
    std::span<const kinematics::JointAngles> angles) {
  using detail::PlanarForce;
  load.validate();
  if (n < 2) throw DomainError("free-body oracle needs n >= 2");
  if (angles.size() != static_cast<std::size_t>(n)) {
    throw DomainError("free-body oracle expects one angle triple per joint");
  }
  for (const auto& a : angles) {
    if (a.frontal != 0.0 || a.transverse != 0.0) {
      throw DomainError("free-body oracle covers planar sagittal configurations only");
    }
  }
  const double r1 = load.r1;
  const double r2 = load.r2;
  const auto frames = kinematics::disc_frames(angles, 2.0 * r2);

  // Sums forces and moments of one local free body after mapping it into the
  // base frame through the disc pose.
  auto residual = [&](const kinematics::Pose& pose, std::span<const PlanarForce> forces) {
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (const auto& pf : forces) {
      const Eigen::Vector3d p = pose * Eigen::Vector3d(0.0, pf.point.y(), pf.point.x());
      const Eigen::Vector3d fv =
          pose.linear() * Eigen::Vector3d(0.0, pf.direction.y(), pf.direction.x()) * pf.magnitude;
      f += fv;
      m += p.cross(fv);
    }
    return DiscResidual{f.norm(), m.norm()};
  };

  std::vector<DiscResidual> out(static_cast<std::size_t>(n) + 1);
  const Eigen::Vector2d lower_joint(0.0, 0.0);
  const Eigen::Vector2d upper_joint(2.0 * r2, 0.0);

  // Upper load on disc i, expressed in disc i's frame. Starts as the cable.
  PlanarForce from_above{Eigen::Vector2d(r2, -r1), Eigen::Vector2d(-1.0, 0.0), load.cable_force};
  for (int i = n; i >= 1; --i) {
    const double backbone_mag =
        (i == n) ? sol.distal_backbone_force : sol.intermediate_backbone_force;
    const Eigen::Vector2d p = detail::meet_u(from_above.point, from_above.direction, r2);
    const PlanarForce below{lower_joint, detail::unit(p - lower_joint), sol.reaction_force};
    const double side = (p.y() >= 0.0) ? -1.0 : 1.0;
    const PlanarForce backbone{Eigen::Vector2d(r2, 0.0), Eigen::Vector2d(0.0, side),
                               backbone_mag};
    const PlanarForce body[] = {from_above, backbone, below};
    // disc i sits on joint frame i-1 (its lower joint) in the kinematic chain
    out[static_cast<std::size_t>(i)] = residual(frames[static_cast<std::size_t>(i - 1)], body);
    // Newton's third law: the disc below feels the opposite of `below`.
    from_above = PlanarForce{upper_joint, -below.direction, below.magnitude};
  }

  // Base: the reaction from disc 1 against the backbone force F_a0.
  const Eigen::Vector3d dir(0.0, from_above.direction.y(), from_above.direction.x());
  const Eigen::Vector3d f_in = dir * from_above.magnitude;
  const Eigen::Vector3d f_backbone = -dir * sol.base_backbone_force;
  out[0] = DiscResidual{(f_in + f_backbone).norm(), 0.0};
  return out;
}

/// Largest absolute force or moment residual over the whole chain.
inline double free_body_residuals(const TendonSolution& sol, const TendonLoad& load, int n,
                                  std::span<const kinematics::JointAngles> angles) {
  double worst = 0.0;
  for (const auto& r : free_body_residuals_per_disc(sol, load, n, angles)) {
    worst = std::max({worst, r.force, r.moment});
  }
  return worst;
}

}  // namespace contispine::statics
