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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and time budgets are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "contispine/contispine.hpp"

namespace {

using namespace contispine;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Pinned tolerances.
constexpr double kBetaTolDeg = 0.05;
constexpr double kGapTol = 1e-5;
constexpr double kFkRelTol = 1e-9;
constexpr double kStaticsRelTol = 1e-9;
constexpr double kSensitivityRelTol = 1e-9;
constexpr double kSteerTolDeg = 1.0;
constexpr double kRoundTripTol = 1e-6;
constexpr double kSpeedRelTol = 0.01;
constexpr double kRmsLimit = 6.63;
constexpr double kLoopReduction = 0.90;
constexpr double kR2Min = 0.99;
constexpr double kSlopeLo = 0.95;
constexpr double kSlopeHi = 1.05;

Outcome geometry_identity() {
  const double beta = rad2deg(kinematics::beta_from_geometry(0.07, 0.00216));
  const double d = kinematics::solve_d_for_beta(0.07, deg2rad(20.0));
  return {std::abs(beta - 20.0) <= kBetaTolDeg && std::abs(d - 0.00216) <= kGapTol,
          fmt("beta=%.5f deg, d=%.7f m", beta, d)};
}

Outcome requirements() {
  kinematics::DiscGeometry g;
  const auto full = kinematics::check_requirements(g);
  g.n = 6;
  const auto six = kinematics::check_requirements(g);
  g.n = 3;
  const auto three = kinematics::check_requirements(g);
  const bool margins = full.rows[0].margin > 0.0 && full.rows[1].margin > 0.0;
  return {full.all_pass() && margins && six.all_pass() && !three.all_pass(),
          fmt("n=20 sagittal margin %.2f deg, n=6 ok, n=3 fails, min n=%.0f",
              rad2deg(full.rows[0].margin), full.min_discs)};
}

Outcome fk_oracle() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> nd(2, 40);
  std::uniform_real_distribution<double> ld(0.002, 0.05), frac(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    kinematics::DiscGeometry g;
    g.n = nd(rng);
    g.l = ld(rng);
    const double phi = frac(rng) * kinematics::beta_from_geometry(g);
    const auto pose = kinematics::end_pose(kinematics::uniform_sagittal_bend(g.n, g.n * phi), g);
    // constant-curvature closed form: joints on a circle, summed analytically
    const int n = g.n;
    const double common = std::abs(phi) < 1e-12 ? 0.0 : std::sin(n * phi / 2) / std::sin(phi / 2);
    const double sy = common * std::sin((n + 1) * phi / 2);
    const double sz = std::abs(phi) < 1e-12 ? n : common * std::cos((n + 1) * phi / 2);
    const double a = n * phi;
    const Eigen::Vector3d p(g.e.x(), -g.l * sy + std::cos(a) * g.e.y() - std::sin(a) * g.e.z(),
                            g.l * sz + std::sin(a) * g.e.y() + std::cos(a) * g.e.z());
    worst = std::max(worst, (pose.translation() - p).norm() / p.norm());
  }
  return {worst <= kFkRelTol, fmt("max relative error %.2e over 1000 draws", worst)};
}

Outcome statics_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> f(1.0, 1000.0), arm(0.001, 0.1), bend(-0.3, 0.3);
  std::uniform_int_distribution<int> nd(2, 41);
  double worst = 0.0;
  int even = 0;
  bool moment_exact = true;
  for (int i = 0; i < 1000; ++i) {
    const statics::TendonLoad load{f(rng), arm(rng), arm(rng)};
    const int n = nd(rng);
    const auto s = statics::propagate_chain(load, n);
    const double r = statics::free_body_residuals(
        s, load, n, kinematics::uniform_sagittal_bend(n, n * bend(rng)));
    worst = std::max(worst, r / load.cable_force);
    if (n % 2 == 0) {
      ++even;
      moment_exact = moment_exact && s.base_moment &&
                     *s.base_moment == 2.0 * s.base_backbone_force * load.r2;
    } else {
      moment_exact = moment_exact && !s.base_moment;
    }
  }
  return {worst <= kStaticsRelTol && moment_exact && even > 0 && even < 1000,
          fmt("max residual/F_c %.2e, %.0f even and %.0f odd chains", worst, even, 1000 - even)};
}

Outcome biomech_sensitivities() {
  const biomech::Anthropometrics a;
  const biomech::MomentArms arms;
  const double coef = -arms.D_exo / arms.D_e;
  double worst = 0.0;
  for (double deg = 0.0; deg <= 90.0; deg += 1.0) {
    const auto lo = biomech::lumbar_forces(a, arms, deg2rad(deg), 100.0);
    const auto hi = biomech::lumbar_forces(a, arms, deg2rad(deg), 101.0);
    worst = std::max({worst, std::abs((hi.F_s - lo.F_s) + 1.0),
                      std::abs((hi.F_e - lo.F_e) / coef - 1.0),
                      std::abs((hi.F_p - lo.F_p) / coef - 1.0)});
  }
  const auto rep = biomech::reduction_report(a, arms);
  double shear_gap = 0.0;
  for (const auto& s : rep.series) {
    shear_gap = std::max(shear_gap, std::abs((s.without.F_s - s.with.F_s) - s.with.F_exo));
  }
  bool monotone = true;
  double prev = 0.0;
  for (double fm : {50.0, 100.0, 150.0, 200.0, 250.0}) {
    biomech::LiftPhase lift;
    lift.F_max = fm;
    const auto r = biomech::reduction_report(a, arms, lift);
    monotone = monotone && r.compression.percent() > prev && r.shear.percent() > 0 &&
               r.muscle.percent() > 0;
    prev = r.compression.percent();
  }
  return {worst <= kSensitivityRelTol && shear_gap <= 1e-9 && monotone,
          fmt("max sensitivity error %.2e, max shear-row gap %.2e N", worst, shear_gap)};
}

Outcome steer_calibration() {
  const kinematics::CalibrationPair pair{0.0523, deg2rad(100.0)};
  kinematics::DiscGeometry g;
  g.rho = kinematics::calibrate_hole_radius(std::span(&pair, 1), g);
  const double at_datum = rad2deg(kinematics::bend_from_retraction(0.0523, g));
  const double at_zero = rad2deg(kinematics::bend_from_retraction(0.0, g));
  double worst = 0.0;
  const double top = kinematics::max_total_bend(g);
  for (int i = 0; i <= 200; ++i) {
    const double b = i == 200 ? top : top * i / 200.0;
    worst = std::max(worst, std::abs(kinematics::bend_from_retraction(
                                         kinematics::uniform_bend_retraction(b, g), g) -
                                     b));
  }
  return {std::abs(at_datum - 100.0) <= kSteerTolDeg && std::abs(at_zero) <= kSteerTolDeg &&
              worst <= kRoundTripTol,
          fmt("5.23 cm -> %.4f deg, 0 cm -> %.1e deg, roundtrip %.1e rad", at_datum, at_zero,
              worst)};
}

Outcome plant_constants() {
  const control::PlantParams p;
  const double stall = p.stall_cable_force();
  const double speed = p.cable_speed_limit();
  return {std::abs(stall - 1440.0) < 1e-9 && stall <= p.force_saturation &&
              std::abs(speed / 0.218 - 1.0) <= kSpeedRelTol,
          fmt("stall %.1f N, no-load cable speed %.4f m/s", stall, speed)};
}

control::SimConfig nominal(int cycles) {
  control::SimConfig c;  // gravity-stiffness reference, mu_theta 0.3, 1 kHz / 10 kHz
  c.cycles = cycles;
  return c;
}

Outcome closed_loop_tracking() {
  const auto m = control::tracking_metrics(control::simulate_stoop(nominal(10)));
  return {m.rms_error <= kRmsLimit,
          fmt("RMS %.3f N (%.2f%% of %.1f N peak)", m.rms_error, m.percent, m.peak_force)};
}

Outcome hysteresis_loop() {
  auto open = nominal(10);
  open.mode = control::ControllerMode::open_loop_current;
  const auto mo = control::tracking_metrics(control::simulate_stoop(open));
  const auto mc = control::tracking_metrics(control::simulate_stoop(nominal(10)));
  const double reduction = 1.0 - mc.loop_area / mo.loop_area;
  return {mo.loop_area > 0.0 && reduction >= kLoopReduction,
          fmt("open-loop area %.1f N^2, closed-loop %.1f N^2, reduction %.2f%%", mo.loop_area,
              mc.loop_area, 100.0 * reduction)};
}

Outcome stiffness_linearity() {
  const auto m = control::tracking_metrics(control::simulate_stoop(nominal(30)));
  const auto& fit = m.stiffness;
  return {fit.r2 >= kR2Min && fit.slope >= kSlopeLo && fit.slope <= kSlopeHi,
          fmt("slope %.4f, R^2 %.5f over 30 cycles", fit.slope, fit.r2)};
}

Outcome determinism() {
  auto doc = config::default_document();
  config::apply_override(doc, "simulation.cycles", "2");
  config::apply_override(doc, "sensors.force_noise_std", "0.5");
  const auto c = config::build(doc);
  int tables = 0;
  bool same = true;
  for (auto cmd : {cli::cmd_design, cli::cmd_statics, cli::cmd_biomech, cli::cmd_simulate,
                   cli::cmd_steer}) {
    const auto a = cmd(c);
    const auto b = cmd(c);
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
      same = same && a.tables[i].table.to_csv() == b.tables[i].table.to_csv();
      ++tables;
    }
  }
  const std::vector<std::string> values{"0.0", "0.3"};
  same = same && cli::cmd_sweep(doc, "plant.mu_theta", values, cli::SweepTarget::simulate)
                         .to_csv() ==
                     cli::cmd_sweep(doc, "plant.mu_theta", values, cli::SweepTarget::simulate)
                         .to_csv();
  return {same, fmt("%.0f tables plus a sweep compared byte for byte", tables)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "geometry identity", 1e-3, geometry_identity},
      {2, "requirements check", 1e-3, requirements},
      {3, "forward kinematics oracle", 1.0, fk_oracle},
      {4, "statics free-body oracle", 1.0, statics_oracle},
      {5, "biomech exact sensitivities", 1.0, biomech_sensitivities},
      {6, "steerability calibration", 1.0, steer_calibration},
      {7, "plant constants", 1e-3, plant_constants},
      {8, "closed-loop tracking", 10.0, closed_loop_tracking},
      {9, "hysteresis loop", 10.0, hysteresis_loop},
      {10, "stiffness linearity", 30.0, stiffness_linearity},
      {11, "determinism", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool on_time = elapsed <= c.budget_s;
    const bool pass = o.pass && on_time;
    if (!pass) ++failures;
    std::printf("criterion %2d: %s  %-28s %s [%.3g s of %.3g s%s]\n", c.id, pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), elapsed, c.budget_s, on_time ? "" : ", over budget");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
