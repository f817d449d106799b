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

// Assistive force control stack: virtual impedance reference, cascaded
// force -> velocity -> current loops, motor-gear-pulley plant with a series
// elastic cable, and Bowden sheath friction.
//
// Sign conventions used throughout this file:
//   * motor angle and cable "winding" are positive when the motor retracts
//     cable (pulls the exoskeleton);
//   * the sheath velocity passed to the hysteresis model is the cable
//     retraction rate through the sheath, positive toward the motor.
// The cable inside the sheath is taken as rigid and the series compliance
// sits at the motor side, so the sheath slip rate equals the distal end
// velocity set by the trunk motion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contispine/biomech.hpp"
#include "contispine/errors.hpp"
#include "contispine/units.hpp"

namespace contispine::control {

using biomech::TrunkState;

// ---------------------------------------------------------------------------
// Parameters

struct ImpedanceParams {
  double J_d = 0.0;  // N m s^2/rad
  double B_d = 6.0;  // N m s/rad
  double K_d = 60.0;  // N m/rad
  TrunkState reference{0.0, 0.0, 0.0};

  void validate() const {
    if (!(J_d >= 0.0) || !(B_d >= 0.0)) throw DomainError("J_d and B_d must be >= 0");
    if (!std::isfinite(K_d)) throw DomainError("K_d must be finite");
  }
};

struct PlantParams {
  double nominal_torque = 2.0;       // N m
  double nominal_speed_rpm = 1500.0;
  double gear_ratio = 36.0;
  double pulley_radius = 0.05;       // m
  double k_t = 0.1;                  // N m/A (assumed)
  double k_c = 5.0e4;                // N/m (assumed)
  double force_saturation = 1500.0;  // N
  std::optional<double> speed_saturation;  // m/s; derived from the motor when unset
  double mu_theta = 0.3;             // sheath friction x wrap angle
  double v_eps = 1e-3;               // m/s
  double motor_inertia = 2e-5;       // kg m^2, rotor + gearbox at the motor shaft
  double motor_damping = 1e-4;       // N m s/rad
  double current_time_constant = 1e-3;  // s
  double cable_lever = 0.03;         // m of cable drawn out per rad of trunk flexion

  double max_motor_speed() const {
    if (speed_saturation) return *speed_saturation / pulley_radius * gear_ratio;
    return rpm2rad_s(nominal_speed_rpm);
  }
  double cable_speed_limit() const { return max_motor_speed() * pulley_radius / gear_ratio; }
  double stall_cable_force() const { return nominal_torque * gear_ratio / pulley_radius; }
  double max_motor_torque() const { return force_saturation * pulley_radius / gear_ratio; }
  double max_current() const { return max_motor_torque() / k_t; }
  double force_to_current(double cable_force) const {
    return cable_force * pulley_radius / (gear_ratio * k_t);
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw DomainError(std::string(name) + " must be > 0");
    };
    positive(nominal_torque, "plant.nominal_torque");
    positive(nominal_speed_rpm, "plant.nominal_speed_rpm");
    positive(gear_ratio, "plant.gear_ratio");
    positive(pulley_radius, "plant.pulley_radius");
    positive(k_t, "plant.k_t");
    positive(k_c, "plant.k_c");
    positive(force_saturation, "plant.force_saturation");
    positive(motor_inertia, "plant.motor_inertia");
    positive(current_time_constant, "plant.current_time_constant");
    positive(cable_lever, "plant.cable_lever");
    if (speed_saturation) positive(*speed_saturation, "plant.speed_saturation");
    if (!(mu_theta >= 0.0)) throw DomainError("plant.mu_theta must be >= 0");
    if (!(v_eps >= 0.0)) throw DomainError("plant.v_eps must be >= 0");
    if (!(motor_damping >= 0.0)) throw DomainError("plant.motor_damping must be >= 0");
    if (stall_cable_force() > force_saturation) {
      throw DomainError("stall cable force exceeds the force saturation");
    }
  }
};

// ---------------------------------------------------------------------------
// PID

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = 1e9;  // bound on the raw error integral
  double output_limit = 1e9;
};

struct PidState {
  double integral = 0.0;
  double previous_error = 0.0;
  bool primed = false;
};

struct PidOutput {
  double command;
  PidState state;
};

/// Positional PID with clamped integral and conditional integration: the
/// integral is not advanced on a step whose output saturates in the
/// direction of the error.
inline PidOutput pid_step(const PidGains& gains, double setpoint, double measurement,
                          PidState state, double dt) {
  if (!(dt > 0.0)) throw DomainError("pid_step requires dt > 0");
  const double error = setpoint - measurement;
  const double derivative = state.primed ? (error - state.previous_error) / dt : 0.0;
  const double integral =
      std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  double command = gains.kp * error + gains.ki * integral + gains.kd * derivative;
  const bool saturated = std::abs(command) > gains.output_limit;
  if (saturated) command = std::clamp(command, -gains.output_limit, gains.output_limit);
  if (!saturated || (command > 0.0) != (error > 0.0)) state.integral = integral;
  state.previous_error = error;
  state.primed = true;
  return {command, state};
}

// ---------------------------------------------------------------------------
// Bowden cable transmission

/// Smooth sign in [-1, 1] of the sheath velocity over the band v_eps.
inline double friction_direction(double sheath_velocity, double v_eps) {
  if (v_eps <= 0.0) return (sheath_velocity > 0.0) - (sheath_velocity < 0.0);
  return std::tanh(sheath_velocity / v_eps);
}

/// Capstan attenuation: F_distal = F_proximal exp(-s mu_theta). Retracting
/// (s -> +1) the motor must overcome sheath friction, so the distal end sees
/// less; paying out (s -> -1) the load drags the cable and sees more.
inline double hysteresis_transmission(double F_proximal, double sheath_velocity,
                                      const PlantParams& p) {
  const double s = friction_direction(sheath_velocity, p.v_eps);
  return F_proximal * std::exp(-s * p.mu_theta);
}

/// Power lost in the sheath: (F_proximal - F_distal) times the retraction rate.
/// Non-negative for every state because s and the velocity share a sign.
inline double transmission_dissipation(double F_proximal, double sheath_velocity,
                                       const PlantParams& p) {
  return (F_proximal - hysteresis_transmission(F_proximal, sheath_velocity, p)) *
         sheath_velocity;
}

// ---------------------------------------------------------------------------
// Plant

struct LoopState {
  double t = 0.0;
  TrunkState trunk{0.0, 0.0, 0.0};
  double F_r = 0.0;     // force reference, N
  double F_a = 0.0;     // measured distal cable force, N
  double F_p = 0.0;     // proximal (motor side) cable tension, N
  double omega_r = 0.0;  // rad/s
  double omega = 0.0;
  double I_r = 0.0;  // A
  double I = 0.0;
  double motor_angle = 0.0;  // rad, positive winding
  double sheath_velocity = 0.0;
  PidState force_pid;
  PidState velocity_pid;
  PidState current_pid;

  double winding(double pulley_radius, double gear_ratio) const {
    return pulley_radius * motor_angle / gear_ratio;
  }
  /// Cable paid out by the motor from the initial position, m.
  double payout(const PlantParams& p) const { return -winding(p.pulley_radius, p.gear_ratio); }
};

namespace detail {

inline double spring_tension(const LoopState& s, const TrunkState& trunk, const PlantParams& p) {
  const double stretch =
      p.cable_lever * trunk.theta + s.winding(p.pulley_radius, p.gear_ratio);
  return p.k_c * std::max(0.0, stretch);
}

inline void check_finite(const LoopState& s, std::size_t index) {
  const double values[] = {s.F_p, s.F_a, s.omega, s.I, s.motor_angle};
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw SimulationError(index, "non-finite plant state at sample " + std::to_string(index));
    }
  }
}

}  // namespace detail

/// Advances the plant by dt under the drive current command.
///
/// The electrical side is a first-order lag toward the (saturated) drive
/// command. The motor integrates torque k_t I against damping and the cable
/// load reflected through the gear and pulley (semi-implicit Euler), with its
/// speed held within the motor limit. Cable tension is the series spring
/// k_c * stretch (slack below zero, saturated at the force limit), and the
/// distal force follows from the sheath friction. `trunk_next` is the trunk
/// state at t + dt.
inline LoopState plant_step(const LoopState& state, double drive, const TrunkState& trunk_next,
                            double dt, const PlantParams& p, std::size_t index = 0) {
  if (!(dt > 0.0 && dt <= 1e-3)) throw DomainError("plant_step requires dt in (0, 1e-3]");
  if (!std::isfinite(drive)) {
    throw SimulationError(index, "non-finite drive command at sample " + std::to_string(index));
  }
  LoopState s = state;
  const double i_max = p.max_current();
  const double command = std::clamp(drive, -i_max, i_max);
  s.I += (command - s.I) / p.current_time_constant * dt;

  const double torque = std::clamp(p.k_t * s.I, -p.max_motor_torque(), p.max_motor_torque());
  const double load_torque = s.F_p * p.pulley_radius / p.gear_ratio;
  const double accel = (torque - p.motor_damping * s.omega - load_torque) / p.motor_inertia;
  const double w_max = p.max_motor_speed();
  s.omega = std::clamp(s.omega + accel * dt, -w_max, w_max);
  s.motor_angle += s.omega * dt;

  s.t += dt;
  s.trunk = trunk_next;
  const double tension = detail::spring_tension(s, trunk_next, p);
  if (tension > 2.0 * p.force_saturation) {
    throw SimulationError(index, "cable tension " + std::to_string(tension) +
                                     " N exceeds twice the saturation at sample " +
                                     std::to_string(index));
  }
  s.F_p = std::min(tension, p.force_saturation);
  s.sheath_velocity = -p.cable_lever * trunk_next.theta_dot;
  s.F_a = hysteresis_transmission(s.F_p, s.sheath_velocity, p);
  detail::check_finite(s, index);
  return s;
}

// ---------------------------------------------------------------------------
// High-level references

struct ForceReference {
  double force;
  bool clamped;  // the raw value was negative and the cable cannot push
};

/// Virtual impedance torque turned into cable force through the lever r_l.
inline ForceReference impedance_reference(const ImpedanceParams& ip, const TrunkState& actual,
                                          double r_l) {
  if (r_l == 0.0) throw DomainError("trunk lever r_l must be non-zero");
  const auto& ref = ip.reference;
  const double torque = ip.J_d * (actual.theta_ddot - ref.theta_ddot) +
                        ip.B_d * (actual.theta_dot - ref.theta_dot) +
                        ip.K_d * (actual.theta - ref.theta);
  const double force = torque / r_l;
  return {std::max(0.0, force), force < 0.0};
}

/// Gravity-compensating stiffness with damping: 20 theta_dot + 200 sin(theta).
inline ForceReference gravity_stiffness_reference(double theta, double theta_dot) {
  const double force = 20.0 * theta_dot + 200.0 * std::sin(theta);
  return {std::max(0.0, force), force < 0.0};
}

// ---------------------------------------------------------------------------
// Simulation

enum class ControllerMode { open_loop_current, closed_loop_force };
enum class ReferenceLaw { impedance, gravity_stiffness };

/// Default gains were tuned on the default plant for the 10-cycle stoop run.
/// Force loop output is a cable retraction speed (m/s); velocity loop output
/// is a current reference (A); the current loop output is the drive command.
struct ControllerGains {
  PidGains force{2e-3, 1e-3, 0.0, 1e4, 1e9};
  PidGains velocity{0.06, 3.0, 0.0, 1e9, 1e9};
  PidGains current{5.0, 5000.0, 0.0, 1e9, 1e9};
  bool velocity_feedforward = true;  // track the trunk-driven cable excursion
  bool capstan_feedforward = false;  // open loop only: pre-scale by exp(s mu_theta)
};

struct SensorNoise {
  double force_std = 0.0;  // N
  double angle_std = 0.0;  // rad
  std::uint64_t seed = 1;
};

struct SimConfig {
  int cycles = 10;
  ControllerMode mode = ControllerMode::closed_loop_force;
  ReferenceLaw law = ReferenceLaw::gravity_stiffness;
  double cycle = 8.0;
  double theta_max = deg2rad(70.0);
  double dt_high = 1e-3;
  int substeps = 10;
  double r_l = 0.30;
  ImpedanceParams impedance;
  PlantParams plant;
  ControllerGains gains;
  SensorNoise noise;

  void validate() const {
    if (cycles < 1) throw DomainError("cycles must be >= 1");
    if (!(cycle > 0.0)) throw DomainError("cycle must be > 0");
    if (!(theta_max > 0.0 && theta_max <= kPi / 2)) {
      throw DomainError("theta_max must lie in (0, 90] deg");
    }
    if (!(dt_high > 0.0 && dt_high <= 1e-2)) throw DomainError("dt_high must lie in (0, 10 ms]");
    if (substeps < 1) throw DomainError("substeps must be >= 1");
    if (!(r_l > 0.0)) throw DomainError("r_l must be > 0");
    if (!(noise.force_std >= 0.0) || !(noise.angle_std >= 0.0)) {
      throw DomainError("noise standard deviations must be >= 0");
    }
    impedance.validate();
    plant.validate();
  }
};

struct SimTrace {
  std::vector<LoopState> samples;  // one per high-level tick
  double dt = 1e-3;
  std::size_t samples_per_cycle = 0;
  std::size_t clamp_events = 0;
};

inline SimTrace simulate_stoop(const SimConfig& cfg) {
  cfg.validate();
  const auto& p = cfg.plant;
  const double dt_low = cfg.dt_high / cfg.substeps;
  const auto per_cycle = static_cast<std::size_t>(std::llround(cfg.cycle / cfg.dt_high));
  const std::size_t ticks = per_cycle * static_cast<std::size_t>(cfg.cycles);

  PidGains velocity_gains = cfg.gains.velocity;
  velocity_gains.output_limit = std::min(velocity_gains.output_limit, p.max_current());
  PidGains current_gains = cfg.gains.current;
  current_gains.output_limit = std::min(current_gains.output_limit, 2.0 * p.max_current());

  std::mt19937_64 rng(cfg.noise.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  auto noisy = [&](double value, double sigma) {
    return sigma > 0.0 ? value + sigma * unit_normal(rng) : value;
  };
  auto trunk_at = [&](double t) { return biomech::stoop_trajectory(t, cfg.cycle, cfg.theta_max); };

  SimTrace trace;
  trace.dt = cfg.dt_high;
  trace.samples_per_cycle = per_cycle;
  trace.samples.reserve(ticks);

  LoopState s;
  s.trunk = trunk_at(0.0);
  s.F_p = detail::spring_tension(s, s.trunk, p);
  s.F_a = hysteresis_transmission(s.F_p, s.sheath_velocity, p);

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * cfg.dt_high;
    s.t = t;

    TrunkState measured = s.trunk;
    measured.theta = noisy(measured.theta, cfg.noise.angle_std);
    const double F_meas = noisy(s.F_a, cfg.noise.force_std);

    const ForceReference ref =
        cfg.law == ReferenceLaw::gravity_stiffness
            ? gravity_stiffness_reference(measured.theta, measured.theta_dot)
            : impedance_reference(cfg.impedance, measured, cfg.r_l);
    if (ref.clamped) ++trace.clamp_events;
    s.F_r = ref.force;
    s.F_a = F_meas;

    const double predicted_s =
        friction_direction(-p.cable_lever * measured.theta_dot, p.v_eps);
    if (cfg.mode == ControllerMode::closed_loop_force) {
      auto out = pid_step(cfg.gains.force, s.F_r, F_meas, s.force_pid, cfg.dt_high);
      s.force_pid = out.state;
      double speed = out.command;
      if (cfg.gains.velocity_feedforward) speed += -p.cable_lever * measured.theta_dot;
      const double v_max = p.cable_speed_limit();
      speed = std::clamp(speed, -v_max, v_max);
      s.omega_r = speed * p.gear_ratio / p.pulley_radius;
    } else {
      double target = s.F_r;
      if (cfg.gains.capstan_feedforward) target *= std::exp(predicted_s * p.mu_theta);
      s.I_r = std::min(p.force_to_current(target), p.max_current());
      s.omega_r = 0.0;
    }

    trace.samples.push_back(s);

    for (int j = 0; j < cfg.substeps; ++j) {
      if (cfg.mode == ControllerMode::closed_loop_force) {
        auto v = pid_step(velocity_gains, s.omega_r, s.omega, s.velocity_pid, dt_low);
        s.velocity_pid = v.state;
        s.I_r = v.command;
      }
      auto c = pid_step(current_gains, s.I_r, s.I, s.current_pid, dt_low);
      s.current_pid = c.state;
      const double t_next = t + static_cast<double>(j + 1) * dt_low;
      s = plant_step(s, s.I_r + c.command, trunk_at(t_next), dt_low, p, k);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Metrics

struct LinearFit {
  double slope;
  double intercept;
  double r2;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("regression input has zero variance");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (slope * x[i] + intercept);
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {slope, intercept, r2};
}

/// Magnitude of the signed shoelace area of the closed polygon (x_i, y_i).
inline double loop_area(std::span<const double> x, std::span<const double> y) {
  double a = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    a += x[i] * y[j] - x[j] * y[i];
  }
  return 0.5 * std::abs(a);
}

struct TrackingMetrics {
  double rms_error;     // N
  double peak_force;    // N, peak of the reference
  double percent;       // rms / peak, %
  double loop_area;     // N^2, mean per-cycle area in the (F_r, F_a) plane
  LinearFit stiffness;  // F_a against 200 sin(theta_a)
};

inline TrackingMetrics tracking_metrics(const SimTrace& trace) {
  if (trace.samples.empty()) throw DomainError("tracking_metrics needs a non-empty trace");
  const auto& xs = trace.samples;
  std::vector<double> fr, fa, spring;
  fr.reserve(xs.size());
  fa.reserve(xs.size());
  spring.reserve(xs.size());
  double sq = 0.0, peak = 0.0;
  for (const auto& s : xs) {
    const double e = s.F_a - s.F_r;
    sq += e * e;
    peak = std::max(peak, s.F_r);
    fr.push_back(s.F_r);
    fa.push_back(s.F_a);
    spring.push_back(200.0 * std::sin(s.trunk.theta));
  }
  TrackingMetrics m{};
  m.rms_error = std::sqrt(sq / static_cast<double>(xs.size()));
  m.peak_force = peak;
  m.percent = peak > 0.0 ? 100.0 * m.rms_error / peak : 0.0;

  const std::size_t per = trace.samples_per_cycle > 0 ? trace.samples_per_cycle : xs.size();
  const std::size_t loops = std::max<std::size_t>(1, xs.size() / per);
  double area = 0.0;
  for (std::size_t c = 0; c < loops; ++c) {
    const std::size_t begin = c * per;
    const std::size_t len = std::min(per, xs.size() - begin);
    area += loop_area(std::span(fr).subspan(begin, len), std::span(fa).subspan(begin, len));
  }
  m.loop_area = area / static_cast<double>(loops);
  m.stiffness = least_squares(spring, fa);
  return m;
}

}  // namespace contispine::control
