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

// Scenario configuration: a schema-versioned JSON document. The built-in
// default document is also the schema; a user file may only contain keys that
// exist there, with matching JSON types. Angles in files are degrees.

#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "contispine/biomech.hpp"
#include "contispine/control.hpp"
#include "contispine/errors.hpp"
#include "contispine/kinematics.hpp"
#include "contispine/units.hpp"

namespace contispine::config {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline json default_document() {
  return json::parse(R"({
  "schema_version": 1,
  "geometry": {
    "r": 0.07, "d": 0.00216, "l": 0.01, "rho": null, "n": 20,
    "e": [0.0, 0.0, 0.02], "psi_limit_deg": null
  },
  "design": {
    "r_max": 0.1, "d_max": 0.02, "grid_r": 50, "grid_d": 50,
    "beta_target_deg": 20.0,
    "sagittal_deg": 70.0, "lateral_deg": 20.0, "transverse_deg": 90.0
  },
  "statics": {
    "cable_force": 200.0, "r1": 0.03, "r2": 0.03,
    "arms_from_geometry": false, "bend_deg": 0.0
  },
  "anthropometrics": { "m_body": 41.0, "m_load": 15.0, "L_trunk": 0.5, "g": 9.81 },
  "moment_arms": {
    "D_e": 0.05, "D_exo": 0.30, "load_offset": 0.25, "body_fraction": 0.5, "r_l": null
  },
  "assist": { "F_max": 250.0, "dt": 0.001 },
  "trajectory": { "cycle_s": 8.0, "theta_max_deg": 70.0 },
  "impedance": { "J_d": 0.0, "B_d": 6.0, "K_d": 60.0 },
  "plant": {
    "nominal_torque": 2.0, "nominal_speed_rpm": 1500.0, "gear_ratio": 36.0,
    "pulley_radius": 0.05, "k_t": 0.1, "k_c": 50000.0, "force_saturation": 1500.0,
    "speed_saturation": null, "mu_theta": 0.3, "v_eps": 0.001,
    "motor_inertia": 2e-5, "motor_damping": 1e-4, "current_time_constant": 0.001,
    "cable_lever": 0.03
  },
  "gains": {
    "force": { "kp": 0.002, "ki": 0.001, "kd": 0.0, "integral_limit": 10000.0 },
    "velocity": { "kp": 0.06, "ki": 3.0, "kd": 0.0, "integral_limit": 1e9 },
    "current": { "kp": 5.0, "ki": 5000.0, "kd": 0.0, "integral_limit": 1e9 },
    "velocity_feedforward": true,
    "capstan_feedforward": false
  },
  "sensors": { "force_noise_std": 0.0, "angle_noise_std_deg": 0.0, "seed": 1 },
  "simulation": {
    "cycles": 10, "controller": "closed_loop", "reference": "gravity",
    "dt_high": 0.001, "substeps": 10
  },
  "steer": {
    "calibration": [ { "retraction_m": 0.0523, "bend_deg": 100.0 } ],
    "max_retraction_m": 0.0523, "points": 24
  },
  "output": { "dir": "out", "manifest": true }
})");
}

namespace detail {

inline bool type_compatible(const json& value, const json& schema) {
  if (schema.is_null()) return value.is_null() || value.is_number();
  if (schema.is_number()) {
    // integer slots (counts) must stay integral
    if (schema.is_number_integer()) return value.is_number_integer();
    return value.is_number();
  }
  if (schema.is_boolean()) return value.is_boolean();
  if (schema.is_string()) return value.is_string();
  if (schema.is_array()) return value.is_array();
  if (schema.is_object()) return value.is_object();
  return false;
}

inline std::string join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
}

inline void check_against(const json& value, const json& schema, const std::string& path) {
  if (!type_compatible(value, schema)) {
    throw ConfigError("config key '" + path + "' has the wrong type (expected " +
                      std::string(schema.is_null() ? "number or null" : schema.type_name()) +
                      ")");
  }
  if (schema.is_object()) {
    for (const auto& [key, v] : value.items()) {
      if (!schema.contains(key)) throw ConfigError("unknown config key '" + join(path, key) + "'");
      check_against(v, schema.at(key), join(path, key));
    }
  } else if (schema.is_array() && !schema.empty() && schema.front().is_object()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_against(value[i], schema.front(), path + "[" + std::to_string(i) + "]");
    }
  }
}

inline void merge_into(json& base, const json& patch) {
  for (const auto& [key, v] : patch.items()) {
    if (v.is_object() && base.contains(key) && base[key].is_object()) {
      merge_into(base[key], v);
    } else {
      base[key] = v;
    }
  }
}

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const auto end = dot == std::string_view::npos ? path.size() : dot;
    parts.emplace_back(path.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

}  // namespace detail

/// Validates a user document against the schema and merges it over the
/// defaults. Missing keys keep their default value.
inline json resolve(const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be a JSON object");
  if (!user.contains("schema_version")) throw ConfigError("config lacks 'schema_version'");
  if (user.at("schema_version") != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + user.at("schema_version").dump() +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const json schema = default_document();
  detail::check_against(user, schema, "");
  json doc = schema;
  detail::merge_into(doc, user);
  return doc;
}

/// Sets a scalar addressed by a dotted path, e.g. "plant.mu_theta". The raw
/// text is read as JSON when possible, otherwise as a string.
inline void apply_override(json& doc, std::string_view path, std::string_view raw) {
  const json schema = default_document();
  const auto parts = detail::split_path(path);
  const json* slot = &schema;
  for (const auto& p : parts) {
    if (!slot->is_object() || !slot->contains(p)) {
      throw ConfigError("unknown config path '" + std::string(path) + "'");
    }
    slot = &slot->at(p);
  }
  if (slot->is_object()) {
    throw ConfigError("config path '" + std::string(path) + "' is a section, not a value");
  }
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = std::string(raw);
  detail::check_against(value, *slot, std::string(path));
  json* target = &doc;
  for (const auto& p : parts) target = &(*target)[p];
  *target = std::move(value);
}

inline json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json user = json::parse(buf.str(), nullptr, false);
  if (user.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return user;
}

// ---------------------------------------------------------------------------
// Typed view

struct DesignSettings {
  double r_max;
  double d_max;
  std::size_t grid_r;
  std::size_t grid_d;
  double beta_target;  // rad
  kinematics::MotionRequirements requirements;
};

struct StaticsSettings {
  double cable_force;
  double r1;
  double r2;
  bool arms_from_geometry;
  double bend;  // rad, total sagittal bend of the chain
};

struct SteerSettings {
  std::vector<kinematics::CalibrationPair> calibration;
  double max_retraction;
  int points;
};

struct ScenarioConfig {
  json document;  // fully resolved
  kinematics::DiscGeometry geometry;
  bool rho_from_calibration = true;
  DesignSettings design;
  StaticsSettings statics;
  biomech::Anthropometrics anthropometrics;
  biomech::MomentArms arms;
  biomech::LiftPhase lift;
  control::SimConfig sim;
  SteerSettings steer;
  std::string output_dir;
  bool manifest = true;
};

namespace detail {

inline control::PidGains read_gains(const json& j) {
  control::PidGains g;
  g.kp = j.at("kp").get<double>();
  g.ki = j.at("ki").get<double>();
  g.kd = j.at("kd").get<double>();
  g.integral_limit = j.at("integral_limit").get<double>();
  return g;
}

inline std::optional<double> optional_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

/// Builds the typed scenario from a resolved document and checks every
/// physical invariant. Any violation surfaces as ConfigError.
inline ScenarioConfig build(const json& doc) {
  ScenarioConfig c;
  c.document = doc;
  try {
    const auto& g = doc.at("geometry");
    c.geometry.r = g.at("r").get<double>();
    c.geometry.d = g.at("d").get<double>();
    c.geometry.l = g.at("l").get<double>();
    c.geometry.n = g.at("n").get<int>();
    const auto& e = g.at("e");
    if (e.size() != 3) throw ConfigError("geometry.e must have three components");
    c.geometry.e = Eigen::Vector3d(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
    if (auto psi = detail::optional_number(g.at("psi_limit_deg"))) {
      c.geometry.psi_limit = deg2rad(*psi);
    }

    const auto& st = doc.at("steer");
    for (const auto& p : st.at("calibration")) {
      c.steer.calibration.push_back(
          {p.at("retraction_m").get<double>(), deg2rad(p.at("bend_deg").get<double>())});
    }
    c.steer.max_retraction = st.at("max_retraction_m").get<double>();
    c.steer.points = st.at("points").get<int>();
    if (c.steer.points < 2) throw ConfigError("steer.points must be >= 2");

    if (auto rho = detail::optional_number(g.at("rho"))) {
      c.geometry.rho = *rho;
      c.rho_from_calibration = false;
    } else {
      c.rho_from_calibration = true;
      c.geometry.rho = kinematics::calibrate_hole_radius(c.steer.calibration, c.geometry);
    }
    c.geometry.validate();

    const auto& d = doc.at("design");
    c.design.r_max = d.at("r_max").get<double>();
    c.design.d_max = d.at("d_max").get<double>();
    const int gr = d.at("grid_r").get<int>();
    const int gd = d.at("grid_d").get<int>();
    if (gr < 1 || gd < 1) throw ConfigError("design grid counts must be >= 1");
    c.design.grid_r = static_cast<std::size_t>(gr);
    c.design.grid_d = static_cast<std::size_t>(gd);
    c.design.beta_target = deg2rad(d.at("beta_target_deg").get<double>());
    c.design.requirements = {deg2rad(d.at("sagittal_deg").get<double>()),
                             deg2rad(d.at("lateral_deg").get<double>()),
                             deg2rad(d.at("transverse_deg").get<double>())};

    const auto& s = doc.at("statics");
    c.statics = {s.at("cable_force").get<double>(), s.at("r1").get<double>(),
                 s.at("r2").get<double>(), s.at("arms_from_geometry").get<bool>(),
                 deg2rad(s.at("bend_deg").get<double>())};
    if (!(c.statics.cable_force >= 0.0)) throw ConfigError("statics.cable_force must be >= 0");

    const auto& a = doc.at("anthropometrics");
    c.anthropometrics = {a.at("m_body").get<double>(), a.at("m_load").get<double>(),
                         a.at("L_trunk").get<double>(), a.at("g").get<double>()};
    c.anthropometrics.validate();

    const auto& m = doc.at("moment_arms");
    c.arms.D_e = m.at("D_e").get<double>();
    c.arms.D_exo = m.at("D_exo").get<double>();
    c.arms.load_offset = m.at("load_offset").get<double>();
    c.arms.body_fraction = m.at("body_fraction").get<double>();
    c.arms.r_l = detail::optional_number(m.at("r_l")).value_or(c.arms.D_exo);
    c.arms.validate();

    const auto& tr = doc.at("trajectory");
    c.lift.cycle = tr.at("cycle_s").get<double>();
    c.lift.theta_max = deg2rad(tr.at("theta_max_deg").get<double>());
    c.lift.F_max = doc.at("assist").at("F_max").get<double>();
    c.lift.dt = doc.at("assist").at("dt").get<double>();
    if (!(c.lift.F_max >= 0.0)) throw ConfigError("assist.F_max must be >= 0");
    if (!(c.lift.theta_max > 0.0 && c.lift.theta_max <= kPi / 2)) {
      throw ConfigError("trajectory.theta_max_deg must lie in (0, 90]");
    }

    auto& sim = c.sim;
    const auto& sj = doc.at("simulation");
    sim.cycles = sj.at("cycles").get<int>();
    const auto controller = sj.at("controller").get<std::string>();
    if (controller == "closed_loop") {
      sim.mode = control::ControllerMode::closed_loop_force;
    } else if (controller == "open_loop") {
      sim.mode = control::ControllerMode::open_loop_current;
    } else {
      throw ConfigError("simulation.controller must be 'closed_loop' or 'open_loop'");
    }
    const auto reference = sj.at("reference").get<std::string>();
    if (reference == "gravity") {
      sim.law = control::ReferenceLaw::gravity_stiffness;
    } else if (reference == "impedance") {
      sim.law = control::ReferenceLaw::impedance;
    } else {
      throw ConfigError("simulation.reference must be 'gravity' or 'impedance'");
    }
    sim.dt_high = sj.at("dt_high").get<double>();
    sim.substeps = sj.at("substeps").get<int>();
    sim.cycle = c.lift.cycle;
    sim.theta_max = c.lift.theta_max;
    sim.r_l = c.arms.r_l;

    const auto& ij = doc.at("impedance");
    sim.impedance.J_d = ij.at("J_d").get<double>();
    sim.impedance.B_d = ij.at("B_d").get<double>();
    sim.impedance.K_d = ij.at("K_d").get<double>();

    const auto& pj = doc.at("plant");
    auto& p = sim.plant;
    p.nominal_torque = pj.at("nominal_torque").get<double>();
    p.nominal_speed_rpm = pj.at("nominal_speed_rpm").get<double>();
    p.gear_ratio = pj.at("gear_ratio").get<double>();
    p.pulley_radius = pj.at("pulley_radius").get<double>();
    p.k_t = pj.at("k_t").get<double>();
    p.k_c = pj.at("k_c").get<double>();
    p.force_saturation = pj.at("force_saturation").get<double>();
    p.speed_saturation = detail::optional_number(pj.at("speed_saturation"));
    p.mu_theta = pj.at("mu_theta").get<double>();
    p.v_eps = pj.at("v_eps").get<double>();
    p.motor_inertia = pj.at("motor_inertia").get<double>();
    p.motor_damping = pj.at("motor_damping").get<double>();
    p.current_time_constant = pj.at("current_time_constant").get<double>();
    p.cable_lever = pj.at("cable_lever").get<double>();

    const auto& gj = doc.at("gains");
    sim.gains.force = detail::read_gains(gj.at("force"));
    sim.gains.velocity = detail::read_gains(gj.at("velocity"));
    sim.gains.current = detail::read_gains(gj.at("current"));
    sim.gains.velocity_feedforward = gj.at("velocity_feedforward").get<bool>();
    sim.gains.capstan_feedforward = gj.at("capstan_feedforward").get<bool>();

    const auto& nj = doc.at("sensors");
    sim.noise.force_std = nj.at("force_noise_std").get<double>();
    sim.noise.angle_std = deg2rad(nj.at("angle_noise_std_deg").get<double>());
    const auto seed = nj.at("seed").get<std::int64_t>();
    if (seed < 0) throw ConfigError("sensors.seed must be >= 0");
    sim.noise.seed = static_cast<std::uint64_t>(seed);
    sim.validate();

    c.output_dir = doc.at("output").at("dir").get<std::string>();
    c.manifest = doc.at("output").at("manifest").get<bool>();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

/// File (optional) + dotted overrides -> typed scenario.
inline ScenarioConfig load(const std::string& path,
                           std::span<const std::pair<std::string, std::string>> overrides = {}) {
  json doc = path.empty() ? default_document() : resolve(load_file(path));
  for (const auto& [key, value] : overrides) apply_override(doc, key, value);
  return build(doc);
}

/// FNV-1a 64 over the canonical dump; keys are ordered, so the hash only
/// depends on the configuration content.
inline std::string content_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace contispine::config
