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

// Subcommands of the contispine tool. Each returns named tables; writing them
// to disk is a separate step so the commands can be tested in memory.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "contispine/biomech.hpp"
#include "contispine/config.hpp"
#include "contispine/control.hpp"
#include "contispine/csv.hpp"
#include "contispine/errors.hpp"
#include "contispine/kinematics.hpp"
#include "contispine/statics.hpp"
#include "contispine/units.hpp"

namespace contispine::cli {

#ifndef CONTISPINE_VERSION
#define CONTISPINE_VERSION "0.1.0"
#endif

struct NamedTable {
  std::string file;
  ResultTable table;
};

struct CommandOutput {
  std::vector<NamedTable> tables;

  const ResultTable& get(const std::string& file) const {
    for (const auto& t : tables) {
      if (t.file == file) return t.table;
    }
    throw std::out_of_range("no output table " + file);
  }
};

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

// ---------------------------------------------------------------------------
// design

inline CommandOutput cmd_design(const config::ScenarioConfig& c) {
  using namespace kinematics;
  CommandOutput out;

  ResultTable sweep({"r", "d", "beta"}, {"m", "m", "deg"});
  for (const auto& s : rom_sweep({0.0, c.design.r_max}, {0.0, c.design.d_max}, c.design.grid_r,
                                 c.design.grid_d)) {
    sweep.add_row({s.r, s.d, rad2deg(s.beta)});
  }
  out.tables.push_back({"design_sweep.csv", std::move(sweep)});

  const auto report = check_requirements(c.geometry, c.design.requirements);
  ResultTable req({"requirement", "required", "capability", "margin", "pass"},
                  {"-", "deg", "deg", "deg", "-"});
  for (const auto& row : report.rows) {
    req.add_row({row.name, rad2deg(row.required), rad2deg(row.capability), rad2deg(row.margin),
                 std::string(row.asserted ? yes_no(row.pass) : "reported")});
  }
  out.tables.push_back({"requirements.csv", std::move(req)});

  ResultTable point({"r", "beta_target", "d_solved", "beta_check", "beta_config", "min_discs"},
                    {"m", "deg", "m", "deg", "deg", "-"});
  const double d = solve_d_for_beta(c.geometry.r, c.design.beta_target);
  point.add_row({c.geometry.r, rad2deg(c.design.beta_target), d,
                 rad2deg(beta_from_geometry(c.geometry.r, d)), rad2deg(report.beta),
                 static_cast<std::int64_t>(report.min_discs)});
  out.tables.push_back({"design_point.csv", std::move(point)});
  return out;
}

// ---------------------------------------------------------------------------
// statics

inline statics::TendonLoad statics_load(const config::ScenarioConfig& c) {
  const auto& s = c.statics;
  if (s.arms_from_geometry) {
    return statics::moment_arms_from_geometry(c.geometry, s.bend / c.geometry.n, s.cable_force);
  }
  return {s.cable_force, s.r1, s.r2};
}

inline CommandOutput cmd_statics(const config::ScenarioConfig& c) {
  using namespace statics;
  const int n = c.geometry.n;
  TendonLoad load;
  TendonSolution sol;
  std::vector<DiscResidual> residuals;
  try {
    load = statics_load(c);
    sol = propagate_chain(load, n);
    const auto angles = kinematics::uniform_sagittal_bend(n, c.statics.bend);
    residuals = free_body_residuals_per_disc(sol, load, n, angles);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const bool even = sol.parity == Parity::even;

  std::vector<std::string> cols{"disc", "role", "backbone_force", "reaction_force"};
  std::vector<std::string> units{"-", "-", "N", "N"};
  if (even) {
    cols.push_back("base_moment");
    units.push_back("N m");
  }
  cols.insert(cols.end(), {"residual_force", "residual_moment"});
  units.insert(units.end(), {"N", "N m"});
  ResultTable table(cols, units);

  for (int i = 0; i <= n; ++i) {
    const auto& r = residuals[static_cast<std::size_t>(i)];
    std::vector<Cell> row{static_cast<std::int64_t>(i)};
    if (i == 0) {
      row.insert(row.end(), {std::string("base"), sol.base_backbone_force, sol.reaction_force});
    } else if (i == n) {
      row.insert(row.end(), {std::string("distal"), sol.distal_backbone_force, sol.reaction_force});
    } else {
      row.insert(row.end(),
                 {std::string("intermediate"), sol.intermediate_backbone_force, sol.reaction_force});
    }
    if (even) row.emplace_back(i == 0 ? *sol.base_moment : 0.0);
    row.insert(row.end(), {r.force, r.moment});
    table.add_row(std::move(row));
  }

  CommandOutput out;
  out.tables.push_back({"statics.csv", std::move(table)});

  ResultTable summary({"cable_force", "r1", "r2", "alpha", "parity", "max_residual"},
                      {"N", "m", "m", "deg", "-", "N"});
  double worst = 0.0;
  for (const auto& r : residuals) worst = std::max({worst, r.force, r.moment});
  summary.add_row({load.cable_force, load.r1, load.r2, rad2deg(sol.alpha),
                   std::string(even ? "even" : "odd"), worst});
  out.tables.push_back({"statics_summary.csv", std::move(summary)});
  return out;
}

// ---------------------------------------------------------------------------
// biomech

inline ResultTable reduction_table(const biomech::ReductionReport& rep) {
  ResultTable t({"force", "peak_without", "peak_with", "reduction", "reduction_pct", "feasible"},
                {"-", "N", "N", "N", "%", "-"});
  auto add = [&](const char* name, const biomech::ForceReduction& r) {
    t.add_row({std::string(name), r.peak_without, r.peak_with, r.absolute(), r.percent(),
               std::string(yes_no(rep.feasible))});
  };
  add("compression", rep.compression);
  add("shear", rep.shear);
  add("muscle", rep.muscle);
  return t;
}

inline CommandOutput cmd_biomech(const config::ScenarioConfig& c) {
  biomech::ReductionReport rep;
  try {
    rep = biomech::reduction_report(c.anthropometrics, c.arms, c.lift);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  ResultTable series({"t", "theta", "F_exo", "F_e_without", "F_p_without", "F_s_without",
                      "F_e_with", "F_p_with", "F_s_with"},
                     {"s", "deg", "N", "N", "N", "N", "N", "N", "N"});
  for (const auto& s : rep.series) {
    series.add_row({s.t, rad2deg(s.theta), s.with.F_exo, s.without.F_e, s.without.F_p,
                    s.without.F_s, s.with.F_e, s.with.F_p, s.with.F_s});
  }
  CommandOutput out;
  out.tables.push_back({"biomech_series.csv", std::move(series)});
  out.tables.push_back({"biomech_summary.csv", reduction_table(rep)});
  return out;
}

// ---------------------------------------------------------------------------
// simulate

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{"rms_N",  "percent_of_peak", "loop_area",
                                             "slope",  "r2",              "peak_force",
                                             "clamp_events"};
  return cols;
}

inline std::vector<Cell> metrics_cells(const control::TrackingMetrics& m, std::size_t clamps) {
  return {m.rms_error,       m.percent,    m.loop_area, m.stiffness.slope, m.stiffness.r2,
          m.peak_force, static_cast<std::int64_t>(clamps)};
}

inline CommandOutput cmd_simulate(const config::ScenarioConfig& c) {
  const auto trace = control::simulate_stoop(c.sim);
  const auto m = control::tracking_metrics(trace);
  const auto& p = c.sim.plant;

  ResultTable t({"t", "theta_a", "F_r", "F_a", "I", "omega", "payout"},
                {"s", "deg", "N", "N", "A", "rad/s", "m"});
  for (const auto& s : trace.samples) {
    t.add_row({s.t, rad2deg(s.trunk.theta), s.F_r, s.F_a, s.I, s.omega, s.payout(p)});
  }
  ResultTable metrics(metrics_columns(), {"N", "%", "N^2", "-", "-", "N", "-"});
  metrics.add_row(metrics_cells(m, trace.clamp_events));

  CommandOutput out;
  out.tables.push_back({"trace.csv", std::move(t)});
  out.tables.push_back({"metrics.csv", std::move(metrics)});
  return out;
}

// ---------------------------------------------------------------------------
// steer

inline CommandOutput cmd_steer(const config::ScenarioConfig& c) {
  using namespace kinematics;
  DiscGeometry g = c.geometry;
  double residual = 0.0;
  try {
    g.rho = calibrate_hole_radius(c.steer.calibration, g);
    for (const auto& p : c.steer.calibration) {
      residual = std::max(residual, std::abs(uniform_bend_retraction(p.bend, g) - p.retraction));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("infeasible calibration: ") + e.what());
  }
  if (!(c.steer.max_retraction > 0.0) || c.steer.max_retraction > max_retraction(g)) {
    throw ConfigError("steer.max_retraction_m outside the achievable range");
  }

  ResultTable t({"retraction", "bend"}, {"cm", "deg"});
  const int points = c.steer.points;
  for (int i = 0; i < points; ++i) {
    // exact endpoints so the calibration datum appears verbatim
    const double x = (i == points - 1)
                         ? c.steer.max_retraction
                         : c.steer.max_retraction * static_cast<double>(i) / (points - 1);
    t.add_row({100.0 * x, rad2deg(bend_from_retraction(x, g))});
  }
  ResultTable cal({"rho", "max_residual", "max_bend", "max_retraction"}, {"m", "m", "deg", "cm"});
  cal.add_row({g.rho, residual, rad2deg(max_total_bend(g)), 100.0 * max_retraction(g)});

  CommandOutput out;
  out.tables.push_back({"steer.csv", std::move(t)});
  out.tables.push_back({"steer_calibration.csv", std::move(cal)});
  return out;
}

// ---------------------------------------------------------------------------
// sweep

enum class SweepTarget { design, statics, biomech, simulate };

inline SweepTarget parse_target(const std::string& s) {
  if (s == "design") return SweepTarget::design;
  if (s == "statics") return SweepTarget::statics;
  if (s == "biomech") return SweepTarget::biomech;
  if (s == "simulate") return SweepTarget::simulate;
  throw ConfigError("unknown sweep target '" + s + "'");
}

/// Picks the command a parameter feeds when no target is given.
inline SweepTarget infer_target(const std::string& path) {
  const auto section = path.substr(0, path.find('.'));
  if (section == "geometry" || section == "design") return SweepTarget::design;
  if (section == "statics") return SweepTarget::statics;
  if (section == "anthropometrics" || section == "moment_arms" || section == "assist") {
    return SweepTarget::biomech;
  }
  return SweepTarget::simulate;
}

inline std::pair<std::vector<std::string>, std::vector<std::string>> sweep_schema(
    SweepTarget target) {
  switch (target) {
    case SweepTarget::design:
      return {{"beta", "sagittal_margin", "lateral_margin", "min_discs"},
              {"deg", "deg", "deg", "-"}};
    case SweepTarget::statics:
      return {{"alpha", "backbone_distal", "backbone_intermediate", "reaction", "base_moment",
               "max_residual"},
              {"deg", "N", "N", "N", "N m", "N"}};
    case SweepTarget::biomech:
      return {{"compression_reduction_pct", "shear_reduction_pct", "muscle_reduction_pct",
               "shear_reduction", "feasible"},
              {"%", "%", "%", "N", "-"}};
    case SweepTarget::simulate:
      return {metrics_columns(), {"N", "%", "N^2", "-", "-", "N", "-"}};
  }
  return {};
}

inline std::vector<Cell> sweep_row(const config::ScenarioConfig& c, SweepTarget target) {
  switch (target) {
    case SweepTarget::design: {
      const auto rep = kinematics::check_requirements(c.geometry, c.design.requirements);
      return {rad2deg(rep.beta), rad2deg(rep.rows[0].margin), rad2deg(rep.rows[1].margin),
              static_cast<std::int64_t>(rep.min_discs)};
    }
    case SweepTarget::statics: {
      const auto out = cmd_statics(c);
      const auto& summary = out.get("statics_summary.csv");
      const auto load = statics_load(c);
      const auto sol = statics::propagate_chain(load, c.geometry.n);
      return {rad2deg(sol.alpha), sol.distal_backbone_force, sol.intermediate_backbone_force,
              sol.reaction_force, sol.base_moment.value_or(0.0),
              summary.number(0, "max_residual")};
    }
    case SweepTarget::biomech: {
      const auto rep = biomech::reduction_report(c.anthropometrics, c.arms, c.lift);
      return {rep.compression.percent(), rep.shear.percent(), rep.muscle.percent(),
              rep.shear.absolute(), std::string(yes_no(rep.feasible))};
    }
    case SweepTarget::simulate: {
      const auto trace = control::simulate_stoop(c.sim);
      return metrics_cells(control::tracking_metrics(trace), trace.clamp_events);
    }
  }
  return {};
}

/// One row per value, in input order. Runs are independent and execute
/// concurrently; each task only builds its own row.
inline ResultTable cmd_sweep(const config::json& base_document, const std::string& path,
                             const std::vector<std::string>& values, SweepTarget target) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<config::ScenarioConfig> scenarios;
  scenarios.reserve(values.size());
  for (const auto& v : values) {
    config::json doc = base_document;
    config::apply_override(doc, path, v);
    scenarios.push_back(config::build(doc));
  }

  auto [cols, units] = sweep_schema(target);
  cols.insert(cols.begin(), {"parameter", "value"});
  units.insert(units.begin(), {"-", "-"});
  ResultTable table(cols, units);

  std::vector<std::future<std::vector<Cell>>> jobs;
  jobs.reserve(scenarios.size());
  for (const auto& sc : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&sc, target] { return sweep_row(sc, target); }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto cells = jobs[i].get();
    std::vector<Cell> row{path, values[i]};
    row.insert(row.end(), cells.begin(), cells.end());
    table.add_row(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// output

/// Output directory precedence: explicit flag, then CONTISPINE_OUTPUT_DIR,
/// then the config file.
inline std::filesystem::path resolve_output_dir(const std::string& flag,
                                                const config::ScenarioConfig& c) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CONTISPINE_OUTPUT_DIR"); env && *env) return env;
  return c.output_dir;
}

inline void write_outputs(const std::filesystem::path& dir, const std::string& command,
                          const CommandOutput& out, const config::ScenarioConfig& c) {
  std::filesystem::create_directories(dir);
  config::json files = config::json::array();
  for (const auto& t : out.tables) {
    std::ofstream f(dir / t.file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / t.file).string());
    f << t.table.to_csv();
    files.push_back(t.file);
  }
  if (c.manifest) {
    config::json manifest{{"tool", "contispine"},
                          {"version", CONTISPINE_VERSION},
                          {"command", command},
                          {"schema_version", config::kSchemaVersion},
                          {"config_hash", config::content_hash(c.document)},
                          {"files", files},
                          {"config", c.document}};
    std::ofstream f(dir / "run_manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
  }
}

}  // namespace contispine::cli
