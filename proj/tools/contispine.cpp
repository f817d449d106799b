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

// Command-line front end. Exit codes: 0 success, 1 model or simulation
// failure, 2 configuration or usage error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "contispine/contispine.hpp"

namespace {

namespace cs = contispine;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON configuration file");
  sub->add_option("--set", c.sets, "Override a value, e.g. --set plant.mu_theta=0.2")
      ->allow_extra_args(false);
  sub->add_option("-o,--out", c.out, "Output directory");
}

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw cs::ConfigError("--set expects key=value, got '" + s + "'");
    }
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

cs::config::json document_for(const Common& c) {
  auto doc = c.config.empty() ? cs::config::default_document()
                              : cs::config::resolve(cs::config::load_file(c.config));
  for (const auto& [k, v] : parse_sets(c.sets)) cs::config::apply_override(doc, k, v);
  return doc;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuum spine exoskeleton models"};
  app.set_version_flag("--version", std::string(CONTISPINE_VERSION));
  app.require_subcommand(1);

  Common common;
  auto* design = app.add_subcommand("design", "Range-of-motion sweep and requirement check");
  auto* statics = app.add_subcommand("statics", "Tendon force propagation along the chain");
  auto* biomech = app.add_subcommand("biomech", "Lumbar loads with and without assistance");
  auto* simulate = app.add_subcommand("simulate", "Closed- or open-loop stoop simulation");
  auto* steer = app.add_subcommand("steer", "Retraction-to-bend calibration and map");
  auto* sweep = app.add_subcommand("sweep", "Run one command over a list of parameter values");
  for (auto* s : {design, statics, biomech, simulate, steer, sweep}) add_common(s, common);

  std::optional<double> cable_force;
  statics->add_option("--cable-force", cable_force, "Cable tension in N");

  bool open_loop = false;
  bool closed_loop = false;
  std::string reference;
  std::optional<int> cycles;
  auto* ol = simulate->add_flag("--open-loop", open_loop, "Current command without force feedback");
  auto* cl = simulate->add_flag("--closed-loop", closed_loop, "Cascaded force control");
  ol->excludes(cl);
  simulate->add_option("--reference", reference, "gravity or impedance");
  simulate->add_option("--cycles", cycles, "Number of stoop cycles");

  std::string param;
  std::string values;
  std::string target;
  sweep->add_option("--param", param, "Dotted config path")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--target", target, "design, statics, biomech or simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cable_force) common.sets.push_back("statics.cable_force=" + std::to_string(*cable_force));
    if (open_loop) common.sets.emplace_back("simulation.controller=\"open_loop\"");
    if (closed_loop) common.sets.emplace_back("simulation.controller=\"closed_loop\"");
    if (!reference.empty()) common.sets.push_back("simulation.reference=\"" + reference + "\"");
    if (cycles) common.sets.push_back("simulation.cycles=" + std::to_string(*cycles));

    const auto doc = document_for(common);
    const auto scenario = cs::config::build(doc);
    const auto dir = cs::cli::resolve_output_dir(common.out, scenario);

    cs::cli::CommandOutput out;
    std::string name;
    if (*design) {
      name = "design";
      out = cs::cli::cmd_design(scenario);
    } else if (*statics) {
      name = "statics";
      out = cs::cli::cmd_statics(scenario);
    } else if (*biomech) {
      name = "biomech";
      out = cs::cli::cmd_biomech(scenario);
    } else if (*simulate) {
      name = "simulate";
      out = cs::cli::cmd_simulate(scenario);
    } else if (*steer) {
      name = "steer";
      out = cs::cli::cmd_steer(scenario);
    } else {
      name = "sweep";
      const auto t = target.empty() ? cs::cli::infer_target(param) : cs::cli::parse_target(target);
      out.tables.push_back(
          {"sweep.csv", cs::cli::cmd_sweep(doc, param, split_values(values), t)});
    }
    cs::cli::write_outputs(dir, name, out, scenario);
    for (const auto& t : out.tables) std::cout << (dir / t.file).string() << '\n';
    return 0;
  } catch (const cs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const cs::SimulationError& e) {
    std::cerr << "simulation failed at sample " << e.sample() << ": " << e.what() << '\n';
    return 1;
  } catch (const cs::DomainError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
