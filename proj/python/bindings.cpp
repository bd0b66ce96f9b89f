// Copyright 2026 The HHE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hhe/scenario.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "hierarchical Heaviside enrichment kernel for cracked solids";

  py::register_exception<hhe::ScenarioError>(m, "ScenarioError");
  py::register_exception<hhe::NumericalError>(m, "NumericalError");

  m.def(
      "run_scenario",
      [](const std::string& scenarioJson, const std::string& outDir,
         int threads, const std::string& policy) {
        const auto scenario = [&] {
          try {
            return nlohmann::ordered_json::parse(scenarioJson);
          } catch (const nlohmann::json::parse_error& e) {
            throw hhe::ScenarioError("scenario parse error at byte " +
                                     std::to_string(e.byte) + ": " + e.what());
          }
        }();
        hhe::ScenarioOptions opts;
        opts.threads = threads;
        opts.policy = hhe::policy_from_string(policy);
        return hhe::run_scenario(scenario, outDir, opts).result.dump();
      },
      py::arg("scenario_json"), py::arg("out_dir") = "", py::arg("threads") = 1,
      py::arg("policy") = "oneToOneOnly",
      "Run a scenario given as a JSON string; returns the result JSON string.");

  m.def(
      "run_scenario_file",
      [](const std::string& path, const std::string& outDir, int threads,
         const std::string& policy) {
        hhe::ScenarioOptions opts;
        opts.threads = threads;
        opts.policy = hhe::policy_from_string(policy);
        return hhe::run_scenario(hhe::load_scenario_file(path), outDir, opts)
            .result.dump();
      },
      py::arg("path"), py::arg("out_dir") = "", py::arg("threads") = 1,
      py::arg("policy") = "oneToOneOnly",
      "Run a scenario file; returns the result JSON string.");

  m.def("cli_main", &hhe::cli_main, py::arg("args"),
        "Invoke the command line driver; returns the exit code.");

  m.def(
      "uniform_grid_json",
      [](int nx, int ny, int nz, double length) {
        return hhe::mesh_to_json(hhe::generate_uniform_grid(nx, ny, nz, length));
      },
      py::arg("nx"), py::arg("ny"), py::arg("nz"), py::arg("length"),
      "Uniform hexahedral grid as mesh JSON.");

  m.def(
      "mixed_grid_json",
      [](double length) {
        return hhe::mesh_to_json(hhe::generate_mixed_grid(length));
      },
      py::arg("length"),
      "Mixed-kind benchmark grid (hexes, tets, wedges, pyramids) as mesh JSON.");
}
