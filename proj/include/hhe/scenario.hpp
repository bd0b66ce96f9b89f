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

#ifndef HHE_SCENARIO_HPP_
#define HHE_SCENARIO_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhe/assembly.hpp"

namespace hhe {

struct ScenarioOptions {
  int threads = 1;
  CompatPolicy policy = CompatPolicy::oneToOneOnly;
};

struct PieceStat {
  int piece = 0;
  double volume = 0;
  Vec3 meanDisplacement = Vec3::Zero();
};

struct RunResult {
  bool solved = false;
  int pieces = 0;
  int totalDofs = 0;
  double maxStrainComponent = 0;
  std::vector<PieceStat> pieceStats;
  nlohmann::ordered_json result;  // contents of result.json
  nlohmann::ordered_json report;  // contents of report.json
};

// Parses a scenario file; parse failures carry the byte offset.
nlohmann::ordered_json load_scenario_file(const std::string& path);

// Executes the scenario's action list. Files are written into outDir
// (created when missing); an empty outDir skips all file output.
RunResult run_scenario(const nlohmann::ordered_json& scenario,
                       const std::string& outDir, const ScenarioOptions& opts);

void write_mesh_vtk(const Mesh& mesh, const std::string& path);

// Entry point behind the `hhe` binary; returns the process exit code
// (0 success, 2 scenario error, 3 numerical failure).
int cli_main(std::vector<std::string> args);

}  // namespace hhe

#endif  // HHE_SCENARIO_HPP_
