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

#ifndef HHE_COMMON_HPP_
#define HHE_COMMON_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hhe {

using Vec3 = Eigen::Vector3d;

// Scenario errors map to process exit code 2, numerical errors to 3.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ScenarioError : Error {
  explicit ScenarioError(const std::string& what) : Error(what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(what) {}
};

namespace logging {

enum class Level { error = 0, warn = 1, info = 2, debug = 3, trace = 4 };

Level& level();
Level parse_level(const std::string& name);
bool enabled(Level lvl);
void write(Level lvl, const std::string& message);

}  // namespace logging

}  // namespace hhe

#endif  // HHE_COMMON_HPP_
