# Copyright 2026 The HHE Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Hierarchical Heaviside enrichment kernel for cracked elastic solids."""

import json as _json

from ._core import (
    NumericalError,
    ScenarioError,
    cli_main,
    mixed_grid_json,
    run_scenario,
    run_scenario_file,
    uniform_grid_json,
)

__all__ = [
    "NumericalError",
    "ScenarioError",
    "cli_main",
    "mixed_grid",
    "mixed_grid_json",
    "run",
    "run_file",
    "run_scenario",
    "run_scenario_file",
    "uniform_grid",
    "uniform_grid_json",
]


def run(scenario, out_dir="", threads=1, policy="oneToOneOnly"):
    """Run a scenario given as a dict or JSON string; returns the result dict."""
    if not isinstance(scenario, str):
        scenario = _json.dumps(scenario)
    return _json.loads(run_scenario(scenario, out_dir, threads, policy))


def run_file(path, out_dir="", threads=1, policy="oneToOneOnly"):
    """Run a scenario file; returns the result dict."""
    return _json.loads(run_scenario_file(path, out_dir, threads, policy))


def uniform_grid(nx, ny, nz, length):
    """Uniform hexahedral grid as a mesh dict."""
    return _json.loads(uniform_grid_json(nx, ny, nz, length))


def mixed_grid(length):
    """Mixed-kind benchmark grid as a mesh dict."""
    return _json.loads(mixed_grid_json(length))
