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

"""Smoke tests for the Python bindings: a tiny crack scenario end to end,
mesh helpers, error mapping, and the CLI driver."""

import json

import pytest

import hhe


def demo_scenario():
    """Two stacked hexes, the lower one cracked; pull the top up by 0.25."""
    return {
        "mesh": {"type": "uniform", "divisions": [1, 1, 2], "length": 1.0},
        "actions": [
            {
                "action": "insert",
                "surface": {
                    "type": "plane",
                    "point": [0.0, 0.0, 0.4],
                    "normal": [0.0, 0.0, 1.0],
                },
            },
            {
                "action": "bc",
                "where": {"type": "plane", "axis": "z", "value": 0.0},
                "set": {"u1": 0.0, "u2": 0.0, "u3": 0.0},
            },
            {
                "action": "bc",
                "where": {"type": "plane", "axis": "z", "value": 1.0},
                "set": {"u1": 0.0, "u2": 0.0, "u3": 0.25},
            },
            {"action": "solve"},
        ],
    }


def test_run_dict_scenario():
    res = hhe.run(demo_scenario())
    assert res["pieces"] == 2
    assert res["enrichedElements"] == 1
    assert res["maxStrainComponent"] < 1e-10
    moves = sorted(s["meanDisplacement"][2] for s in res["pieceStats"])
    assert moves[0] == pytest.approx(0.0, abs=1e-12)
    assert moves[1] == pytest.approx(0.25, abs=1e-12)


def test_run_json_string_matches_dict():
    as_dict = hhe.run(demo_scenario())
    as_str = hhe.run(json.dumps(demo_scenario()))
    assert as_dict == as_str


def test_output_files(tmp_path):
    scenario = demo_scenario()
    scenario["actions"].append({"action": "export", "what": ["mesh", "solution"]})
    out = tmp_path / "out"
    hhe.run(scenario, out_dir=str(out))
    assert (out / "result.json").is_file()
    assert (out / "report.json").is_file()
    assert (out / "mesh.vtk").read_text().startswith("# vtk DataFile")
    assert (out / "solution.vtk").is_file()
    on_disk = json.loads((out / "result.json").read_text())
    assert on_disk["pieces"] == 2


def test_grid_helpers():
    uniform = hhe.uniform_grid(2, 3, 4, 2.0)
    assert len(uniform["elements"]) == 24
    assert len(uniform["nodes"]) == 3 * 4 * 5
    assert uniform["boundingLength"] == pytest.approx(2.0)

    mixed = hhe.mixed_grid(1.0)
    kinds = {e["kind"] for e in mixed["elements"]}
    assert kinds == {"hex8", "tet4", "wedge6", "pyramid5"}


def test_scenario_error_mapping():
    with pytest.raises(hhe.ScenarioError, match="unknown mesh type"):
        hhe.run({"mesh": {"type": "bogus"}, "actions": [{"action": "solve"}]})
    with pytest.raises(hhe.ScenarioError, match="parse error at byte"):
        hhe.run("{not json")


def test_numerical_error_mapping():
    scenario = demo_scenario()
    scenario["actions"] = [scenario["actions"][0], {"action": "solve"}]
    with pytest.raises(hhe.NumericalError, match="singular system"):
        hhe.run(scenario)


def test_threads_and_policy_agree():
    serial = hhe.run(demo_scenario(), threads=1)
    threaded = hhe.run(demo_scenario(), threads=4)
    relaxed = hhe.run(demo_scenario(), policy="allPairs")
    assert serial == threaded
    assert relaxed["pieces"] == serial["pieces"]
    with pytest.raises(hhe.ScenarioError, match="unknown compatibility policy"):
        hhe.run(demo_scenario(), policy="sometimes")


def test_cli_exit_codes(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(demo_scenario()))
    out = tmp_path / "out"
    assert hhe.cli_main(["run", str(path), "--out", str(out)]) == 0
    assert (out / "result.json").is_file()
    assert hhe.cli_main(["run", str(tmp_path / "missing.json"),
                         "--out", str(out)]) == 2
    assert hhe.cli_main(["run", str(path), "--out", str(out),
                         "--threads", "0"]) == 2
