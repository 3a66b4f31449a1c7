"""
Command-line surface: exit codes, reports and configuration merging.

Run with:
    pytest test_cli.py
"""

import json
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

sys.path.insert(0, str(Path(__file__).parent))

from app.cli.main import build_config, cli


@pytest.fixture
def runner():
    return CliRunner()


def test_verify_identities_passes(runner, tmp_path):
    out = tmp_path / "verify.json"
    result = runner.invoke(cli, ["verify-identities", "-N", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["identities"]["N1:B_nabla_eta"] is True


def test_parse_error_is_an_input_error(runner, tmp_path):
    out = tmp_path / "hefer.json"
    result = runner.invoke(cli, ["hefer", "-N", "1", "--poly", "z0 +", "--out", str(out)])
    assert result.exit_code == 2
    report = json.loads(out.read_text())
    assert report["data"]["error"]["type"] == "ParseError"


def test_twist_below_threshold_is_reported(runner, tmp_path):
    result = runner.invoke(cli, ["kernel", "--curve", "fermat", "--twist", "0", "--out", str(tmp_path / "k.json")])
    assert result.exit_code == 2
    assert "s ≥ κ₀ − N" in result.output


def test_fermat_kernel_scenario(runner, tmp_path):
    out = tmp_path / "kernel.json"
    result = runner.invoke(cli, ["kernel", "--curve", "fermat", "--twist", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["residuals"]["closed_form"] <= 1e-12
    assert report["residuals"]["scaling"] <= 1e-12
    assert report["identities"] == {"plane_relation": True, "reduction": True}


def test_scenario_file_of_another_kind_is_a_usage_error(runner, tmp_path):
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps({"kind": "solve"}))
    result = runner.invoke(cli, ["kernel", "--config", str(config)])
    assert result.exit_code == 2
    assert "not 'kernel'" in result.output


def test_invalid_scenario_file(runner, tmp_path):
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps({"kind": "kernel", "grid": {"nodes_radial": 1}}))
    result = runner.invoke(cli, ["kernel", "--config", str(config)])
    assert result.exit_code == 2
    assert "invalid kernel scenario" in result.output


def test_flags_override_the_scenario_file(tmp_path):
    config = tmp_path / "scenario.json"
    config.write_text(json.dumps({"kind": "solve", "curve": "cusp", "twist": 2, "output": "a.json"}))
    merged = build_config("solve", config, grid=32, tol=1e-4, out=tmp_path / "b.json", curve="fermat", twist=None)
    assert merged.curve == "fermat"
    assert merged.twist == 2
    assert merged.grid.label == "32x32"
    assert merged.refinements == [8, 16, 32]
    assert merged.tolerances.koppelman == 1e-4
    assert merged.output == str(tmp_path / "b.json")
