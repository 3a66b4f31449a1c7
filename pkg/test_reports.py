"""
Report writers, convergence fits, the conventions ledger and scenario
configuration.

Run with:
    pytest test_reports.py
"""

import json
import logging
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent))

from app.core.errors import TwistBelowThresholdError
from app.core.logger import get_logger, log_error
from app.models.scenario import GridSpec, Report, ScenarioConfig
from app.services.operators import SignRecord, load_ledger, record_sign, stored_signs
from app.services.scenarios import scenario_context
from app.utils.reports import emit_convergence, to_jsonable, write_csv, write_json


def test_convergence_fit_writes_its_table(tmp_path):
    path = tmp_path / "solve_koppelman.csv"
    fit = emit_convergence([(16, 0.1), (32, 0.05), (64, 0.025)], path)
    assert fit.slope == pytest.approx(1.0)
    assert fit.converged and not fit.exact
    assert fit.flag is None
    lines = path.read_text().splitlines()
    assert lines[0] == "grid,residual"
    assert lines[1].startswith("16,0.1")


def test_flat_series_is_flagged():
    fit = emit_convergence([(16, 0.1), (32, 0.1), (64, 0.1)])
    assert not fit.converged
    assert fit.flag == "no convergence"


def test_residuals_at_the_floor_count_as_exact():
    fit = emit_convergence([(16, 1e-15), (32, 3e-16), (64, 0.0)])
    assert fit.exact
    assert fit.converged


def test_convergence_needs_three_levels():
    with pytest.raises(ValueError):
        emit_convergence([(16, 0.1), (32, 0.05)])


def test_json_report(tmp_path):
    report = Report(scenario="kernel")
    report.residuals["scaling"] = 1e-15
    report.data["values"] = np.array([1.0, 2.5])
    report.fail("closed_form residual too large")
    path = write_json(report, tmp_path / "nested" / "kernel.json")
    data = json.loads(path.read_text())
    assert data["scenario"] == "kernel"
    assert data["passed"] is False
    assert data["warnings"] == ["closed_form residual too large"]
    assert data["data"]["values"] == [1.0, 2.5]


def test_to_jsonable_handles_paths_and_arrays():
    assert to_jsonable({"path": Path("out/a.json"), "grid": np.arange(3)}) == {
        "path": "out/a.json",
        "grid": [0, 1, 2],
    }


def test_csv_cells(tmp_path):
    path = write_csv(["value", "error"], [[1 + 2j, 0.5]], tmp_path / "table.csv")
    assert path.read_text().splitlines() == ["value,error", "1+2j,0.5"]


def test_conventions_ledger_round_trip(tmp_path):
    path = tmp_path / "conventions.json"
    assert load_ledger(path).signs == {}
    assert stored_signs("curve", (1, 1), path=path) == (1, 1)

    record_sign("curve", SignRecord(kernel_sign=-1, projection_sign=1, residual=2e-4, grid="64x64"), path=path)
    assert stored_signs("curve", (1, 1), path=path) == (-1, 1)
    assert stored_signs("pn", (-1, -1), path=path) == (-1, -1)
    assert load_ledger(path).signs["curve"].grid == "64x64"


def test_sign_records_hold_signs_only():
    with pytest.raises(ValidationError):
        SignRecord(kernel_sign=0, projection_sign=1, residual=0.0)


def test_grid_spec():
    grid = GridSpec.square(32)
    assert grid.label == "32x32"
    with pytest.raises(ValidationError):
        GridSpec(nodes_radial=1)


def test_scenario_config_validation():
    config = ScenarioConfig(kind="solve", refinements=[16, 32, 64])
    assert config.tolerances.koppelman == 1e-3
    with pytest.raises(ValidationError):
        ScenarioConfig(kind="solve", refinements=[32, 16])
    with pytest.raises(ValidationError):
        ScenarioConfig(kind="integrate")
    with pytest.raises(ValidationError):
        ScenarioConfig(kind="kernel", unknown=1)


def test_engine_errors_are_logged_with_scenario_coordinates(caplog):
    logger = get_logger("app.services.scenarios.pipeline")
    config = ScenarioConfig(kind="kernel", twist=0)
    with caplog.at_level(logging.ERROR):
        log_error(logger, "Scenario failed", TwistBelowThresholdError("s=0"), scenario_context(config))
    record = caplog.records[-1]
    message = record.getMessage()
    assert message.startswith("Scenario failed | error=TwistBelowThresholdError: twist below threshold")
    assert message.endswith("| kind=kernel | curve=fermat | twist=0 | grid=64x64 | exit_code=2")
    assert record.exc_info is None


def test_unexpected_errors_keep_their_traceback(caplog):
    logger = get_logger("app.services.scenarios.pipeline")
    config = ScenarioConfig(kind="pn-solve", dimension=1, twist=-2, degree=1, weight="beta")
    with caplog.at_level(logging.ERROR):
        try:
            raise RuntimeError("quadrature blew up")
        except RuntimeError as e:
            log_error(logger, "Scenario failed", e, scenario_context(config, target=3))
    record = caplog.records[-1]
    assert "| kind=pn-solve | dimension=1 | twist=-2 | degree=1 | weight=beta | grid=64x64 | target=3" in (
        record.getMessage()
    )
    assert "exit_code" not in record.getMessage()
    assert record.exc_info is not None
