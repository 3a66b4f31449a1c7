"""
Command-line entry point.

    python -m app.cli.main solve --curve fermat --twist 1 --grid 64 --out out/solve.json

Exit codes: 0 when every tolerance holds, 1 on a tolerance or numerical
failure, 2 on invalid input.
"""

import json
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import ValidationError

from app.core.config import settings
from app.core.logger import get_logger, setup_logging
from app.models.scenario import GridSpec, Report, ScenarioConfig
from app.services.scenarios import run_scenario, verify_suite
from app.utils.reports import write_json

logger = get_logger(__name__)

INPUT_ERROR = 2

TOLERANCE_FIELDS = {
    "solve": "koppelman",
    "selftest": "koppelman",
    "extend": "extension",
    "pn-solve": "pn",
}


def common_options(
    command: Callable,
) -> Callable:
    """--grid, --tol, --out and --config, shared by every scenario command."""
    options = [
        click.option(
            "--grid",
            type=click.IntRange(min=4),
            default=None,
            help="Nodes per direction of the finest grid.",
        ),
        click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None),
        click.option(
            "--out",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="JSON report path.",
        ),
        click.option(
            "--config",
            "config_file",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            default=None,
            help="Scenario file (JSON); command-line flags override it.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(
    kind: str,
    config_file: Optional[Path],
    grid: Optional[int],
    tol: Optional[float],
    out: Optional[Path],
    **overrides: Any,
) -> ScenarioConfig:
    """
    Merge a scenario file with command-line flags and validate the result.

    Raises:
        click.UsageError: the scenario file names another kind
        ValidationError: the merged configuration is invalid
    """
    data: dict[str, Any] = json.loads(config_file.read_text()) if config_file else {}
    if data.setdefault("kind", kind) != kind:
        raise click.UsageError(f"scenario file is a {data['kind']!r} scenario, not {kind!r}")
    data.update({key: value for key, value in overrides.items() if value not in (None, ())})
    if grid is not None:
        data["grid"] = GridSpec.square(grid).model_dump()
        if kind in ("solve", "selftest"):
            data["refinements"] = sorted({max(4, grid // 4), max(4, grid // 2), grid})
    if tol is not None and kind in TOLERANCE_FIELDS:
        data.setdefault("tolerances", {})[TOLERANCE_FIELDS[kind]] = tol
    path = out or Path(data.get("output") or settings.OUTPUT_DIR / f"{kind}.json")
    data["output"] = str(path)
    return ScenarioConfig.model_validate(data)


def finish(
    ctx: click.Context,
    report: Report,
    code: int,
    path: Path,
) -> None:
    write_json(report, path)
    status = "PASS" if code == 0 else "FAIL"
    click.echo(f"{report.scenario}: {status} (exit {code}) -> {path}")
    for name, value in report.residuals.items():
        click.echo(f"  {name}: {value:.3e}" if isinstance(value, float) else f"  {name}: {value}")
    for warning in report.warnings:
        click.echo(f"  ! {warning}", err=True)
    ctx.exit(code)


def execute(
    ctx: click.Context,
    kind: str,
    **options: Any,
) -> None:
    try:
        config = build_config(kind, **options)
    except (ValidationError, json.JSONDecodeError) as e:
        click.echo(f"invalid {kind} scenario: {e}", err=True)
        ctx.exit(INPUT_ERROR)
    report, code = run_scenario(config)
    finish(ctx, report, code, Path(config.output))


@click.group()
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL.")
def cli(
    log_level: Optional[str],
) -> None:
    """Weighted Koppelman formulas on projective space and on plane curves."""
    setup_logging(level=(log_level or settings.LOG_LEVEL).upper())


@cli.command("verify-identities")
@common_options
@click.option("--dimension", "-N", type=click.IntRange(min=1), default=None)
@click.option("--poly", "polynomials", multiple=True, help="Polynomial whose Hefer form is checked.")
@click.option("--suite", is_flag=True, help="Run the full regression suite in N = 1, 2, 3.")
@click.pass_context
def verify_identities(
    ctx: click.Context,
    suite: bool,
    **options: Any,
) -> None:
    """Exact symbolic identities: weights, γ, τ*, Hefer forms."""
    if not suite:
        execute(ctx, "verify-identities", **options)
        return
    report = verify_suite()
    path = options["out"] or settings.OUTPUT_DIR / "verify-suite.json"
    finish(ctx, report, 0 if report.passed else 1, path)


@cli.command("hefer")
@common_options
@click.option("--dimension", "-N", type=click.IntRange(min=1), default=None)
@click.option("--poly", "polynomials", multiple=True)
@click.option("--twist", "-s", type=int, default=None)
@click.option("--degree", "-q", type=click.IntRange(min=0), default=None)
@click.option("--curve", default=None, help="'cusp' also selects the valid stored cusp variant.")
@click.pass_context
def hefer(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Hefer forms, Koszul-Hefer relations and the degree ledger."""
    execute(ctx, "hefer", **options)


@cli.command("kernel")
@common_options
@click.option("--curve", default=None, help="fermat, cusp, or a polynomial in z0, z1, z2.")
@click.option("--twist", "-s", type=int, default=None)
@click.pass_context
def kernel(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Assemble a curve kernel and run its exact and closed-form checks."""
    execute(ctx, "kernel", **options)


@cli.command("solve")
@common_options
@click.option("--curve", default=None)
@click.option("--twist", "-s", type=int, default=None)
@click.pass_context
def solve(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Solve ∂̄u = ∂̄ψ on a smooth plane curve with convergence study."""
    execute(ctx, "solve", **options)


@cli.command("extend")
@common_options
@click.option("--curve", default=None)
@click.option("--section", default=None, help="Holomorphic section given by a homogeneous polynomial.")
@click.option("--twist", "-s", type=int, default=None)
@click.pass_context
def extend(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Extend a holomorphic section on a curve to a homogeneous polynomial."""
    execute(ctx, "extend", **options)


@cli.command("pn-solve")
@common_options
@click.option("--dimension", "-N", type=click.IntRange(min=1), default=None)
@click.option("--twist", "-l", type=int, default=None, help="Twist ℓ of the data.")
@click.option("--degree", "-q", type=click.IntRange(min=0), default=None)
@click.option("--weight", type=click.Choice(["alpha", "beta"]), default=None)
@click.option("--manufactured", type=click.Choice(["smooth", "zero-moment", "unit-moment"]), default=None)
@click.pass_context
def pn_solve(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Koppelman operators on P^N for N = 1, 2."""
    execute(ctx, "pn-solve", **options)


@cli.command("selftest")
@common_options
@click.option("--curve", default=None)
@click.option("--twist", "-s", type=int, default=None)
@click.pass_context
def selftest(
    ctx: click.Context,
    **options: Any,
) -> None:
    """Calibrate the global signs of K and P and record them."""
    execute(ctx, "selftest", **options)


if __name__ == "__main__":
    cli()
