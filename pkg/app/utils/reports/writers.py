"""
JSON reports and CSV tables under the output directory.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from pydantic_core import to_jsonable_python

from app.core.config import settings
from app.core.logger import get_logger
from app.utils.numerics import convergence_slope

logger = get_logger(__name__)

EXACT_FLOOR = 1e-13


def _fallback(
    value: Any,
) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _fallback(value.item())
    if isinstance(value, Path):
        return str(value)
    return str(value)


def to_jsonable(
    value: Any,
) -> Any:
    """Plain JSON data from reports, numpy arrays and complex numbers."""
    if isinstance(value, BaseModel):
        value = value.model_dump()
    return to_jsonable_python(value, fallback=_fallback)


def output_path(
    name: str,
    out: Optional[Path] = None,
) -> Path:
    """``out`` when given, otherwise ``OUTPUT_DIR/name``; parents are created."""
    path = Path(out) if out is not None else settings.OUTPUT_DIR / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(
    data: Any,
    path: Path,
) -> Path:
    """
    Write a report as sorted, indented JSON.

    Args:
        data: Report model or plain data
        path: Target file

    Returns:
        The written path
    """
    path = output_path(path.name, path)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True))
    logger.info(f"Report written | path={path}")
    return path


def write_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    path: Path,
) -> Path:
    path = output_path(path.name, path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.info(f"Table written | path={path}")
    return path


def _cell(
    value: Any,
) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return value


@dataclass(frozen=True)
class ConvergenceFit:
    grids: list[int]
    residuals: list[float]
    slope: float
    converged: bool
    exact: bool
    path: Optional[Path] = None

    @property
    def flag(self) -> Optional[str]:
        return None if self.converged else "no convergence"


def emit_convergence(
    series: Sequence[tuple[int, float]],
    path: Optional[Path] = None,
    min_slope: Optional[float] = None,
) -> ConvergenceFit:
    """
    Fit the observed order of a refinement series and write it as CSV.

    Residuals at the floating-point floor everywhere count as exact. A slope
    below ``NO_CONVERGENCE_SLOPE`` is flagged "no convergence".

    Args:
        series: (nodes per direction, residual) pairs, coarse to fine
        path: CSV target (optional)
        min_slope: Flag threshold

    Raises:
        ValueError: fewer than three refinement levels
    """
    if len(series) < 3:
        raise ValueError(f"a convergence fit needs at least 3 refinement levels, got {len(series)}")
    min_slope = settings.NO_CONVERGENCE_SLOPE if min_slope is None else min_slope
    grids = [int(n) for n, _ in series]
    residuals = [float(r) for _, r in series]
    exact = max(residuals) <= EXACT_FLOOR
    slope = convergence_slope(grids, residuals) if not exact else float("inf")
    fit = ConvergenceFit(
        grids=grids,
        residuals=residuals,
        slope=slope,
        converged=exact or slope >= min_slope,
        exact=exact,
        path=None if path is None else write_csv(["grid", "residual"], zip(grids, residuals), path),
    )
    logger.info(f"Convergence fitted | grids={grids} | slope={slope:.3f} | flag={fit.flag}")
    return fit
