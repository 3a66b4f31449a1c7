"""
Plane curves X = {f = 0} ⊂ P² viewed as branched covers of the base P¹.

The base coordinates are [ζ_a : ζ_b] and the fiber coordinate is ζ_c
(default a, b, c = 0, 1, 2). The base is covered by the charts
[1 : t] with |t| ≤ R and [s : 1] with |s| ≤ 1/R; the split radius R is
chosen away from the moduli of the branch points.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional

import numpy as np
from sympy import Poly, Symbol, gcd_list, resultant, sqf_list, sqf_part
from sympy import N as numeric
from sympy.polys.rings import PolyElement

from app.core.config import settings
from app.core.errors import FiberVariableDegenerateError, RepeatedFactorError
from app.core.logger import get_logger
from app.services.algebra.numeric import CompiledPoly
from app.services.algebra.operations import family_support, homogeneity
from app.services.algebra.universe import Universe, get_universe

logger = get_logger(__name__)

SPLIT_CANDIDATES = (1.0, 1.25, 0.8, 1.5, 2.0 / 3.0, 1.75, 4.0 / 7.0, 2.0, 0.5)
SINGULAR_TOLERANCE = 1e-6


# ------------------------------------------------------------- root finding


def horner(
    coeffs: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Σ_k c_k x^k for coefficient batches (..., m+1) at points (..., r)."""
    value = np.zeros(np.broadcast_shapes(coeffs.shape[:-1] + (1,), x.shape), dtype=complex)
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        value = value * x + coeffs[..., k, None]
    return value


def polynomial_roots(
    coeffs: np.ndarray,
) -> np.ndarray:
    """
    Roots of Σ_k c_k x^k for a batch of coefficient rows (..., m+1) through
    companion-matrix eigenvalues. The leading coefficient must not vanish.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    m = coeffs.shape[-1] - 1
    batch = coeffs.shape[:-1]
    if m == 0:
        return np.zeros(batch + (0,), dtype=complex)
    monic = coeffs[..., :-1] / coeffs[..., -1:]
    companion = np.zeros(batch + (m, m), dtype=complex)
    companion[..., 1:, :-1] = np.eye(m - 1)
    companion[..., :, -1] = -monic
    return np.linalg.eigvals(companion)


def newton_polish(
    coeffs: np.ndarray,
    roots: np.ndarray,
    tolerance: float = settings.NEWTON_TOLERANCE,
    max_iter: int = settings.NEWTON_MAX_ITER,
) -> np.ndarray:
    """Newton iterations on every root of every row until the relative step is below tolerance."""
    m = coeffs.shape[-1] - 1
    if m == 0:
        return roots
    dcoeffs = coeffs[..., 1:] * np.arange(1, m + 1)
    x = np.array(roots, dtype=complex)
    for _ in range(max_iter):
        p = horner(coeffs, x)
        dp = horner(dcoeffs, x)
        ok = np.abs(dp) > 0
        step = np.where(ok, p / np.where(ok, dp, 1.0), 0.0)
        step = np.where(np.isfinite(step), step, 0.0)
        x = x - step
        if np.all(np.abs(step) <= tolerance * np.maximum(1.0, np.abs(x))):
            break
    return x


def projective_normalize(
    zeta: np.ndarray,
) -> np.ndarray:
    """Divide each point (..., N+1) by its first coordinate of largest modulus."""
    zeta = np.asarray(zeta, dtype=complex)
    idx = np.argmax(np.abs(zeta), axis=-1)
    pivot = np.take_along_axis(zeta, idx[..., None], axis=-1)
    return zeta / pivot


# ------------------------------------------------------------------ curves


@dataclass(frozen=True, eq=False)
class PlaneCurve:
    universe: Universe
    f: PolyElement
    degree: int
    fiber_variable: int
    base_variables: tuple[int, int]
    sheets: int
    branch_points: dict[int, np.ndarray]
    singular_points: tuple[np.ndarray, ...]
    split_radius: float
    tensor: np.ndarray = field(repr=False)
    label: str = ""

    @property
    def smooth(self) -> bool:
        return not self.singular_points

    @cached_property
    def _compiled(
        self,
    ) -> tuple[CompiledPoly, tuple[CompiledPoly, ...]]:
        u = self.universe
        partials = tuple(CompiledPoly(self.f.diff(u.gen("zeta", j))) for j in range(3))
        return CompiledPoly(self.f), partials

    @cached_property
    def coefficient_norm(self) -> float:
        return float(np.abs(self.tensor).sum())

    def evaluate(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        return self._compiled[0](self.universe.values(zeta=zeta))

    def gradient(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        """(∂f/∂ζ0, ∂f/∂ζ1, ∂f/∂ζ2) stacked on the last axis."""
        values = self.universe.values(zeta=zeta)
        return np.stack([p(values) for p in self._compiled[1]], axis=-1)

    def chart_radius(
        self,
        chart: int,
    ) -> float:
        return self.split_radius if chart == 0 else 1.0 / self.split_radius

    @cached_property
    def _chart_matrices(
        self,
    ) -> tuple[np.ndarray, np.ndarray]:
        # tensor axes: exponents of (ζ_a, ζ_b, ζ_c)
        return self.tensor.sum(axis=0), self.tensor.sum(axis=1)

    def fiber_coefficients(
        self,
        chart: int,
        base: np.ndarray,
    ) -> np.ndarray:
        """
        Coefficients of x ↦ f at the base point ([1 : t] for chart 0,
        [s : 1] for chart 1), shape (..., sheets+1), lowest power first.
        """
        base = np.asarray(base, dtype=complex)
        matrix = self._chart_matrices[chart]
        powers = base[..., None] ** np.arange(matrix.shape[0])
        return (powers @ matrix)[..., : self.sheets + 1]

    def representative(
        self,
        chart: int,
        base: np.ndarray,
        x: np.ndarray,
    ) -> np.ndarray:
        """Homogeneous points (..., 3) over the base point with fiber coordinate x."""
        base = np.asarray(base, dtype=complex)
        x = np.asarray(x, dtype=complex)
        shape = np.broadcast_shapes(base.shape, x.shape)
        zeta = np.zeros(shape + (3,), dtype=complex)
        a, b = self.base_variables
        if chart == 0:
            zeta[..., a] = 1.0
            zeta[..., b] = base
        else:
            zeta[..., a] = base
            zeta[..., b] = 1.0
        zeta[..., self.fiber_variable] = x
        return zeta

    def base_of(
        self,
        zeta: np.ndarray,
        chart: int,
    ) -> np.ndarray:
        """Chart coordinate of the base point of ζ."""
        zeta = np.asarray(zeta, dtype=complex)
        a, b = self.base_variables
        return zeta[..., b] / zeta[..., a] if chart == 0 else zeta[..., a] / zeta[..., b]

    def to_dict(
        self,
    ) -> dict[str, Any]:
        return {
            "label": self.label,
            "polynomial": str(self.f.as_expr()),
            "degree": self.degree,
            "fiber_variable": self.fiber_variable,
            "sheets": self.sheets,
            "smooth": self.smooth,
            "singular_points": [[[p.real, p.imag] for p in pt] for pt in self.singular_points],
            "branch_points": {
                str(chart): [[b.real, b.imag] for b in pts] for chart, pts in self.branch_points.items()
            },
            "split_radius": self.split_radius,
        }


# ------------------------------------------------------------ construction


def _symbols() -> list[Symbol]:
    return [Symbol(f"zeta{j}") for j in range(3)]


def _check_squarefree(
    expr,
    symbols: list[Symbol],
) -> None:
    _, factors = sqf_list(expr, *symbols)
    repeated = [str(g) for g, k in factors if k > 1]
    if repeated:
        raise RepeatedFactorError(", ".join(repeated))


def _fiber_degenerate(
    expr,
    x: Symbol,
) -> bool:
    poly = Poly(expr, x)
    if poly.degree() < 1:
        return True
    common = gcd_list(poly.all_coeffs())
    return bool(common.free_symbols)


def _complex_coeffs(
    expr,
    var: Symbol,
) -> np.ndarray:
    """Coefficients of a univariate expression, highest power first."""
    poly = Poly(expr, var)
    return np.array([complex(numeric(c)) for c in poly.all_coeffs()], dtype=complex)


def _branch_points(
    expr,
    symbols: list[Symbol],
    base: tuple[int, int],
    fiber: int,
) -> dict[int, np.ndarray]:
    """Base points where f and ∂f/∂ζ_c have a common root or the fiber degree drops."""
    x = symbols[fiber]
    ya, yb = symbols[base[0]], symbols[base[1]]
    lead = Poly(expr, x).LC()
    res = resultant(expr, expr.diff(x), x)
    disc = sqf_part((res * lead).expand())
    out: dict[int, np.ndarray] = {}
    for chart, (fixed, free) in enumerate(((ya, yb), (yb, ya))):
        local = disc.subs(fixed, 1)
        if not local.free_symbols:
            out[chart] = np.zeros(0, dtype=complex)
            continue
        coeffs = _complex_coeffs(local, free)
        out[chart] = np.roots(coeffs).astype(complex) if len(coeffs) > 1 else np.zeros(0, dtype=complex)
    return out


def _split_radius(
    branch_points: dict[int, np.ndarray],
) -> float:
    moduli = [abs(t) for t in branch_points[0] if abs(t) > 0]
    moduli += [1.0 / abs(s) for s in branch_points[1] if abs(s) > 0]
    if not moduli:
        return SPLIT_CANDIDATES[0]
    logs = np.log(np.asarray(moduli))

    def margin(radius: float) -> float:
        return float(np.min(np.abs(logs - np.log(radius))))

    return max(SPLIT_CANDIDATES, key=margin)


def _singular_points(
    curve_stub: PlaneCurve,
    expr,
    symbols: list[Symbol],
) -> tuple[np.ndarray, ...]:
    """Points of X over the discriminant (and the fiber vertex) where ∇f vanishes."""
    c = curve_stub.fiber_variable
    candidates = []
    for chart, bases in curve_stub.branch_points.items():
        for t in bases:
            coeffs = curve_stub.fiber_coefficients(chart, np.array([t]))[0]
            nonzero = np.nonzero(np.abs(coeffs) > 1e-12 * max(np.abs(coeffs).max(), 1e-300))[0]
            if len(nonzero) == 0 or nonzero.max() == 0:
                continue
            roots = np.roots(coeffs[: nonzero.max() + 1][::-1])
            for x in roots:
                candidates.append(curve_stub.representative(chart, np.array(t), np.array(x)))
    vertex = np.zeros(3, dtype=complex)
    vertex[c] = 1.0
    candidates.append(vertex)

    scale = curve_stub.coefficient_norm
    found: list[np.ndarray] = []
    for zeta in candidates:
        unit = zeta / np.linalg.norm(zeta)
        value = abs(curve_stub.evaluate(unit))
        grad = np.abs(curve_stub.gradient(unit)).max()
        if value <= SINGULAR_TOLERANCE * scale and grad <= SINGULAR_TOLERANCE * scale:
            point = projective_normalize(zeta)
            if not any(np.allclose(point, q, atol=1e-6) for q in found):
                found.append(point)
    return tuple(found)


def plane_curve_new(
    f: PolyElement,
    fiber_variable: Optional[int] = None,
    label: str = "",
) -> PlaneCurve:
    """
    Validate a plane curve and compute its branched-cover data.

    Args:
        f: Homogeneous polynomial in ζ0, ζ1, ζ2 (universe N=2)
        fiber_variable: Fiber coordinate; None tries ζ2, then ζ1, then ζ0
        label: Name used in reports

    Raises:
        RepeatedFactorError: f has a repeated factor
        FiberVariableDegenerateError: ∂f/∂ζ_c vanishes on a component of X
    """
    universe = get_universe(2)
    if f.ring is not universe.ring:
        raise ValueError("plane curves live in the N=2 universe")
    if not f or family_support(f, universe) != {"zeta"}:
        raise ValueError("f must be a nonzero polynomial in ζ0, ζ1, ζ2 only")
    degree = homogeneity(f, "zeta", universe)
    if not isinstance(degree, int) or degree < 1:
        raise ValueError("f must be homogeneous of degree ≥ 1")

    symbols = _symbols()
    expr = f.as_expr()
    _check_squarefree(expr, symbols)

    choices = (fiber_variable,) if fiber_variable is not None else (2, 1, 0)
    chosen = None
    for c in choices:
        if not _fiber_degenerate(expr, symbols[c]):
            chosen = c
            break
    if chosen is None:
        raise FiberVariableDegenerateError(f"tried ζ{', ζ'.join(map(str, choices))}")
    if fiber_variable is None and chosen != 2:
        logger.warning(f"Fiber variable fallback | chosen=zeta{chosen}")

    base = tuple(j for j in range(3) if j != chosen)
    tensor = np.zeros((degree + 1,) * 3, dtype=complex)
    zeta = universe.family_slices["zeta"]
    for monom, coeff in f.items():
        e = monom[zeta.start : zeta.stop]
        tensor[e[base[0]], e[base[1]], e[chosen]] += complex(float(coeff.x), float(coeff.y))
    sheets = int(Poly(expr, symbols[chosen]).degree())

    branch = _branch_points(expr, symbols, base, chosen)
    stub = PlaneCurve(
        universe=universe,
        f=f,
        degree=degree,
        fiber_variable=chosen,
        base_variables=base,
        sheets=sheets,
        branch_points=branch,
        singular_points=(),
        split_radius=_split_radius(branch),
        tensor=tensor,
        label=label,
    )
    singular = _singular_points(stub, expr, symbols)
    radius = stub.split_radius
    curve = PlaneCurve(
        universe=universe,
        f=f,
        degree=degree,
        fiber_variable=chosen,
        base_variables=base,
        sheets=sheets,
        branch_points={
            0: branch[0][np.abs(branch[0]) < radius],
            1: branch[1][np.abs(branch[1]) < 1.0 / radius],
        },
        singular_points=singular,
        split_radius=radius,
        tensor=tensor,
        label=label,
    )
    logger.info(
        f"Plane curve ready | label={label or expr} | degree={degree} | sheets={sheets} | "
        f"smooth={curve.smooth} | split_radius={radius} | "
        f"branch_points={len(curve.branch_points[0]) + len(curve.branch_points[1])}"
    )
    return curve


def fermat_curve() -> PlaneCurve:
    """ζ0³ + ζ1³ + ζ2³ = 0."""
    u = get_universe(2)
    z0, z1, z2 = (u.gen("zeta", j) for j in range(3))
    return plane_curve_new(z0**3 + z1**3 + z2**3, label="fermat")
