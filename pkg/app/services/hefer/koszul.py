"""
Koszul data for complete intersections f_1 = … = f_p = 0 in P^N: degree
bookkeeping, the Koszul Hefer morphism, the minimal-norm section σ and the
degree ledger.

The Hefer morphism uses the normalization δ_{z−w} h = f(w) − f(z), so its
1-form components are the negatives of the scalar Hefer forms; with that
choice ∇_η H^0_k = H^0_{k−1} a_k(ζ) − a_1(z) H^1_k holds exactly.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.config import settings
from app.core.errors import PointOnVarietyError, UnsupportedRankError
from app.core.logger import get_logger
from app.services.algebra.numeric import CompiledPoly
from app.services.algebra.operations import move_family
from app.services.algebra.universe import Universe
from app.services.forms import FormExpr, nabla_eta
from app.services.hefer.scalar import HeferScalar, hefer_decompose
from app.services.hefer.substitution import tau_star
from app.services.weights import build_alpha

logger = get_logger(__name__)

Index = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class KoszulData:
    universe: Universe
    polys: tuple[PolyElement, ...]
    degrees: tuple[int, ...]
    hefers: tuple[HeferScalar, ...]
    minor_variables: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.universe.n

    @property
    def p(self) -> int:
        return len(self.polys)

    @property
    def kappa0(self) -> int:
        return sum(self.degrees)

    def kappa(
        self,
        s: int,
    ) -> int:
        """κ(s) = s + N − Σ d^j."""
        return s + self.n - self.kappa0

    def koszul_degree(
        self,
        index: Index,
    ) -> int:
        """d^J = Σ_{j∈J} d^j."""
        return sum(self.degrees[j] for j in index)

    def koszul_degrees(
        self,
        k: int,
    ) -> dict[Index, int]:
        return {J: self.koszul_degree(J) for J in combinations(range(self.p), k)}

    def regularity(
        self,
    ) -> int:
        """reg X = max_k (d_k − k) + 1 over the Koszul degrees."""
        best = 0
        for k in range(self.p + 1):
            for d in self.koszul_degrees(k).values():
                best = max(best, d - k)
        return best + 1

    def polys_in(
        self,
        family: str,
    ) -> tuple[PolyElement, ...]:
        if family == "zeta":
            return self.polys
        return tuple(move_family(f, self.universe, "zeta", family) for f in self.polys)

    @cached_property
    def _compiled(
        self,
    ) -> list[CompiledPoly]:
        return [CompiledPoly(f) for f in self.polys]

    def evaluate(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        """f_j(ζ) for points ζ of shape (..., N+1); returns (p, ...)."""
        values = self.universe.values(zeta=zeta)
        return np.stack([c(values) for c in self._compiled])


def koszul_data_new(
    polys: Sequence[PolyElement],
    universe: Universe,
    hefers: Optional[Sequence[HeferScalar]] = None,
    minor_variables: Optional[Sequence[int]] = None,
) -> KoszulData:
    """
    Build Koszul data, computing telescoping Hefer forms when none are given.

    Args:
        polys: Homogeneous f_1..f_p in the ζ family, p ≤ N
        universe: Variable universe
        hefers: Optional Hefer overrides, one per polynomial
        minor_variables: ζ indices of the Jacobian minor (default: the last p)
    """
    p = len(polys)
    if not 1 <= p <= universe.n:
        raise UnsupportedRankError(f"p={p} with N={universe.n}")
    if hefers is None:
        hefers = [hefer_decompose(f, universe) for f in polys]
    if len(hefers) != p:
        raise ValueError("one Hefer form per polynomial is required")
    if minor_variables is None:
        minor_variables = tuple(range(universe.n - p + 1, universe.n + 1))
    if len(minor_variables) != p:
        raise ValueError(f"Jacobian minor needs {p} variables, got {len(minor_variables)}")
    return KoszulData(
        universe=universe,
        polys=tuple(h.f for h in hefers),
        degrees=tuple(h.degree for h in hefers),
        hefers=tuple(hefers),
        minor_variables=tuple(minor_variables),
    )


# ------------------------------------------------------------- Koszul maps


def koszul_differential(
    data: KoszulData,
    index: Index,
    family: str = "zeta",
) -> dict[Index, PolyElement]:
    """a_k(e_J) = Σ_m (−1)^{m−1} f_{J_m} e_{J∖J_m} (m counted from 1)."""
    polys = data.polys_in(family)
    out: dict[Index, PolyElement] = {}
    for m, j in enumerate(index):
        rest = index[:m] + index[m + 1 :]
        out[rest] = polys[j] if m % 2 == 0 else -polys[j]
    return out


@dataclass(frozen=True, eq=False)
class KoszulHefer:
    data: KoszulData
    morphism_forms: tuple[FormExpr, ...]
    h0: dict[int, dict[Index, FormExpr]]
    h1: dict[int, dict[Index, dict[int, FormExpr]]]
    relations: dict[int, bool] = field(default_factory=dict)

    def component(
        self,
        k: int,
        index: Index,
    ) -> FormExpr:
        return self.h0[k][tuple(index)]


def _wedge_all(
    forms: Sequence[FormExpr],
    universe: Universe,
) -> FormExpr:
    out = FormExpr.scalar(universe, 1)
    for form in forms:
        out = out.wedge(form, max_dzeta=universe.n)
    return out


def koszul_hefer(
    data: KoszulData,
    max_rank: Optional[int] = None,
    check_relations: Sequence[int] = (1,),
) -> KoszulHefer:
    """
    Assemble H^0_k(e_J) = α^{κ₀−d^J} ∧ h_{J1}∧…∧h_{Jk} and
    H^1_k(e_J) = α^{κ₀−d^J} Σ_m (−1)^{m−1} h_{J∖J_m} ⊗ e_{J_m}.

    Args:
        data: Koszul data
        max_rank: Highest k assembled (default p)
        check_relations: Values of k at which the Hefer-morphism relation is verified

    Raises:
        UnsupportedRankError: max_rank beyond p
    """
    u = data.universe
    n = u.n
    max_rank = data.p if max_rank is None else max_rank
    if max_rank > data.p or max_rank < 0:
        raise UnsupportedRankError(f"requested k={max_rank} with p={data.p}")

    morphism = tuple(-tau_star(h) for h in data.hefers)
    kappa0 = data.kappa0

    h0: dict[int, dict[Index, FormExpr]] = {}
    h1: dict[int, dict[Index, dict[int, FormExpr]]] = {}
    for k in range(max_rank + 1):
        h0[k] = {}
        h1[k] = {}
        for J in combinations(range(data.p), k):
            alpha = build_alpha(n, kappa0 - data.koszul_degree(J)).form
            h0[k][J] = alpha.wedge(_wedge_all([morphism[j] for j in J], u), max_dzeta=n)
            parts: dict[int, FormExpr] = {}
            for m, j in enumerate(J):
                rest = J[:m] + J[m + 1 :]
                term = alpha.wedge(_wedge_all([morphism[i] for i in rest], u), max_dzeta=n)
                parts[j] = term if m % 2 == 0 else -term
            h1[k][J] = parts

    result = KoszulHefer(data, morphism, h0, h1)
    for k in check_relations:
        if 1 <= k <= max_rank:
            result.relations[k] = all(r.is_zero() for r in hefer_relation_residuals(result, k).values())
            logger.info(f"Hefer relation checked | k={k} | holds={result.relations[k]}")
    return result


def hefer_relation_residuals(
    kh: KoszulHefer,
    k: int,
) -> dict[Index, FormExpr]:
    """∇_η H^0_k − H^0_{k−1} a_k(ζ) + a_1(z) H^1_k on every basis element e_J."""
    data = kh.data
    polys_z = data.polys_in("z")
    residuals = {}
    for J, form in kh.h0[k].items():
        rhs = FormExpr.zero(data.universe)
        for rest, coeff in koszul_differential(data, J, "zeta").items():
            rhs = rhs + kh.h0[k - 1][rest].scale(coeff)
        for j, part in kh.h1[k][J].items():
            rhs = rhs - part.scale(polys_z[j])
        residuals[J] = nabla_eta(form) - rhs
    return residuals


# ----------------------------------------------------------------------- σ


def eval_sigma(
    data: KoszulData,
    zeta: np.ndarray,
    floor: float = settings.ON_CURVE_FLOOR,
) -> np.ndarray:
    """
    σ_j = conj(f_j(ζ)) / |ζ|^{2d_j} / ‖f‖², ‖f‖² = Σ |f_j(ζ)|² / |ζ|^{2d_j}.

    Raises:
        PointOnVarietyError: ‖f‖ below the floor
    """
    zeta = np.asarray(zeta, dtype=complex)
    values = data.evaluate(zeta)
    norm2 = np.sum(np.abs(zeta) ** 2, axis=-1)
    weights = np.stack([norm2**d for d in data.degrees])
    fnorm2 = np.sum(np.abs(values) ** 2 / weights, axis=0)
    if np.any(np.sqrt(fnorm2) < floor):
        raise PointOnVarietyError()
    return np.conj(values) / weights / fnorm2


# ------------------------------------------------------------------ ledger


def degree_ledger(
    data: KoszulData,
    s: int,
    q: int = 0,
) -> dict[str, Any]:
    """κ₀, κ(s), κ_q, the regularity bound and the solvability threshold."""
    admissible = min(data.p, data.n - q)
    kappa_q = max(
        (d for k in range(admissible + 1) for d in data.koszul_degrees(k).values()),
        default=0,
    )
    return {
        "kappa0": data.kappa0,
        "kappa": data.kappa(s),
        "kappa_q": kappa_q,
        "regularity": data.regularity(),
        "threshold": data.kappa0 - data.n,
        "threshold_holds": s >= data.kappa0 - data.n,
        "koszul_degrees": {
            str(k): {",".join(map(str, J)): d for J, d in data.koszul_degrees(k).items()}
            for k in range(data.p + 1)
        },
    }
