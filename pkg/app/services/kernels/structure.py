"""
Structure forms of complete intersections: the fields A_i dual to df_i on a
Jacobian minor and ω' = δ_{A_p}…δ_{A_1}Ω.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.errors import MinorDegenerateError
from app.core.logger import get_logger
from app.services.algebra.numeric import CompiledPoly
from app.services.algebra.rational import RationalFn
from app.services.curves import PlaneCurve
from app.services.forms import FormExpr, VectorFieldExpr, contract, omega, top_form
from app.services.hefer import KoszulData, koszul_data_new
from app.services.kernels.common import curve_hefer

logger = get_logger(__name__)


def determinant(
    matrix: Sequence[Sequence[PolyElement]],
    one: PolyElement,
) -> PolyElement:
    """Laplace expansion along the first row (small minors only)."""
    size = len(matrix)
    if size == 0:
        return one
    total = one - one
    for m in range(size):
        entry = matrix[0][m]
        if not entry:
            continue
        minor = [row[:m] + row[m + 1 :] for row in matrix[1:]]
        term = entry * determinant(minor, one)
        total = total + term if m % 2 == 0 else total - term
    return total


@dataclass(frozen=True, eq=False)
class StructureFormRep:
    data: KoszulData
    jacobian: tuple[tuple[PolyElement, ...], ...]
    minor_det: PolyElement
    fields: tuple[VectorFieldExpr, ...]

    def contract_all(
        self,
        form: FormExpr,
    ) -> FormExpr:
        """δ_{A_p}…δ_{A_1} form (A_1 applied first)."""
        for field_ in self.fields:
            form = contract(field_, form)
        return form

    @cached_property
    def omega_prime(
        self,
    ) -> FormExpr:
        return self.contract_all(omega(self.data.universe))

    def normalization_residual(
        self,
    ) -> FormExpr:
        """df_1∧…∧df_p∧δ_{A_p}…δ_{A_1}(dζ0∧…∧dζN) − (2πi)^p dζ0∧…∧dζN."""
        u = self.data.universe
        top = top_form(u)
        product = FormExpr.scalar(u, 1)
        for f in self.data.polys:
            product = product.wedge(FormExpr.one_form(u, "dzeta", [f.diff(u.gen("zeta", j)) for j in range(u.size)]))
        product = product.wedge(self.contract_all(top))
        return (product - top.scale(u.gen("pi2i") ** self.data.p)).cancel()

    @cached_property
    def _compiled_jacobian(
        self,
    ) -> list[list[CompiledPoly]]:
        u = self.data.universe
        return [
            [CompiledPoly(f.diff(u.gen("zeta", j))) for j in range(u.size)]
            for f in self.data.polys
        ]

    def minor_values(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        return CompiledPoly(self.minor_det)(self.data.universe.values(zeta=zeta))

    def tangent(
        self,
        zeta: np.ndarray,
    ) -> np.ndarray:
        """
        A tangent vector of the level sets of f at ζ with (v0, v1) = (0, 1) when
        |ζ0| ≥ |ζ1| and (1, 0) otherwise; minor components from the Jacobian.

        Raises:
            MinorDegenerateError: the Jacobian minor is singular at some point
        """
        zeta = np.asarray(zeta, dtype=complex)
        values = self.data.universe.values(zeta=zeta)
        jac = np.stack(
            [np.stack([c(values) for c in row], axis=-1) for row in self._compiled_jacobian],
            axis=-2,
        )
        minor = list(self.data.minor_variables)
        free = [j for j in range(zeta.shape[-1]) if j not in minor]
        v = np.zeros(zeta.shape, dtype=complex)
        first = np.abs(zeta[..., 0]) >= np.abs(zeta[..., 1])
        v[..., 1] = np.where(first, 1.0, 0.0)
        v[..., 0] = np.where(first, 0.0, 1.0)
        m = jac[..., minor]
        rhs = -np.einsum("...ij,...j->...i", jac[..., free], v[..., free])
        scale = np.abs(m).max(axis=(-2, -1))
        det = np.linalg.det(m)
        if np.any(np.abs(det) <= 1e-12 * np.maximum(scale, 1e-300) ** len(minor)):
            raise MinorDegenerateError(f"minor {tuple(minor)} singular at a sample")
        v[..., minor] = np.linalg.solve(m, rhs[..., None])[..., 0]
        return v


def structure_form(
    data: Union[KoszulData, PlaneCurve],
) -> StructureFormRep:
    """
    A_i = 2πi Σ_m (M^{-1})_{m,i} ∂/∂ζ_{minor_m} with M_{i,m} = ∂f_i/∂ζ_{minor_m},
    so that δ_{A_i} df_j = 2πi δ_ij.

    Raises:
        MinorDegenerateError: det M is identically zero
    """
    if isinstance(data, PlaneCurve):
        data = koszul_data_new([data.f], data.universe, [curve_hefer(data)], [data.fiber_variable])
    u = data.universe
    minor = data.minor_variables
    jacobian = tuple(tuple(f.diff(u.gen("zeta", j)) for j in minor) for f in data.polys)
    det = determinant([list(row) for row in jacobian], u.ring.one)
    if not det:
        raise MinorDegenerateError(f"minor {tuple(minor)} vanishes identically")

    p = data.p
    fields = []
    for i in range(p):
        coeffs: list[object] = [0] * u.size
        for m, var in enumerate(minor):
            rows = [list(row[:m] + row[m + 1 :]) for k, row in enumerate(jacobian) if k != i]
            cofactor = determinant(rows, u.ring.one)
            if (i + m) % 2:
                cofactor = -cofactor
            if cofactor:
                coeffs[var] = RationalFn.quotient(u, u.gen("pi2i") * cofactor, [det])
        fields.append(VectorFieldExpr.from_coeffs(u, "dzeta", coeffs))
    logger.info(f"Structure form built | p={p} | N={u.n} | minor={tuple(minor)} | det_terms={len(det)}")
    return StructureFormRep(data, jacobian, det, tuple(fields))


def plane_relation_residual(
    curve: PlaneCurve,
) -> FormExpr:
    """
    δ_AΩ − ε(2πi/f_c)(ζ_a dζ_b − ζ_b dζ_a), ε = (−1)^{c+1}; zero for every
    plane curve.
    """
    rep = structure_form(curve)
    u = curve.universe
    a, b = curve.base_variables
    c = curve.fiber_variable
    fc = curve.f.diff(u.gen("zeta", c))
    factor = RationalFn.quotient(u, u.gen("pi2i"), [fc])
    if c % 2 == 0:
        factor = -factor
    coeffs: list[object] = [0] * u.size
    coeffs[a] = -(factor * u.gen("zeta", b))
    coeffs[b] = factor * u.gen("zeta", a)
    return (rep.omega_prime - FormExpr.one_form(u, "dzeta", coeffs)).cancel()
