"""
Compiled numeric evaluation of exact expressions.

Polynomials are lowered to an exponent matrix over the variables they use
plus a complex coefficient vector; evaluation gathers precomputed powers and
contracts in bounded memory chunks, so batches of quadrature nodes are
evaluated without Python-level loops over points.
"""

from functools import lru_cache

import numpy as np
from sympy.polys.rings import PolyElement

from app.core.config import settings
from app.core.errors import PoleEvaluationError
from app.services.algebra.rational import RationalFn

CHUNK_ELEMENTS = 2_000_000


class CompiledPoly:
    def __init__(
        self,
        poly: PolyElement,
    ):
        terms = list(poly.items())
        self.nterms = len(terms)
        if not terms:
            self.vars = np.zeros(0, dtype=int)
            self.exps = np.zeros((0, 0), dtype=int)
            self.coeffs = np.zeros(0, dtype=complex)
            self.max_exp = np.zeros(0, dtype=int)
            return
        monoms = np.array([m for m, _ in terms], dtype=int)
        used = np.nonzero(monoms.any(axis=0))[0]
        self.vars = used
        self.exps = monoms[:, used]
        self.coeffs = np.array(
            [complex(float(c.x), float(c.y)) for _, c in terms],
            dtype=complex,
        )
        self.max_exp = self.exps.max(axis=0) if len(used) else np.zeros(0, dtype=int)

    def __call__(
        self,
        values: np.ndarray,
        with_scale: bool = False,
    ):
        """
        Args:
            values: complex array (ngens, *batch)
            with_scale: also return Σ|term| for relative pole checks

        Returns:
            value (and scale) with shape batch
        """
        batch_shape = values.shape[1:]
        if self.nterms == 0:
            zero = np.zeros(batch_shape, dtype=complex)
            return (zero, np.zeros(batch_shape)) if with_scale else zero
        flat = values.reshape(values.shape[0], -1)
        npts = flat.shape[1]

        powers = []
        for k, var in enumerate(self.vars):
            table = np.empty((self.max_exp[k] + 1, npts), dtype=complex)
            table[0] = 1.0
            for p in range(1, self.max_exp[k] + 1):
                table[p] = table[p - 1] * flat[var]
            powers.append(table)

        total = np.zeros(npts, dtype=complex)
        scale = np.zeros(npts) if with_scale else None
        chunk = max(1, CHUNK_ELEMENTS // max(npts, 1))
        for start in range(0, self.nterms, chunk):
            stop = min(start + chunk, self.nterms)
            prod = np.ones((stop - start, npts), dtype=complex)
            for k in range(len(self.vars)):
                prod *= powers[k][self.exps[start:stop, k]]
            coeffs = self.coeffs[start:stop]
            total += coeffs @ prod
            if with_scale:
                scale += np.abs(coeffs) @ np.abs(prod)
        total = total.reshape(batch_shape)
        if with_scale:
            return total, scale.reshape(batch_shape)
        return total


class CompiledRational:
    def __init__(
        self,
        expr: RationalFn,
    ):
        universe = expr.universe
        self.num = CompiledPoly(expr.num)
        self.atoms = [(CompiledPoly(universe.atom(a)), e) for a, e in expr.den]

    def __call__(
        self,
        values: np.ndarray,
        pole_floor: float = settings.EVAL_POLE_FLOOR,
        check_poles: bool = False,
    ) -> np.ndarray:
        out = self.num(values)
        for atom, e in self.atoms:
            if check_poles:
                value, scale = atom(values, with_scale=True)
                if np.any(np.abs(value) <= pole_floor * np.maximum(scale, 1e-300)):
                    raise PoleEvaluationError()
            else:
                value = atom(values)
            out = out / value**e
        return out


@lru_cache(maxsize=4096)
def _compile_cached(
    expr_id: int,
    expr: RationalFn,
) -> CompiledRational:
    return CompiledRational(expr)


def compile_rational(
    expr: RationalFn,
) -> CompiledRational:
    """Compile (cached per expression object; expressions are immutable)."""
    return _compile_cached(id(expr), expr)
