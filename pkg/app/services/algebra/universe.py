"""
Variable universe for a fixed projective dimension N.

All exact computations for one N live in a single sympy sparse polynomial
ring over the Gaussian rationals. The generators are, in order:

    zeta_0..N, zetabar_0..N, z_0..N, zbar_0..N, w_0..N, wbar_0..N,
    t0, t1, tbar0, tbar1, pi2i

The barred families are independent formal variables; conjugation is the
syntactic involution that swaps each family with its partner. ``pi2i`` is
the adjoined unit standing for 2πi, so conjugation sends it to -pi2i.
"""

import threading
from functools import lru_cache

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from app.core.logger import get_logger

logger = get_logger(__name__)

FAMILIES = ("zeta", "zetabar", "z", "zbar", "w", "wbar")
PARAM_FAMILIES = ("t", "tbar")
CONJUGATE_FAMILY = {
    "zeta": "zetabar",
    "zetabar": "zeta",
    "z": "zbar",
    "zbar": "z",
    "w": "wbar",
    "wbar": "w",
    "t": "tbar",
    "tbar": "t",
}
HOLOMORPHIC_FAMILIES = ("zeta", "z", "w", "t")

PI2I_VALUE = 2j * np.pi


class Universe:
    """
    Fixed-width variable universe with an atom registry for denominators.

    Instances are shared (see ``get_universe``) and only the atom registry
    mutates after construction; it is guarded by a lock.
    """

    def __init__(
        self,
        n: int,
    ):
        if n < 1:
            raise ValueError(f"projective dimension must be >= 1, got {n}")
        self.n = n
        self.size = n + 1

        names: list[str] = []
        self.family_slices: dict[str, range] = {}
        for family in FAMILIES:
            start = len(names)
            names.extend(f"{family}{j}" for j in range(self.size))
            self.family_slices[family] = range(start, len(names))
        for family in PARAM_FAMILIES:
            start = len(names)
            names.extend(f"{family}{j}" for j in range(2))
            self.family_slices[family] = range(start, len(names))
        self.pi2i_index = len(names)
        names.append("pi2i")

        self.names = tuple(names)
        self.ring = PolyRing(names, QQ_I, lex)
        self.gens = self.ring.gens
        self.ngens = self.ring.ngens
        self.domain = QQ_I

        self.family_of: list[str] = [""] * self.ngens
        for family, indices in self.family_slices.items():
            for i in indices:
                self.family_of[i] = family
        self.family_of[self.pi2i_index] = "pi2i"

        conj = list(range(self.ngens))
        for family, indices in self.family_slices.items():
            partner = self.family_slices[CONJUGATE_FAMILY[family]]
            for k, i in enumerate(indices):
                conj[i] = partner[k]
        self.conjugate_index = tuple(conj)

        self._atoms: list[PolyElement] = []
        self._atom_ids: dict[tuple, int] = {}
        self._atom_powers: dict[tuple[int, int], PolyElement] = {}
        self._atom_diffs: dict[tuple[int, int], PolyElement] = {}
        self._lock = threading.Lock()

        logger.debug(f"Universe created | N={n} | generators={self.ngens}")

    # ------------------------------------------------------------------ vars

    def index(
        self,
        family: str,
        j: int,
    ) -> int:
        if family == "pi2i":
            return self.pi2i_index
        indices = self.family_slices[family]
        if not 0 <= j < len(indices):
            raise IndexError(f"{family}{j} outside universe with N={self.n}")
        return indices[j]

    def gen(
        self,
        family: str,
        j: int = 0,
    ) -> PolyElement:
        return self.gens[self.index(family, j)]

    def index_of_name(
        self,
        name: str,
    ) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name}") from None

    # ------------------------------------------------------------- constants

    def coeff(
        self,
        value,
    ):
        """Convert int, Fraction, sympy number or Gaussian element into QQ_I."""
        if isinstance(value, complex):
            raise TypeError("floating complex coefficients are not exact")
        try:
            return self.domain.convert(value)
        except Exception:
            from sympy import nsimplify, sympify

            return self.domain.from_sympy(nsimplify(sympify(value)))

    def constant(
        self,
        value,
    ) -> PolyElement:
        return self.ring.ground_new(self.coeff(value))

    # ------------------------------------------------------------ atom store

    @staticmethod
    def _key(
        poly: PolyElement,
    ) -> tuple:
        return tuple(sorted((m, c.x, c.y) for m, c in poly.items()))

    def atomize(
        self,
        poly: PolyElement,
    ) -> tuple[int, object]:
        """
        Register a non-constant polynomial as a denominator atom.

        Returns:
            (atom id, leading coefficient removed by normalization)
        """
        if poly.is_ground:
            raise ValueError("constant polynomials are not atoms")
        lc = poly.LC
        monic = poly.quo_ground(lc) if lc != self.domain.one else poly
        key = self._key(monic)
        with self._lock:
            atom_id = self._atom_ids.get(key)
            if atom_id is None:
                atom_id = len(self._atoms)
                self._atoms.append(monic)
                self._atom_ids[key] = atom_id
        return atom_id, lc

    def atom(
        self,
        atom_id: int,
    ) -> PolyElement:
        return self._atoms[atom_id]

    def atom_power(
        self,
        atom_id: int,
        k: int,
    ) -> PolyElement:
        if k == 0:
            return self.ring.one
        if k == 1:
            return self._atoms[atom_id]
        cached = self._atom_powers.get((atom_id, k))
        if cached is None:
            cached = self._atoms[atom_id] ** k
            with self._lock:
                self._atom_powers[(atom_id, k)] = cached
        return cached

    def atom_diff(
        self,
        atom_id: int,
        var: int,
    ) -> PolyElement:
        cached = self._atom_diffs.get((atom_id, var))
        if cached is None:
            cached = self._atoms[atom_id].diff(self.gens[var])
            with self._lock:
                self._atom_diffs[(atom_id, var)] = cached
        return cached

    # ----------------------------------------------------------- conjugation

    def conjugate_poly(
        self,
        poly: PolyElement,
    ) -> PolyElement:
        conj = self.conjugate_index
        pi = self.pi2i_index
        out = {}
        for monom, c in poly.items():
            new_monom = [0] * self.ngens
            for i, e in enumerate(monom):
                if e:
                    new_monom[conj[i]] = e
            x, y = c.x, -c.y
            if monom[pi] % 2:
                x, y = -x, -y
            out[tuple(new_monom)] = self.domain.new(x, y)
        return self.ring.from_dict(out)

    # ------------------------------------------------------ numeric bindings

    def values(
        self,
        zeta=None,
        z=None,
        w=None,
        t=None,
    ) -> np.ndarray:
        """
        Build a numeric assignment for every generator.

        Each argument is an array of shape (..., N+1) (``t`` has shape (..., 2));
        conjugate families receive the complex conjugates, ``pi2i`` receives 2πi.
        Missing families are set to zero.

        Returns:
            complex array of shape (ngens, ...)
        """
        batch_shape: tuple[int, ...] | None = None
        for arr in (zeta, z, w, t):
            if arr is not None:
                shape = np.shape(arr)[:-1]
                batch_shape = shape if batch_shape is None else np.broadcast_shapes(batch_shape, shape)
        if batch_shape is None:
            batch_shape = ()

        out = np.zeros((self.ngens,) + tuple(batch_shape), dtype=complex)
        for family, arr in (("zeta", zeta), ("z", z), ("w", w), ("t", t)):
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=complex)
            moved = np.moveaxis(np.broadcast_to(arr, tuple(batch_shape) + arr.shape[-1:]), -1, 0)
            holo = self.family_slices[family]
            anti = self.family_slices[CONJUGATE_FAMILY[family]]
            if moved.shape[0] != len(holo):
                raise ValueError(f"{family} needs {len(holo)} coordinates, got {moved.shape[0]}")
            out[holo.start : holo.stop] = moved
            out[anti.start : anti.stop] = np.conj(moved)
        out[self.pi2i_index] = PI2I_VALUE
        return out


@lru_cache(maxsize=None)
def get_universe(
    n: int,
) -> Universe:
    """Shared universe per projective dimension."""
    return Universe(n)
