"""
Exterior-algebra elements with exact rational coefficients.

Generators are dζ_j, dζ̄_j, dz̄_j and dw_j (j = 0..N), ordered by family in
that order and by index within a family. A term key is the sorted tuple of
generator ids; every sign comes from sorting parity.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from app.services.algebra.rational import RationalFn, as_rational
from app.services.algebra.universe import Universe

GEN_FAMILIES = ("dzeta", "dzetabar", "dzbar", "dw")
GEN_SYMBOLS = {"dzeta": "dζ", "dzetabar": "dζ̄", "dzbar": "dz̄", "dw": "dw"}
# variable family whose differential each generator family is
GEN_VARIABLE = {"dzeta": "zeta", "dzetabar": "zetabar", "dzbar": "zbar", "dw": "w"}

Key = tuple[int, ...]
Bundle = Optional[tuple[int, int]]


def gen_id(
    universe: Universe,
    family: str,
    j: int,
) -> int:
    if not 0 <= j < universe.size:
        raise IndexError(f"{family}{j} outside universe with N={universe.n}")
    return GEN_FAMILIES.index(family) * universe.size + j


def gen_family(
    universe: Universe,
    g: int,
) -> tuple[str, int]:
    return GEN_FAMILIES[g // universe.size], g % universe.size


def insertion_sign(
    key: Key,
    g: int,
) -> tuple[int, Key] | None:
    """Wedge generator ``g`` from the left onto ``key``; None if it repeats."""
    if g in key:
        return None
    before = sum(1 for x in key if x < g)
    new_key = tuple(sorted(key + (g,)))
    return (-1 if before % 2 else 1), new_key


def merge_sign(
    a: Key,
    b: Key,
) -> tuple[int, Key] | None:
    """Sign and key of ``dx_a ∧ dx_b``; None if they share a generator."""
    if set(a) & set(b):
        return None
    inversions = 0
    for x in a:
        for y in b:
            if x > y:
                inversions += 1
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def _add_bundles(
    a: Bundle,
    b: Bundle,
) -> Bundle:
    if a is None or b is None:
        return None
    return (a[0] + b[0], a[1] + b[1])


@dataclass(frozen=True, eq=False)
class FormExpr:
    universe: Universe
    terms: Mapping[Key, RationalFn] = field(default_factory=dict)
    bundle: Bundle = None

    # ------------------------------------------------------------ builders

    @classmethod
    def build(
        cls,
        universe: Universe,
        terms: Mapping[Key, RationalFn],
        bundle: Bundle = None,
    ) -> "FormExpr":
        clean = {k: v for k, v in terms.items() if not v.is_zero()}
        return cls(universe, dict(sorted(clean.items())), bundle)

    @classmethod
    def scalar(
        cls,
        universe: Universe,
        value,
        bundle: Bundle = None,
    ) -> "FormExpr":
        return cls.build(universe, {(): as_rational(universe, value)}, bundle)

    @classmethod
    def zero(
        cls,
        universe: Universe,
        bundle: Bundle = None,
    ) -> "FormExpr":
        return cls(universe, {}, bundle)

    @classmethod
    def generator(
        cls,
        universe: Universe,
        family: str,
        j: int,
        coeff=1,
    ) -> "FormExpr":
        return cls.build(universe, {(gen_id(universe, family, j),): as_rational(universe, coeff)})

    @classmethod
    def one_form(
        cls,
        universe: Universe,
        family: str,
        coeffs: Iterable,
        bundle: Bundle = None,
    ) -> "FormExpr":
        """Σ_j c_j d(family)_j."""
        terms = {}
        for j, c in enumerate(coeffs):
            terms[(gen_id(universe, family, j),)] = as_rational(universe, c)
        return cls.build(universe, terms, bundle)

    def with_bundle(
        self,
        bundle: Bundle,
    ) -> "FormExpr":
        return FormExpr(self.universe, self.terms, bundle)

    # ---------------------------------------------------------- inspection

    def is_zero(
        self,
    ) -> bool:
        return not self.terms

    def coefficient(
        self,
        key: Key = (),
    ) -> RationalFn:
        return self.terms.get(tuple(key), RationalFn.zero(self.universe))

    def key_degrees(
        self,
        key: Key,
    ) -> tuple[int, int, int, int]:
        counts = [0, 0, 0, 0]
        for g in key:
            counts[g // self.universe.size] += 1
        return tuple(counts)

    def degrees(
        self,
    ) -> set[tuple[int, int, int, int]]:
        """Multi-degrees (dζ, dζ̄, dz̄, dw) present in the expression."""
        return {self.key_degrees(k) for k in self.terms}

    def is_homogeneous_degree(
        self,
    ) -> bool:
        return len({len(k) for k in self.terms}) <= 1

    def degree(
        self,
    ) -> int:
        """Total form degree (expression must be of pure degree)."""
        sizes = {len(k) for k in self.terms}
        if len(sizes) > 1:
            raise ValueError("expression mixes form degrees")
        return sizes.pop() if sizes else 0

    def parity(
        self,
    ) -> int:
        parities = {len(k) % 2 for k in self.terms}
        if len(parities) > 1:
            raise ValueError("expression mixes even and odd parts")
        return parities.pop() if parities else 0

    # ---------------------------------------------------------- arithmetic

    def _check(
        self,
        other: "FormExpr",
    ) -> None:
        if other.universe is not self.universe:
            raise ValueError("forms belong to different variable universes")

    def __add__(
        self,
        other,
    ) -> "FormExpr":
        if not isinstance(other, FormExpr):
            other = FormExpr.scalar(self.universe, other)
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        bundle = self.bundle if self.bundle == other.bundle else (self.bundle or other.bundle)
        return FormExpr.build(self.universe, out, bundle)

    __radd__ = __add__

    def __neg__(
        self,
    ) -> "FormExpr":
        return FormExpr(self.universe, {k: -v for k, v in self.terms.items()}, self.bundle)

    def __sub__(
        self,
        other,
    ) -> "FormExpr":
        if not isinstance(other, FormExpr):
            other = FormExpr.scalar(self.universe, other)
        return self + (-other)

    def __rsub__(
        self,
        other,
    ) -> "FormExpr":
        return FormExpr.scalar(self.universe, other) - self

    def scale(
        self,
        factor,
    ) -> "FormExpr":
        factor = as_rational(self.universe, factor)
        if factor.is_zero():
            return FormExpr.zero(self.universe, self.bundle)
        return FormExpr.build(
            self.universe,
            {k: v * factor for k, v in self.terms.items()},
            self.bundle,
        )

    def __mul__(
        self,
        other,
    ) -> "FormExpr":
        if isinstance(other, FormExpr):
            return self.wedge(other)
        return self.scale(other)

    def __rmul__(
        self,
        other,
    ) -> "FormExpr":
        return self.scale(other)

    def wedge(
        self,
        other: "FormExpr",
        max_dzeta: int | None = None,
    ) -> "FormExpr":
        """Graded-anticommutative product; bundle weights add."""
        self._check(other)
        out: dict[Key, RationalFn] = {}
        limit = self.universe.size
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                merged = merge_sign(ka, kb)
                if merged is None:
                    continue
                sign, key = merged
                if max_dzeta is not None and sum(1 for g in key if g < limit) > max_dzeta:
                    continue
                value = va * vb
                if sign < 0:
                    value = -value
                out[key] = out[key] + value if key in out else value
        return FormExpr.build(self.universe, out, _add_bundles(self.bundle, other.bundle))

    def power(
        self,
        k: int,
        max_dzeta: int | None = None,
    ) -> "FormExpr":
        """k-th wedge power, dropping terms of dζ-degree above ``max_dzeta``."""
        result = FormExpr.scalar(self.universe, 1, (0, 0) if self.bundle is not None else None)
        for _ in range(k):
            result = result.wedge(self, max_dzeta=max_dzeta)
        return result

    def map_coefficients(
        self,
        fn: Callable[[RationalFn], RationalFn],
    ) -> "FormExpr":
        return FormExpr.build(self.universe, {k: fn(v) for k, v in self.terms.items()}, self.bundle)

    def filter(
        self,
        predicate: Callable[[Key], bool],
    ) -> "FormExpr":
        return FormExpr(
            self.universe,
            {k: v for k, v in self.terms.items() if predicate(k)},
            self.bundle,
        )

    def truncate(
        self,
        max_dzeta: int,
    ) -> "FormExpr":
        return self.filter(lambda k: self.key_degrees(k)[0] <= max_dzeta)

    def cancel(
        self,
    ) -> "FormExpr":
        return self.map_coefficients(lambda v: v.cancel())

    def __eq__(
        self,
        other,
    ) -> bool:
        if isinstance(other, FormExpr):
            return (self - other).is_zero()
        return (self - FormExpr.scalar(self.universe, other)).is_zero()

    def __hash__(self):
        nonzero = {key: coeff for key, coeff in self.terms.items() if not coeff.is_zero()}
        if set(nonzero) <= {()}:
            return hash(nonzero.get((), 0))
        return hash(frozenset((key, hash(coeff)) for key, coeff in nonzero.items()))

    # ------------------------------------------------------------ printing

    def key_label(
        self,
        key: Key,
    ) -> str:
        parts = []
        for g in key:
            family, j = gen_family(self.universe, g)
            parts.append(f"{GEN_SYMBOLS[family]}{j}")
        return "∧".join(parts) if parts else "1"

    def pretty(
        self,
    ) -> str:
        if not self.terms:
            return "0"
        lines = []
        for key, value in self.terms.items():
            lines.append(f"({value.to_expr()})·{self.key_label(key)}")
        return " + ".join(lines)

    def __repr__(self) -> str:
        return f"FormExpr(terms={len(self.terms)}, bundle={self.bundle})"


@dataclass(frozen=True, eq=False)
class VectorFieldExpr:
    """Σ_j c_j ∂/∂x_j for one generator family (x = ζ, ζ̄, z̄ or w)."""

    universe: Universe
    family: str
    components: tuple[RationalFn, ...]

    def __post_init__(self):
        if self.family not in GEN_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if len(self.components) != self.universe.size:
            raise ValueError("vector field needs one component per coordinate")

    @classmethod
    def from_coeffs(
        cls,
        universe: Universe,
        family: str,
        coeffs: Iterable,
    ) -> "VectorFieldExpr":
        return cls(universe, family, tuple(as_rational(universe, c) for c in coeffs))

    def component(
        self,
        g: int,
    ) -> RationalFn | None:
        family, j = gen_family(self.universe, g)
        if family != self.family:
            return None
        return self.components[j]
