"""
Exact rational functions with factored denominators.

A ``RationalFn`` is ``num / Π atom_i^{e_i}`` where ``num`` is a sparse
polynomial in the universe ring and every atom is a registered monic
polynomial. Constants never live in the denominator. Equality is decided by
cross-multiplication, so no gcd is ever taken.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

from sympy import prime
from sympy.polys.rings import PolyElement

from app.core.errors import DenominatorVanishesError
from app.services.algebra.universe import Universe

Den = tuple[tuple[int, int], ...]
Gaussian = tuple[Fraction, Fraction]

HASH_PRIME_INDEX = 101


def _merge_den(
    a: Mapping[int, int],
    b: Mapping[int, int],
) -> dict[int, int]:
    out = dict(a)
    for atom_id, e in b.items():
        out[atom_id] = out.get(atom_id, 0) + e
    return out


def _canonical(
    den: Mapping[int, int],
) -> Den:
    return tuple(sorted((a, e) for a, e in den.items() if e))


def _exact_at(
    poly: PolyElement,
    point: list[int],
) -> Gaussian:
    """Exact value of a polynomial over QQ_I at an integer point."""
    re, im = Fraction(0), Fraction(0)
    for monom, coeff in poly.terms():
        scale = 1
        for value, e in zip(point, monom):
            if e:
                scale *= value**e
        re += Fraction(int(coeff.x.numerator), int(coeff.x.denominator)) * scale
        im += Fraction(int(coeff.y.numerator), int(coeff.y.denominator)) * scale
    return re, im


def _gaussian_mul(
    a: Gaussian,
    b: Gaussian,
) -> Gaussian:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _gaussian_pow(
    a: Gaussian,
    e: int,
) -> Gaussian:
    out = (Fraction(1), Fraction(0))
    for _ in range(e):
        out = _gaussian_mul(out, a)
    return out


def _gaussian_div(
    a: Gaussian,
    b: Gaussian,
) -> Gaussian:
    norm = b[0] ** 2 + b[1] ** 2
    return (a[0] * b[0] + a[1] * b[1]) / norm, (a[1] * b[0] - a[0] * b[1]) / norm


@dataclass(frozen=True, eq=False)
class RationalFn:
    universe: Universe
    num: PolyElement
    den: Den = ()

    # ------------------------------------------------------------ builders

    @classmethod
    def from_poly(
        cls,
        universe: Universe,
        poly: PolyElement,
    ) -> "RationalFn":
        return cls(universe, poly, ())

    @classmethod
    def constant(
        cls,
        universe: Universe,
        value,
    ) -> "RationalFn":
        return cls(universe, universe.constant(value), ())

    @classmethod
    def zero(
        cls,
        universe: Universe,
    ) -> "RationalFn":
        return cls(universe, universe.ring.zero, ())

    @classmethod
    def one(
        cls,
        universe: Universe,
    ) -> "RationalFn":
        return cls(universe, universe.ring.one, ())

    @classmethod
    def quotient(
        cls,
        universe: Universe,
        num: PolyElement,
        den_factors: Iterable[Union[PolyElement, tuple[PolyElement, int]]],
    ) -> "RationalFn":
        """
        Build ``num / Π factors``.

        Each factor is a polynomial or a ``(polynomial, exponent)`` pair.
        Constant factors are folded into the numerator.
        """
        den: dict[int, int] = {}
        for factor in den_factors:
            poly, e = factor if isinstance(factor, tuple) else (factor, 1)
            if not poly:
                raise DenominatorVanishesError()
            if poly.is_ground:
                num = num.quo_ground(poly.LC**e)
                continue
            atom_id, lc = universe.atomize(poly)
            if lc != universe.domain.one:
                num = num.quo_ground(lc**e)
            den[atom_id] = den.get(atom_id, 0) + e
        return cls(universe, num, _canonical(den))

    # ---------------------------------------------------------- inspection

    @property
    def den_map(
        self,
    ) -> dict[int, int]:
        return dict(self.den)

    def den_poly(
        self,
    ) -> PolyElement:
        out = self.universe.ring.one
        for atom_id, e in self.den:
            out = out * self.universe.atom_power(atom_id, e)
        return out

    def is_zero(
        self,
    ) -> bool:
        return not self.num

    def is_polynomial(
        self,
    ) -> bool:
        return not self.den

    def is_constant(
        self,
    ) -> bool:
        return not self.den and self.num.is_ground

    def variables(
        self,
    ) -> set[int]:
        used: set[int] = set()
        for monom in self.num.keys():
            used.update(i for i, e in enumerate(monom) if e)
        for atom_id, _ in self.den:
            for monom in self.universe.atom(atom_id).keys():
                used.update(i for i, e in enumerate(monom) if e)
        return used

    def depends_on(
        self,
        var: int,
    ) -> bool:
        if any(monom[var] for monom in self.num.keys()):
            return True
        return any(
            any(monom[var] for monom in self.universe.atom(a).keys()) for a, _ in self.den
        )

    # ---------------------------------------------------------- arithmetic

    def _coerce(
        self,
        other,
    ) -> "RationalFn":
        if isinstance(other, RationalFn):
            if other.universe is not self.universe:
                raise ValueError("operands belong to different variable universes")
            return other
        if isinstance(other, PolyElement):
            return RationalFn(self.universe, other, ())
        return RationalFn.constant(self.universe, other)

    def __add__(
        self,
        other,
    ) -> "RationalFn":
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RationalFn(self.universe, self.num + other.num, self.den)
        a, b = self.den_map, other.den_map
        common = {k: max(a.get(k, 0), b.get(k, 0)) for k in set(a) | set(b)}
        num_a, num_b = self.num, other.num
        for atom_id, e in common.items():
            if e - a.get(atom_id, 0):
                num_a = num_a * self.universe.atom_power(atom_id, e - a.get(atom_id, 0))
            if e - b.get(atom_id, 0):
                num_b = num_b * self.universe.atom_power(atom_id, e - b.get(atom_id, 0))
        return RationalFn(self.universe, num_a + num_b, _canonical(common))

    __radd__ = __add__

    def __neg__(
        self,
    ) -> "RationalFn":
        return RationalFn(self.universe, -self.num, self.den)

    def __sub__(
        self,
        other,
    ) -> "RationalFn":
        return self + (-self._coerce(other))

    def __rsub__(
        self,
        other,
    ) -> "RationalFn":
        return self._coerce(other) - self

    def __mul__(
        self,
        other,
    ) -> "RationalFn":
        other = self._coerce(other)
        if not self.num or not other.num:
            return RationalFn.zero(self.universe)
        return RationalFn(
            self.universe,
            self.num * other.num,
            _canonical(_merge_den(self.den_map, other.den_map)),
        )

    __rmul__ = __mul__

    def __pow__(
        self,
        k: int,
    ) -> "RationalFn":
        if k < 0:
            return self.reciprocal() ** (-k)
        if k == 0:
            return RationalFn.one(self.universe)
        return RationalFn(
            self.universe,
            self.num**k,
            tuple((a, e * k) for a, e in self.den),
        )

    def reciprocal(
        self,
    ) -> "RationalFn":
        if not self.num:
            raise DenominatorVanishesError("reciprocal of zero")
        den_poly = self.den_poly()
        return RationalFn.quotient(self.universe, den_poly, [self.num])

    def __eq__(
        self,
        other,
    ) -> bool:
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return self._value_hash

    @cached_property
    def _value_hash(
        self,
    ) -> int:
        """
        Hash of the exact value at a fixed integer point.

        Equal functions agree there whatever their representation, and a
        constant hashes like the Python number it equals. The point sits on
        large primes so no registered atom vanishes on it in practice; if one
        does the hash is 0.
        """
        if self.is_zero():
            return 0
        point = [prime(HASH_PRIME_INDEX + i) for i in range(self.universe.ring.ngens)]
        den = (Fraction(1), Fraction(0))
        for atom_id, e in self.den:
            atom = _exact_at(self.universe.atom(atom_id), point)
            den = _gaussian_mul(den, _gaussian_pow(atom, e))
        if den == (0, 0):
            return 0
        re, im = _gaussian_div(_exact_at(self.num, point), den)
        return hash(re) if im == 0 else hash((re, im))

    def __repr__(self) -> str:
        return f"RationalFn({self.to_expr()})"

    # --------------------------------------------------------- simplifying

    def cancel(
        self,
    ) -> "RationalFn":
        """Remove denominator atoms that divide the numerator exactly."""
        if not self.num:
            return RationalFn.zero(self.universe)
        num = self.num
        den = self.den_map
        for atom_id in list(den):
            atom = self.universe.atom(atom_id)
            while den[atom_id]:
                quotient, remainder = num.div(atom)
                if remainder:
                    break
                num = quotient
                den[atom_id] -= 1
        return RationalFn(self.universe, num, _canonical(den))

    # ------------------------------------------------------------ calculus

    def diff(
        self,
        var: int,
    ) -> "RationalFn":
        """
        Exact partial derivative.

        d(n / Π a^e) = (n' Π_dep a - n Σ_i e_i a_i' Π_{dep, j≠i} a_j) / (Π a^e Π_dep a)
        where the products run over atoms depending on ``var``.
        """
        universe = self.universe
        gen = universe.gens[var]
        dnum = self.num.diff(gen)
        dependent = [(a, e) for a, e in self.den if universe.atom_diff(a, var)]
        if not dependent:
            return RationalFn(universe, dnum, self.den)

        new_num = dnum
        for a, _ in dependent:
            new_num = new_num * universe.atom(a)
        for i, (a_i, e_i) in enumerate(dependent):
            term = self.num * universe.atom_diff(a_i, var)
            for j, (a_j, _) in enumerate(dependent):
                if j != i:
                    term = term * universe.atom(a_j)
            new_num = new_num - term.mul_ground(universe.coeff(e_i))
        den = self.den_map
        for a, _ in dependent:
            den[a] += 1
        return RationalFn(universe, new_num, _canonical(den))

    # ---------------------------------------------------------- conversion

    def to_expr(self):
        expr = self.num.as_expr()
        for atom_id, e in self.den:
            expr = expr / self.universe.atom(atom_id).as_expr() ** e
        return expr


def as_rational(
    universe: Universe,
    value,
) -> RationalFn:
    """Coerce polynomials and constants into ``RationalFn``."""
    if isinstance(value, RationalFn):
        return value
    if isinstance(value, PolyElement):
        return RationalFn.from_poly(universe, value)
    return RationalFn.constant(universe, value)
