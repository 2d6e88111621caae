"""Elements of Q(alpha_1), their minimal polynomials and absolute logarithmic heights."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd

import sympy

from .errors import NotRealPositive, ZeroElement
from .intervals import context, endpoints, from_fraction, log_plus, lower, transfer, upper
from .roots import isolate_roots

_X = sympy.Symbol("x")


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class FieldElement:
    """sum_j coeffs[j] * alpha^j reduced modulo the minimal polynomial of alpha.

    ``modulus`` is the minimal polynomial of alpha (integer, highest degree
    first) and ``alpha`` a real interval picking out the distinguished embedding.
    """

    coeffs: tuple[Fraction, ...]
    modulus: tuple[int, ...]
    alpha: object

    def __post_init__(self):
        d = len(self.modulus) - 1
        cs = [Fraction(c) for c in self.coeffs]
        if len(cs) > d:
            cs = _reduce(cs, self.modulus)
        cs = cs + [Fraction(0)] * (d - len(cs))
        object.__setattr__(self, "coeffs", tuple(cs))

    # construction -----------------------------------------------------
    @classmethod
    def rational(cls, q, modulus, alpha) -> "FieldElement":
        return cls((Fraction(q),), tuple(modulus), alpha)

    @classmethod
    def generator(cls, modulus, alpha) -> "FieldElement":
        if len(modulus) - 1 == 1:
            return cls((Fraction(-modulus[1], modulus[0]),), tuple(modulus), alpha)
        return cls((Fraction(0), Fraction(1)), tuple(modulus), alpha)

    @classmethod
    def from_poly(cls, poly_low_high, modulus, alpha) -> "FieldElement":
        return cls(tuple(Fraction(c) for c in poly_low_high), tuple(modulus), alpha)

    @property
    def degree(self) -> int:
        """Degree of the ambient field Q(alpha)."""
        return len(self.modulus) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    # arithmetic -------------------------------------------------------
    def _wrap(self, cs) -> "FieldElement":
        return FieldElement(tuple(cs), self.modulus, self.alpha)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        return FieldElement.rational(other, self.modulus, self.alpha)

    def __add__(self, other):
        o = self._coerce(other)
        return self._wrap([a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return self._wrap([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prod = [Fraction(0)] * (2 * self.degree)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    prod[i + j] += a * b
        return self._wrap(_reduce(prod, self.modulus))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroElement("zero has no inverse")
        num = sympy.Poly(list(reversed(self.coeffs)), _X, domain="QQ")
        mod = sympy.Poly(list(self.modulus), _X, domain="QQ")
        inv = sympy.invert(num, mod)
        return self._wrap([Fraction(int(c.p), int(c.q)) for c in reversed(inv.all_coeffs())])

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = FieldElement.rational(1, self.modulus, self.alpha)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, FieldElement) and self.coeffs == other.coeffs and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.coeffs, self.modulus))

    # embeddings and minimal polynomial ---------------------------------
    def embedding(self, ctx=None):
        """Value under the distinguished real embedding, as a real interval."""
        ctx = ctx or context(max(128, _ctx_bits(self.alpha)))
        a = transfer(ctx, self.alpha)
        acc = ctx.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * a + from_fraction(ctx, c)
        return acc

    @cached_property
    def minimal_polynomial(self) -> tuple[int, ...]:
        """Primitive integer minimal polynomial (highest degree first, positive leading coefficient)."""
        d = self.degree
        cols = []
        for j in range(d):
            vec = (self * FieldElement.generator(self.modulus, self.alpha) ** j).coeffs if d > 1 else self.coeffs
            cols.append([sympy.Rational(c.numerator, c.denominator) for c in vec])
        mat = sympy.Matrix(d, d, lambda i, j: cols[j][i])
        charpoly = mat.charpoly(_X).as_expr()
        poly = sympy.Poly(charpoly, _X, domain="QQ")
        sqf = sympy.Poly(sympy.sqf_part(poly.as_expr()), _X, domain="QQ")
        coeffs = [Fraction(int(c.p), int(c.q)) for c in sqf.all_coeffs()]
        den = 1
        for c in coeffs:
            den = _lcm(den, c.denominator)
        ints = [int(c * den) for c in coeffs]
        g = 0
        for c in ints:
            g = gcd(g, c)
        ints = [c // g for c in ints]
        if ints[0] < 0:
            ints = [-c for c in ints]
        return tuple(ints)


def _ctx_bits(x) -> int:
    lo, hi = endpoints(x)
    if hi == lo:
        return 128
    w = hi - lo
    return max(128, min(1 << 16, int((w.denominator.bit_length() - w.numerator.bit_length())) + 8))


def _reduce(cs, modulus) -> list[Fraction]:
    """Remainder of a low-to-high polynomial modulo ``modulus`` (high-to-low)."""
    cs = list(cs)
    d = len(modulus) - 1
    lead = Fraction(modulus[0])
    mod_low = [Fraction(c) for c in reversed(modulus)]
    for top in range(len(cs) - 1, d - 1, -1):
        c = cs[top]
        if c:
            f = c / lead
            for i in range(d + 1):
                cs[top - d + i] -= f * mod_low[i]
    return cs[:d] if d else []


@dataclass(frozen=True)
class HeightValue:
    """Certified enclosure [h_lower, h_upper] of h(x); ``A`` is an upper bound for max{D h, |log x|}."""

    h_lower: Fraction
    h_upper: Fraction
    A: Fraction | None = None

    @property
    def h(self) -> Fraction:
        return self.h_upper


def height_from_minpoly(minpoly, precision: int = 128) -> HeightValue:
    """(1/deg)(log|lead| + sum log+|conjugates|) with outward rounding."""
    minpoly = [int(c) for c in minpoly]
    deg = len(minpoly) - 1
    ctx = context(precision)
    total = ctx.log(ctx.mpf(abs(minpoly[0])))
    if deg >= 1:
        for root in isolate_roots(minpoly, precision, ctx):
            total = total + log_plus(ctx, abs(root.value))
    h = total / deg
    lo, hi = endpoints(h)
    return HeightValue(max(lo, Fraction(0)), hi)


def log_height(x: FieldElement, precision: int = 128) -> HeightValue:
    if x.is_zero():
        raise ZeroElement("height of zero is undefined")
    return height_from_minpoly(x.minimal_polynomial, precision)


def a_value(x: FieldElement, D: int, precision: int = 128) -> HeightValue:
    """A(x) = max{D h(x), |log x|} for x real and positive under the distinguished embedding."""
    ctx = context(precision)
    val = x.embedding(ctx)
    if not lower(val) > 0:
        raise NotRealPositive("element is not certified positive")
    hv = log_height(x, precision)
    logabs = abs(ctx.log(val))
    A = max(D * hv.h_upper, upper(logabs))
    return HeightValue(hv.h_lower, hv.h_upper, A)


def rational_height(q: Fraction) -> Fraction:
    """Exact h(a/b) = log max(|a|, |b|) returned as the argument of the log."""
    q = Fraction(q)
    return Fraction(max(abs(q.numerator), abs(q.denominator)))
