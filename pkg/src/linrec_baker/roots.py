"""Certified isolation of the complex roots of an integer polynomial.

Approximate roots come from mpmath's ``polyroots``; they are then certified
with Gerschgorin disks of the companion-type matrix ``diag(z) - 1 W^T``
built from Weierstrass corrections ``W_i``. A disk disjoint from all other
disks holds exactly one root. A disk whose complex conjugate is disjoint
from every other disk holds a real root.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy

from .errors import PrecisionExhausted
from .intervals import raw_to_fraction, context, endpoints, from_fraction, is_bounded, lower, upper


@dataclass(frozen=True)
class IsolatedRoot:
    """A root enclosure: ``value`` is a complex interval box, real roots have zero imaginary part."""

    value: object
    radius: Fraction
    is_real: bool
    multiplicity: int
    factor: tuple[int, ...]  # irreducible factor (high-to-low) the root belongs to


def _mp_to_fraction(x) -> Fraction:
    return raw_to_fraction(x._mpf_)


def _poly_eval(ctx, coeffs, z):
    acc = ctx.mpc(0, 0)
    for c in coeffs:
        acc = acc * z + c
    return acc


def _approximate_roots(coeffs: list[int], prec: int):
    mp = mpmath.MPContext()
    mp.prec = prec + 32
    try:
        approx = mp.polyroots(coeffs, maxsteps=400, extraprec=prec + 64)
    except mpmath.libmp.NoConvergence as exc:
        raise PrecisionExhausted(f"root approximation did not converge: {exc}") from exc
    out = []
    for r in approx:
        r = mp.mpc(r)
        out.append((_mp_to_fraction(r.real), _mp_to_fraction(r.imag)))
    return out


def _squarefree_factors(coeffs: list[int]):
    """Irreducible factors over Q with multiplicities, as integer coefficient tuples."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(coeffs, x, domain="ZZ")
    _, factors = poly.factor_list()
    return [(tuple(int(c) for c in f.all_coeffs()), mult) for f, mult in factors]


def isolate_roots(coeffs: list[int], prec: int, ctx=None) -> list[IsolatedRoot]:
    """Certified enclosures of all distinct roots of an integer polynomial (high-to-low coefficients)."""
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if len(coeffs) < 2:
        return []
    factors = _squarefree_factors(coeffs)
    squarefree = sympy.Poly(1, sympy.Symbol("x"), domain="ZZ")
    for f, _ in factors:
        squarefree *= sympy.Poly(list(f), sympy.Symbol("x"), domain="ZZ")
    sf = [int(c) for c in squarefree.all_coeffs()]
    degree = len(sf) - 1
    ctx = ctx if ctx is not None else context(prec)
    approx = _approximate_roots(sf, prec)
    points = [ctx.mpc(from_fraction(ctx, re), from_fraction(ctx, im)) for re, im in approx]
    lead = ctx.mpf(sf[0])
    centres, radii = [], []
    for i, z in enumerate(points):
        denom = lead
        for j, w in enumerate(points):
            if j != i:
                denom = denom * (z - w)
        weier = _poly_eval(ctx, [ctx.mpf(c) for c in sf], z) / denom
        if not (is_bounded(weier.real) and is_bounded(weier.imag)):
            raise PrecisionExhausted("coincident root approximations")
        centres.append(z - weier)
        radii.append(upper(abs(weier)) * (degree - 1) if degree > 1 else Fraction(0))
    if degree == 1:
        radii = [Fraction(0)]

    def gap(a, b):
        return lower(abs(a - b))

    for i in range(degree):
        for j in range(i + 1, degree):
            if gap(centres[i], centres[j]) <= radii[i] + radii[j]:
                raise PrecisionExhausted("root disks overlap")

    roots = []
    for i, c in enumerate(centres):
        conj = ctx.mpc(c.real, -c.imag)
        real = all(gap(conj, centres[j]) > radii[i] + radii[j] for j in range(degree) if j != i)
        r_iv = from_fraction(ctx, radii[i])
        widen = ctx.mpf([-r_iv.b, r_iv.b]) if radii[i] else ctx.mpf(0)
        re = c.real + widen
        value = ctx.mpc(re, 0) if real else ctx.mpc(re, c.imag + widen)
        owner = _owning_factor(ctx, factors, value)
        roots.append(IsolatedRoot(value, radii[i], real, owner[1], owner[0]))
    return roots


def _owning_factor(ctx, factors, value):
    hits = []
    for f, mult in factors:
        val = _poly_eval(ctx, [ctx.mpf(c) for c in f], value)
        lo_re, hi_re = endpoints(val.real)
        lo_im, hi_im = endpoints(val.imag)
        if lo_re <= 0 <= hi_re and lo_im <= 0 <= hi_im:
            hits.append((f, mult))
    if len(hits) != 1:
        raise PrecisionExhausted("cannot attribute root to a unique irreducible factor")
    return hits[0]
