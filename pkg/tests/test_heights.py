import math
import random
from fractions import Fraction

import mpmath
import pytest
import sympy

from linrec_baker.errors import NotRealPositive, ZeroElement
from linrec_baker.heights import FieldElement, a_value, height_from_minpoly, log_height, rational_height
from linrec_baker.recurrence import PADOVAN, solve_spectrum_auto

MINPOLY = (1, 0, -1, -1)  # X^3 - X - 1


@pytest.fixture(scope="module")
def alpha():
    return solve_spectrum_auto(PADOVAN).alpha1


def elem(cs, alpha):
    return FieldElement.from_poly(cs, MINPOLY, alpha)


def encloses(hv, value, tol=1e-15):
    return float(hv.h_lower) - tol <= value <= float(hv.h_upper) + tol


def sympy_height(cs) -> float:
    """Independent oracle: minimal polynomial from sympy, roots from mpmath."""
    x = sympy.Symbol("x")
    a = sympy.CRootOf(x**3 - x - 1, 0)
    expr = sum(sympy.Rational(c.numerator, c.denominator) * a**j for j, c in enumerate(cs))
    mp = sympy.Poly(sympy.minimal_polynomial(expr, x), x)
    coeffs = [int(c) for c in mp.all_coeffs()]
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    with mpmath.workdps(50):
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200) if len(coeffs) > 2 else [
            mpmath.mpf(-coeffs[1]) / coeffs[0]]
        total = mpmath.log(abs(coeffs[0])) + sum(max(mpmath.mpf(0), mpmath.log(abs(r))) for r in roots)
        return float(total / (len(coeffs) - 1))


def test_rational_heights():
    assert rational_height(Fraction(2)) == 2
    assert rational_height(Fraction(-3, 7)) == 7
    h = height_from_minpoly((1, -2))
    assert encloses(h, math.log(2))
    assert height_from_minpoly((1, -1)).h_upper < Fraction(1, 10**30)


def test_height_of_alpha(alpha):
    h = log_height(elem([0, 1], alpha))
    assert encloses(h, math.log(1.324717957244746) / 3)
    assert abs(float(h.h) - 0.0937332) < 1e-6


def test_height_of_kappa(alpha):
    kappa = 1 / elem([3, 2], alpha)
    x = sympy.Symbol("x")
    oracle = sympy.minimal_polynomial(1 / (2 * sympy.CRootOf(x**3 - x - 1, 0) + 3), x)
    assert kappa.minimal_polynomial == tuple(int(c) for c in sympy.Poly(oracle, x).all_coeffs())
    assert encloses(log_height(kappa), math.log(23) / 3)


def test_zero_has_no_height(alpha):
    with pytest.raises(ZeroElement):
        log_height(elem([0], alpha))


def test_a_values(alpha):
    assert a_value(FieldElement.rational(7, MINPOLY, alpha), 3).A >= 3 * Fraction(math.log(7))
    aa = a_value(elem([0, 1], alpha), 3)
    assert abs(float(aa.A) - math.log(1.324717957244746)) < 1e-12
    ka = a_value(1 / elem([3, 2], alpha), 3)
    assert abs(float(ka.A) - math.log(23)) < 1e-12
    with pytest.raises(NotRealPositive):
        a_value(elem([0, -1], alpha), 3)


def test_heights_match_sympy_oracle(alpha):
    rng = random.Random(7)
    for _ in range(8):
        cs = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3)]
        if not any(cs):
            continue
        assert encloses(log_height(elem(cs, alpha)), sympy_height(cs), 1e-12)


def random_elements(alpha, count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        cs = [Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(3)]
        if any(cs):
            out.append(elem(cs, alpha))
    return out


def overlaps(a, b, tol=Fraction(1, 10**20)):
    return a.h_lower - tol <= b.h_upper and b.h_lower - tol <= a.h_upper


def test_height_identities(alpha):
    for x in random_elements(alpha, 50, 11):
        h = log_height(x)
        assert overlaps(log_height(1 / x), h)
        h2 = log_height(x * x)
        assert h2.h_lower - Fraction(1, 10**20) <= 2 * h.h_upper and 2 * h.h_lower <= h2.h_upper + Fraction(1, 10**20)
        hm2 = log_height((x * x).inverse())
        assert overlaps(hm2, h2)
