from fractions import Fraction

import mpmath
import pytest

from linrec_baker.errors import DominanceViolation, MultipleRootsUnsupported
from linrec_baker.intervals import context, lower, upper


def mid(x) -> float:
    return float((lower(x) + upper(x)) / 2)
from linrec_baker.recurrence import (
    FIBONACCI, PADOVAN, SequenceSpec, check_tail, eval_term, expansion_value, load_sequence, solve_spectrum,
    solve_spectrum_auto, tail_bound_params, terms,
)


def test_padovan_terms():
    listed = [1, 0, 0, 1, 0, 1, 1, 1, 2, 2, 3, 4, 5, 7, 9, 12, 16, 21, 28, 37, 49, 65, 86, 114, 151, 200]
    assert terms(PADOVAN, len(listed)) == listed
    assert eval_term(PADOVAN, 0) == 1
    assert eval_term(PADOVAN, 8) == 2
    assert eval_term(PADOVAN, 25) == 200
    assert eval_term(PADOVAN, 27) == 351


def test_eval_term_matches_terms():
    us = terms(PADOVAN, 300)
    for n in (0, 1, 2, 3, 50, 299):
        assert eval_term(PADOVAN, n) == us[n]


def test_spec_validation():
    with pytest.raises(ValueError):
        SequenceSpec((1,), (1,))
    with pytest.raises(ValueError):
        SequenceSpec((0, 1), (0, 1))
    with pytest.raises(ValueError):
        SequenceSpec((1, 1), (0, 0))


def test_load_sequence(tmp_path):
    p = tmp_path / "seq.json"
    p.write_text('{"order": 3, "coefficients": [1, 1, 0], "initial_terms": [1, 0, 0]}')
    assert load_sequence(p) == PADOVAN


def test_padovan_spectrum():
    sd = solve_spectrum_auto(PADOVAN)
    assert sd.degree == 3 and sd.dominant
    assert abs(mid(sd.alpha1) - 1.324717957244746) < 1e-12
    others = sorted((complex(mid(r.real), mid(r.imag)) for r in sd.roots[1:]), key=lambda z: z.imag)
    assert abs(others[1] - complex(-0.662358978622373, 0.562279512062301)) < 1e-12
    assert abs(others[0] - others[1].conjugate()) < 1e-12
    a = mpmath.findroot(lambda x: x**3 - x - 1, 1.3)
    assert abs(mid(sd.kappa1) - float(1 / (2 * a + 3))) < 1e-12


def test_fibonacci_spectrum():
    sd = solve_spectrum_auto(FIBONACCI)
    phi = (1 + mpmath.sqrt(5)) / 2
    assert abs(mpmath.mpf(lower(sd.alpha1).numerator) / lower(sd.alpha1).denominator - phi) < 1e-30
    assert abs(mpmath.mpf(lower(sd.kappa1).numerator) / lower(sd.kappa1).denominator - 1 / mpmath.sqrt(5)) < 1e-30


def test_expansion_reproduces_terms():
    sd = solve_spectrum_auto(PADOVAN)
    ctx = context(sd.precision)
    us = terms(PADOVAN, 201)
    for n in range(201):
        v = expansion_value(ctx, sd, n)
        assert upper(v.real) - lower(v.real) < Fraction(1, 4)
        assert round((lower(v.real) + upper(v.real)) / 2) == us[n]


def test_tail_bound_padovan():
    sd = solve_spectrum_auto(PADOVAN)
    tb = tail_bound_params(PADOVAN, sd, 27)
    assert abs(float(tb.K) - 5.599815) < 1e-5
    assert abs(float(tb.delta) - 1.524702) < 1e-5
    fine = solve_spectrum(PADOVAN, 2 * sd.precision)
    check_tail(context(fine.precision), PADOVAN, fine, tb, 200)


def test_tail_bound_fibonacci():
    sd = solve_spectrum_auto(FIBONACCI)
    tb = tail_bound_params(FIBONACCI, sd, 1)
    phi2 = float(((1 + mpmath.sqrt(5)) / 2) ** 2)
    assert abs(float(tb.K) - 1) < 1e-20
    assert abs(float(tb.delta) - phi2) < 1e-15
    assert tb.K >= 1 and tb.delta <= Fraction(phi2) + Fraction(1, 10**12)


def test_determinism():
    a, b = solve_spectrum(PADOVAN, 256), solve_spectrum(PADOVAN, 256)
    assert a.alpha1 == b.alpha1 and a.kappa1 == b.kappa1


def test_dominance_violation():
    # X^2 - 1 has roots 1 and -1 of equal modulus
    with pytest.raises(DominanceViolation):
        solve_spectrum_auto(SequenceSpec((1, 0), (1, 2)), cap=1024)


def test_multiple_roots_rejected_by_tail_bound():
    # X^3 - 3X^2 + 4 = (X - 2)^2 (X + 1): the dominant root is double, so take X^3 - X^2 - X + 1 = (X-1)^2 (X+1)
    # instead use (X - 3)(X - 1)^2 = X^3 - 5X^2 + 7X - 3: simple dominant root 3, double root 1
    spec = SequenceSpec((3, -7, 5), (1, 2, 5))
    sd = solve_spectrum_auto(spec)
    assert sd.multiplicities[0] == 1 and 2 in sd.multiplicities
    with pytest.raises(MultipleRootsUnsupported):
        tail_bound_params(spec, sd, 0)
