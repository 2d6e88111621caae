import math
import random
from fractions import Fraction

import pytest
import sympy

from linrec_baker.errors import AmbiguousFloor, SearchExhausted, SingularMatrix, TestFailed
from linrec_baker.intervals import context, endpoints
from linrec_baker.lattice import (
    DEFAULT_GAMMAS, LatticeProblem, auto_tune, build_lattice, check_lattice_equality, det_int, find_integer_relation,
    index_bound_from_form, is_reduced, lemma22_apply, reduce_basis, shortest_vector_floor,
)
from linrec_baker.pipeline import ALPHA, KAPPA, ThetaSource, sequence_constants, theta_enclosures
from linrec_baker.recurrence import PADOVAN

SYMBOLS = ["log:2", "log:3", "log:5", "log:7", KAPPA, ALPHA]


def exact(*qs):
    return tuple((Fraction(q), Fraction(q)) for q in qs)


def log_enclosures(ns, bits):
    ctx = context(bits)
    return tuple(endpoints(ctx.log(n)) for n in ns)


def test_build_lattice_small():
    m = build_lattice(LatticeProblem(exact(1, Fraction(3, 2)), 10, Fraction(1), 1))
    assert m == ((1, 0), (10, 15))
    sqrt2 = (Fraction(14142135623, 10**10), Fraction(14142135624, 10**10))
    m = build_lattice(LatticeProblem(((Fraction(1), Fraction(1)), sqrt2), 100, Fraction(1), 1))
    assert m[1] == (100, 141)


def test_build_lattice_fractional_gamma():
    m = build_lattice(LatticeProblem(exact(1, 2, Fraction(1, 3)), 10, Fraction(13, 5), 1))
    # whole matrix scaled by the denominator 5
    assert m == ((13, 0, 0), (0, 13, 0), (5 * 26, 5 * 52, 5 * 8))


def test_ambiguous_floor():
    with pytest.raises(AmbiguousFloor):
        build_lattice(LatticeProblem(((Fraction(1), Fraction(1)), (Fraction(99, 100), Fraction(101, 100))), 10,
                                     Fraction(1), 1))


def test_reduce_identity():
    cert = reduce_basis(((1, 0), (0, 1)))
    assert cert.reduced == ((1, 0), (0, 1)) and cert.transform == ((1, 0), (0, 1))
    assert shortest_vector_floor(cert, "first_vector") == Fraction(1, 2)


def test_reduce_skewed():
    cert = reduce_basis(((1, 0), (10**6, 1)))
    assert sum(x * x for x in cert.reduced[0]) == 1
    assert shortest_vector_floor(cert, "first_vector") == Fraction(1, 2)
    assert check_lattice_equality(cert) and is_reduced(cert.reduced)


def test_singular_matrix():
    with pytest.raises(SingularMatrix):
        reduce_basis(((1, 2), (2, 4)))


def test_det_int():
    rng = random.Random(1)
    for n in range(1, 6):
        m = [[rng.randint(-50, 50) for _ in range(n)] for _ in range(n)]
        assert det_int(m) == sympy.Matrix(m).det()
    assert det_int(((0, 1), (1, 0))) == -1
    assert det_int(((1, 2), (2, 4))) == 0


def test_unimodularity_random():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(2, 6)
        while True:
            m = tuple(tuple(rng.randint(-10**8, 10**8) for _ in range(n)) for _ in range(n))
            if det_int(m):
                break
        cert = reduce_basis(m)
        assert det_int(cert.transform) in (1, -1)
        assert check_lattice_equality(cert)
        assert is_reduced(cert.reduced)
        assert shortest_vector_floor(cert, "best") >= shortest_vector_floor(cert, "first_vector")


def test_floor_stability_under_doubled_precision():
    rng = random.Random(5)
    checked = 0
    for _ in range(100):
        n = rng.randint(3, 7)
        ns = rng.sample(range(2, 2000), n)
        e = rng.randint(10, 120)
        g = rng.choice(DEFAULT_GAMMAS)
        bits = int((e + 2) * math.log2(10)) + 40
        base = LatticeProblem(log_enclosures(ns, bits), 10**e, g, 1)
        fine = LatticeProblem(log_enclosures(ns, 2 * bits), 10**e, g, 1)
        try:
            m = build_lattice(base)
        except AmbiguousFloor:
            continue
        assert build_lattice(fine) == m
        checked += 1
    assert checked >= 95


def planted_problem(rng, X):
    """theta_i = a_i / Q with a planted x* of size <= X giving a tiny |Lambda|."""
    Q = 10**12
    a1, a2 = rng.randint(10**11, 10**12), rng.randint(10**11, 10**12)
    x = [rng.randint(-X, X), rng.randint(-X, X), rng.choice([v for v in range(-X, X + 1) if v])]
    target = x[0] * a1 + x[1] * a2
    a3 = round(Fraction(-target, x[2]))  # then |x . a| <= |x_3| / 2
    return (a1, a2, a3), Q


def min_lambda(a, Q, X):
    best = None
    r = range(-X, X + 1)
    for x1 in r:
        for x2 in r:
            s12 = x1 * a[0] + x2 * a[1]
            for x3 in r:
                if x1 == x2 == x3 == 0:
                    continue
                v = abs(s12 + x3 * a[2])
                if best is None or v < best:
                    best = v
    return Fraction(best, Q)


def test_lemma22_soundness_planted():
    rng = random.Random(11)
    passed = 0
    for _ in range(12):
        X = 6
        a, Q = planted_problem(rng, X)
        thetas = exact(*(Fraction(v, Q) for v in a))
        true_min = min_lambda(a, Q, X)
        for e in range(6, 18):
            for g in (Fraction(1), Fraction(13, 5), Fraction(8)):
                prob = LatticeProblem(thetas, 10**e, g, X)
                cert = reduce_basis(build_lattice(prob), g.denominator)
                try:
                    done = lemma22_apply(prob, cert)
                except TestFailed:
                    continue
                passed += 1
                assert true_min > done.lambda_lower
    assert passed > 0


def test_auto_tune_trivial():
    res = auto_tune(exact(1, Fraction(3, 2)), 1, span=6)
    assert res.gamma == DEFAULT_GAMMAS[0] or res.scale * res.gamma <= 10**6


def test_auto_tune_exhausted():
    # theta_2 = 2 theta_1 makes x = (2, -1) an exact relation, so no C can pass
    with pytest.raises(SearchExhausted):
        auto_tune(exact(Fraction(1, 3), Fraction(2, 3)), 5, gammas=(Fraction(1),), span=3)


@pytest.fixture(scope="module")
def padovan_thetas():
    src = ThetaSource(PADOVAN)
    bits = 1200
    return theta_enclosures(SYMBOLS, bits, src._spectral_logs(bits))


def passing_orders(thetas, scale, gamma, x_bound):
    out = []
    n = len(thetas)
    for j in range(n):
        order = [i for i in range(n) if i != j] + [j]
        prob = LatticeProblem(tuple(thetas[i] for i in order), scale, Fraction(gamma), x_bound)
        cert = reduce_basis(build_lattice(prob), Fraction(gamma).denominator)
        assert check_lattice_equality(cert)
        try:
            out.append((j, lemma22_apply(prob, cert)))
        except TestFailed:
            pass
    return out


@pytest.mark.parametrize("scale,gamma,x_bound,lam", [
    (10**150, Fraction(11), 2456 * 10**21, Fraction("2.233e-127")),
    (10**310, Fraction(13, 5), 1325038 * 10**45, Fraction("5.0963e-260")),
    (10**183, Fraction(4), 8794 * 10**26, Fraction("2.1985e-154")),
], ids=["s_unit", "ratio_pass1", "ratio_pass2"])
def test_published_lattice_parameters(padovan_thetas, scale, gamma, x_bound, lam):
    ok = passing_orders(padovan_thetas, scale, gamma, x_bound)
    assert ok, "no column order passes"
    for _, cert in ok:
        assert cert.lambda_lower == Fraction(x_bound) / (scale * gamma)
        # the printed bounds are X_1 / (C gamma) to five significant digits
        assert abs(cert.lambda_lower / lam - 1) < Fraction(1, 10**3)
    # enlarging C by ten keeps every passing order passing
    bigger = {j for j, _ in passing_orders(padovan_thetas, 10 * scale, gamma, x_bound)}
    assert {j for j, _ in ok} <= bigger


def test_index_bound_milestones():
    c = sequence_constants(PADOVAN)
    eps, eps1 = Fraction("6.341253e-5"), Fraction("6.341655e-5")
    assert index_bound_from_form(Fraction("2.233e-127"), c.K, c.delta, eps1, 1) == 695
    la_over_l11 = Fraction(math.log(1.324717957244746) / math.log(11))

    def mult(m):
        return (1 + eps) * m * la_over_l11 + Fraction("3.897329e26")

    m1 = index_bound_from_form(Fraction("5.0963e-260"), c.K, c.delta, eps1, mult, start=3399751 * 10**18)
    assert m1 == 1564
    assert index_bound_from_form(Fraction("2.1985e-154"), c.K, c.delta, eps1, mult, start=m1) == 988


def test_index_bound_solves_inequality():
    K, d, e1 = Fraction(5), Fraction(3, 2), Fraction(1, 100)
    for L in (Fraction(1, 10**5), Fraction(1, 10**40)):
        b = index_bound_from_form(L, K, d, e1, 3)
        assert (1 + e1) * 3 * K / d**b > L >= (1 + e1) * 3 * K / d ** (b + 1)


def test_integer_relation_probe():
    encl = log_enclosures([2, 3, 6], 256)
    rel = find_integer_relation(encl)
    assert rel is not None and sorted(abs(c) for c in rel) == [1, 1, 1]
    assert find_integer_relation(log_enclosures([2, 3, 5], 256), coeff_bound=10**4) is None


def test_auto_tune_min_exponent():
    thetas = log_enclosures([2, 3, 5], 400)
    base = auto_tune(thetas, 10**6)
    e = len(str(base.scale)) - 1
    raised = auto_tune(thetas, 10**6, min_exponent=e + 3)
    assert len(str(raised.scale)) - 1 >= e + 3
    with pytest.raises(SearchExhausted) as info:
        auto_tune(thetas, 10**6, span=1, min_exponent=0, start_shift=-100)
    assert info.value.largest_c == 0
