"""Scaled lattices for linear forms in logarithms and their exact reduction.

The matrix has ``gamma`` on the first n-1 diagonal entries and
``floor(C gamma theta_i)`` in the last row; its columns generate the lattice.
A non-integral ``gamma = p/q`` is handled by scaling the whole matrix by q,
so every entry stays an exact integer; thresholds are scaled identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .errors import AmbiguousFloor, PrecisionExhausted, SearchExhausted, SingularMatrix, TestFailed
from .intervals import context, from_fraction, upper

DEFAULT_GAMMAS = (Fraction(1), Fraction(2), Fraction(13, 5), Fraction(4), Fraction(8), Fraction(11), Fraction(16))


@dataclass(frozen=True)
class LatticeProblem:
    """theta_i as rational enclosures (lo, hi); scale C; weight gamma; coefficient bound X_1."""

    thetas: tuple[tuple[Fraction, Fraction], ...]
    scale: int
    gamma: Fraction
    x_bound: int
    labels: tuple[str, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.thetas)

    def with_params(self, scale: int, gamma) -> "LatticeProblem":
        return replace(self, scale=int(scale), gamma=Fraction(gamma))


@dataclass(frozen=True)
class ReductionCertificate:
    matrix: tuple[tuple[int, ...], ...]          # rows of M (columns generate the lattice)
    reduced: tuple[tuple[int, ...], ...]         # reduced basis vectors
    transform: tuple[tuple[int, ...], ...]       # reduced[i] = sum_j transform[i][j] * column_j(M)
    gamma_denominator: int = 1
    l2_floor: Fraction | None = None             # lower bound on l(M)^2, in matrix units
    threshold2: Fraction | None = None           # q^2 X_1^2 ((n+1)^2 + (n-1) gamma^2)
    lambda_lower: Fraction | None = None         # X_1 / (C gamma)
    index_bound: int | None = None

    @property
    def dimension(self) -> int:
        return len(self.matrix)


# ---------------------------------------------------------------- construction
def floor_entry(scale: int, gamma: Fraction, theta: tuple[Fraction, Fraction], index: int) -> int:
    lo, hi = theta
    a, b = scale * gamma * lo, scale * gamma * hi
    if b - a >= Fraction(1, 4):
        raise PrecisionExhausted(f"enclosure of theta_{index} too wide for C gamma = {scale * gamma}")
    fa, fb = math.floor(a), math.floor(b)
    if fa != fb:
        raise AmbiguousFloor(index)
    return fa


def build_lattice(problem: LatticeProblem) -> tuple[tuple[int, ...], ...]:
    n = problem.dimension
    g = Fraction(problem.gamma)
    q = g.denominator
    rows = []
    for i in range(n - 1):
        rows.append(tuple(g.numerator if j == i else 0 for j in range(n)))
    rows.append(tuple(q * floor_entry(problem.scale, g, th, i) for i, th in enumerate(problem.thetas)))
    return tuple(rows)


def columns(matrix) -> list[list[int]]:
    n = len(matrix)
    return [[matrix[i][j] for i in range(n)] for j in range(n)]


# ---------------------------------------------------------------- reduction
def _dot(x, y) -> int:
    return sum(p * q for p, q in zip(x, y))


def lll_reduce(basis: Sequence[Sequence[int]]):
    """Integral LLL with parameter 3/4 (exact arithmetic throughout).

    Returns (reduced vectors, transform H) with reduced = H * basis.
    """
    b = [list(r) for r in basis]
    n = len(b)
    H = [[int(i == j) for j in range(n)] for i in range(n)]
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def gram_schmidt_row(k):
        for j in range(k + 1):
            u = _dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise SingularMatrix("basis vectors are linearly dependent")
                d[k + 1] = u

    def size_reduce(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            bl, Hl = b[l], H[l]
            b[k] = [x - q * y for x, y in zip(b[k], bl)]
            H[k] = [x - q * y for x, y in zip(H[k], Hl)]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    gram_schmidt_row(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_schmidt_row(k)
        size_reduce(k, k - 1)
        if 4 * d[k + 1] * d[k - 1] < 3 * d[k] * d[k] - 4 * lam[k][k - 1] ** 2:
            b[k], b[k - 1] = b[k - 1], b[k]
            H[k], H[k - 1] = H[k - 1], H[k]
            for j in range(k - 1):
                lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
            mu = lam[k][k - 1]
            B = (d[k - 1] * d[k + 1] + mu * mu) // d[k]
            for i in range(k + 1, kmax + 1):
                t = lam[i][k]
                lam[i][k] = (d[k + 1] * lam[i][k - 1] - mu * t) // d[k]
                lam[i][k - 1] = (B * t + mu * lam[i][k]) // d[k + 1]
            d[k] = B
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                size_reduce(k, l)
            k += 1
    return b, H


def reduce_basis(matrix, gamma_denominator: int = 1) -> ReductionCertificate:
    """Reduce the lattice spanned by the columns of ``matrix``."""
    cols = columns(matrix)
    if det_int(matrix) == 0:
        raise SingularMatrix("lattice matrix is singular")
    reduced, H = lll_reduce(cols)
    return ReductionCertificate(
        matrix=tuple(tuple(r) for r in matrix),
        reduced=tuple(tuple(v) for v in reduced),
        transform=tuple(tuple(h) for h in H),
        gamma_denominator=gamma_denominator,
    )


def det_int(matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(r) for r in matrix]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def gram_determinants(vectors) -> list[int]:
    """d_0 = 1, d_i = det of the Gram matrix of the first i vectors; |b_i*|^2 = d_{i+1}/d_i."""
    n = len(vectors)
    gram = [[_dot(vectors[i], vectors[j]) for j in range(n)] for i in range(n)]
    out = [1]
    for i in range(1, n + 1):
        out.append(det_int([row[:i] for row in gram[:i]]))
    return out


def is_reduced(vectors, delta: Fraction = Fraction(3, 4)) -> bool:
    """Check size reduction and the Lovasz condition exactly."""
    n = len(vectors)
    d = gram_determinants(vectors)
    bstar_sq = [Fraction(d[i + 1], d[i]) for i in range(n)]
    # mu_{ij} via exact rational Gram-Schmidt
    bstar = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in vectors[i]]
        for j in range(i):
            mu[i][j] = _dot(vectors[i], bstar[j]) / bstar_sq[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if bstar_sq[k] < (delta - mu[k][k - 1] ** 2) * bstar_sq[k - 1]:
            return False
    return True


def mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def check_lattice_equality(cert: ReductionCertificate) -> bool:
    """transform * columns(M) == reduced and det(transform) = +-1."""
    if det_int(cert.transform) not in (1, -1):
        return False
    prod = mat_mul([list(r) for r in cert.transform], columns(cert.matrix))
    return [tuple(r) for r in prod] == [tuple(r) for r in cert.reduced]


# ---------------------------------------------------------------- bounds
def shortest_vector_floor(cert: ReductionCertificate, method: str = "best") -> Fraction:
    """Certified lower bound for l(M)^2 (matrix units).

    ``first_vector``: |b_1|^2 / 2^{n-1}, the reduced-basis guarantee.
    ``gram_schmidt``: min_i |b_i*|^2, valid for any basis.
    ``best``: the larger of the two.
    """
    vecs = cert.reduced
    n = len(vecs)
    first = Fraction(_dot(vecs[0], vecs[0]), 2 ** (n - 1))
    if method == "first_vector":
        return first
    d = gram_determinants(vecs)
    gs = min(Fraction(d[i + 1], d[i]) for i in range(n))
    if method == "gram_schmidt":
        return gs
    if method == "best":
        return max(first, gs)
    raise ValueError(f"unknown method {method!r}")


def lemma22_threshold2(n: int, x_bound: int, gamma: Fraction) -> Fraction:
    """q^2 X_1^2 ((n+1)^2 + (n-1) gamma^2), the squared test threshold in matrix units."""
    g = Fraction(gamma)
    q = g.denominator
    return q * q * x_bound * x_bound * ((n + 1) ** 2 + (n - 1) * g * g)


def _proof_form_holds(l2: Fraction, n: int, x_bound: int, gamma: Fraction) -> bool:
    """sqrt(l^2 - (n-1) gamma^2 X^2) - n X >= X, rearranged without square roots."""
    g = Fraction(gamma)
    q2 = g.denominator ** 2
    rest = l2 - q2 * (n - 1) * g * g * x_bound * x_bound
    return rest >= 0 and rest >= q2 * ((n + 1) * x_bound) ** 2


def lemma22_apply(problem: LatticeProblem, cert: ReductionCertificate,
                  method: str = "best") -> ReductionCertificate:
    """Return the certificate completed with |Lambda| > X_1/(C gamma); raise TestFailed otherwise."""
    n = problem.dimension
    l2 = shortest_vector_floor(cert, method)
    thr = lemma22_threshold2(n, problem.x_bound, problem.gamma)
    passed = l2 > thr
    if passed and not _proof_form_holds(l2, n, problem.x_bound, problem.gamma):
        raise AssertionError("threshold and proof inequality disagree")
    if not passed:
        raise TestFailed(f"l(M)^2 >= {float(l2):.4e} does not exceed threshold {float(thr):.4e}")
    lam = Fraction(problem.x_bound) / (problem.scale * Fraction(problem.gamma))
    return replace(cert, l2_floor=l2, threshold2=thr, lambda_lower=lam)


def index_bound_from_form(L: Fraction, K: Fraction, delta: Fraction, eps1: Fraction,
                          multiplier=1, start: int | None = None) -> int:
    """Largest idx with (1+eps1) * mult * K * delta^{-idx} > L.

    ``multiplier`` is a number or a nondecreasing function of idx; in the
    latter case the bound is iterated downwards from ``start``.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    ctx = context(256)
    logd = ctx.log(from_fraction(ctx, delta))

    def bound_for(mult) -> int:
        val = ctx.log(from_fraction(ctx, (1 + Fraction(eps1)) * Fraction(mult) * Fraction(K) / Fraction(L))) / logd
        hi = upper(val)
        return -((-hi.numerator) // hi.denominator) - 1

    if not callable(multiplier):
        return max(bound_for(multiplier), -1)
    if start is None:
        raise ValueError("a start bound is needed for an index-dependent multiplier")
    cur = start
    while True:
        nxt = min(cur, bound_for(multiplier(cur)))
        if nxt >= cur:
            return max(cur, -1)
        cur = nxt


# ---------------------------------------------------------------- tuning
@dataclass(frozen=True)
class TuneResult:
    scale: int
    gamma: Fraction
    certificate: ReductionCertificate
    attempts: int
    order: tuple[int, ...] = ()


def _log10_frac(x: Fraction) -> float:
    return math.log10(x.numerator) - math.log10(x.denominator) if x > 0 else float("-inf")


def heuristic_exponent(n: int, x_bound: int, gamma: Fraction, theta_last: Fraction) -> float:
    """log10 of the C at which the Gaussian heuristic predicts l(M) reaches the threshold."""
    g = Fraction(gamma)
    thr = math.log10(x_bound) + 0.5 * math.log10(float((n + 1) ** 2 + (n - 1) * g * g))
    need = n * thr + (n / 2) * math.log10(2 * math.pi * math.e / n)
    have = (n - 1) * _log10_frac(g) + _log10_frac(g) + _log10_frac(abs(theta_last))
    return need - have


def auto_tune(thetas, x_bound: int, gammas: Sequence = DEFAULT_GAMMAS, span: int = 12,
              labels: tuple[str, ...] = (), method: str = "best", start_shift: int = -1,
              last_choices: Sequence[int] | None = None, min_exponent: int = 0) -> TuneResult:
    """Search (C, gamma) in order of increasing C gamma until the shortest-vector test passes.

    ``last_choices`` lists the theta indices tried in the last column for each
    (C, gamma); by default only the given order is used. The winning column
    order is reported as a permutation of the input indices. No exponent below
    ``min_exponent`` is tried.
    """
    thetas = tuple((Fraction(a), Fraction(b)) for a, b in thetas)
    n = len(thetas)
    labels = tuple(labels) or tuple(str(i) for i in range(n))
    choices = [n - 1] if last_choices is None else list(last_choices)
    orders = [tuple(i for i in range(n) if i != j) + (j,) for j in choices]
    cands = []
    for g in gammas:
        g = Fraction(g)
        for order in orders:
            last = thetas[order[-1]]
            e0 = max(0, min_exponent,
                     math.floor(heuristic_exponent(n, x_bound, g, (last[0] + last[1]) / 2)) + start_shift)
            for e in range(e0, e0 + span):
                cands.append((e + _log10_frac(g), e, g, order))
    cands.sort(key=lambda c: (c[0], c[2], c[3]))
    attempts = 0
    largest = 0
    for _, e, g, order in cands:
        problem = LatticeProblem(tuple(thetas[i] for i in order), 10**e, g, x_bound,
                                 tuple(labels[i] for i in order))
        largest = max(largest, e)
        attempts += 1
        try:
            matrix = build_lattice(problem)
            cert = reduce_basis(matrix, g.denominator)
            cert = lemma22_apply(problem, cert, method)
        except (TestFailed, SingularMatrix):
            continue
        return TuneResult(10**e, g, cert, attempts, order)
    raise SearchExhausted(f"no (C, gamma) passed up to C = 10^{largest}", largest_c=largest)


# ---------------------------------------------------------------- independence probe
def find_integer_relation(values: Sequence[tuple[Fraction, Fraction]], coeff_bound: int = 10**6,
                          bits: int | None = None) -> list[int] | None:
    """Search a small integer relation sum c_i v_i ~ 0 among real numbers given by enclosures.

    Heuristic: returns a coefficient vector when the reduced lattice exposes one
    with |c_i| <= coeff_bound and a residual below the enclosure noise, else None.
    """
    n = len(values)
    width = max(hi - lo for lo, hi in values) or Fraction(1, 2**256)
    if bits is None:
        bits = max(64, min(2048, int(-math.log2(width)) - 8))
    scale = 2**bits
    mids = [(lo + hi) / 2 for lo, hi in values]
    basis = []
    for i in range(n):
        row = [int(i == j) for j in range(n)] + [round(scale * mids[i])]
        basis.append(row)
    reduced, _ = lll_reduce(basis)
    for vec in reduced:
        coeffs = vec[:n]
        if max(abs(c) for c in coeffs) > coeff_bound or not any(coeffs):
            continue
        lo_sum = sum(c * (lo if c > 0 else hi) for c, (lo, hi) in zip(coeffs, values))
        hi_sum = sum(c * (hi if c > 0 else lo) for c, (lo, hi) in zip(coeffs, values))
        if lo_sum <= 0 <= hi_sum or max(abs(lo_sum), abs(hi_sum)) < Fraction(1, 2 ** (bits // 2)):
            return list(coeffs)
    return None
