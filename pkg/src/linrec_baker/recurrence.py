"""Integer linear recurrences and their certified exponential-polynomial expansion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import sympy

from .errors import (
    DominanceViolation,
    HypothesisViolation,
    MalformedDocument,
    MultipleRootsUnsupported,
    PrecisionExhausted,
)
from .intervals import context, endpoints, from_fraction, lower, transfer, upper
from .roots import isolate_roots

CHECK_DEPTH = 200
DEFAULT_START_BITS = 128
DEFAULT_MAX_BITS = 2**20


@dataclass(frozen=True)
class SequenceSpec:
    """u_{n+r} = s_{r-1} u_{n+r-1} + ... + s_0 u_n, coefficients listed s_0 first."""

    coefficients: tuple[int, ...]
    initial_terms: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        object.__setattr__(self, "initial_terms", tuple(int(c) for c in self.initial_terms))
        if len(self.coefficients) < 2:
            raise ValueError("order must be at least 2")
        if len(self.initial_terms) != len(self.coefficients):
            raise ValueError("need exactly one initial term per coefficient")
        if self.coefficients[0] == 0:
            raise ValueError("s_0 must be nonzero")
        if not any(self.initial_terms):
            raise ValueError("at least one initial term must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def characteristic_polynomial(self) -> list[int]:
        """Coefficients of X^r - s_{r-1}X^{r-1} - ... - s_0, highest degree first."""
        return [1] + [-c for c in reversed(self.coefficients)]

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "coefficients": list(self.coefficients),
            "initial_terms": list(self.initial_terms),
        }


PADOVAN = SequenceSpec((1, 1, 0), (1, 0, 0))
FIBONACCI = SequenceSpec((1, 1), (0, 1))
PRESETS = {"padovan": PADOVAN, "fibonacci": FIBONACCI}


def sequence_from_dict(data: dict) -> SequenceSpec:
    try:
        coeffs = data["coefficients"]
        init = data["initial_terms"]
    except (KeyError, TypeError) as exc:
        raise MalformedDocument(f"sequence needs coefficients and initial_terms: {exc}") from exc
    if "order" in data and int(data["order"]) != len(coeffs):
        raise MalformedDocument("order does not match the number of coefficients")
    return SequenceSpec(tuple(coeffs), tuple(init))


def load_sequence(path: str | Path) -> SequenceSpec:
    with open(path, encoding="utf-8") as fh:
        return sequence_from_dict(json.load(fh))


def eval_term(spec: SequenceSpec, n: int) -> int:
    if n < 0:
        raise ValueError("index must be nonnegative")
    window = list(spec.initial_terms)
    r = spec.order
    if n < r:
        return window[n]
    for _ in range(n - r + 1):
        nxt = sum(c * u for c, u in zip(spec.coefficients, window))
        window = window[1:] + [nxt]
    return window[-1]


def terms(spec: SequenceSpec, count: int) -> list[int]:
    """u_0, ..., u_{count-1}."""
    out = list(spec.initial_terms[:count])
    while len(out) < count:
        out.append(sum(c * u for c, u in zip(spec.coefficients, out[-spec.order:])))
    return out


@dataclass(frozen=True)
class SpectralData:
    """Certified roots, multiplicities and expansion coefficients, dominant root first.

    ``kappas[i]`` lists the coefficients of q_i(n) = sum_j kappas[i][j] n^j.
    """

    roots: tuple
    multiplicities: tuple[int, ...]
    kappas: tuple[tuple, ...]
    alpha1: object
    kappa1: object
    degree: int
    minimal_polynomial: tuple[int, ...]
    precision: int
    moduli: tuple = field(repr=False, default=())

    @property
    def dominant(self) -> bool:
        return len(self.roots) == 1 or lower(self.moduli[0]) > upper(self.moduli[1])


@dataclass(frozen=True)
class TailBound:
    """|u_n / (kappa_1 alpha_1^n) - 1| < K delta^{-n} for n >= n_threshold."""

    K: Fraction
    delta: Fraction
    n_threshold: int


def kappa_numerator(spec: SequenceSpec) -> list[int]:
    """Integer polynomial G with kappa_i = G(alpha_i)/P'(alpha_i) at every simple root (low-to-high)."""
    r = spec.order
    p = [-c for c in spec.coefficients] + [1]
    u = spec.initial_terms
    return [sum(p[m] * u[m - k - 1] for m in range(k + 1, r + 1)) for k in range(r)]


def _ivc_solve(ctx, matrix, rhs):
    """Gaussian elimination with partial pivoting over complex intervals."""
    n = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        best, best_lo = None, Fraction(0)
        for row in range(col, n):
            lo = lower(abs(a[row][col]))
            if lo > best_lo:
                best, best_lo = row, lo
        if best is None:
            raise PrecisionExhausted("pivot interval contains zero")
        a[col], a[best] = a[best], a[col]
        for row in range(col + 1, n):
            f = a[row][col] / a[col][col]
            for k in range(col, n + 1):
                a[row][k] = a[row][k] - f * a[col][k]
    sol = [None] * n
    for row in reversed(range(n)):
        acc = a[row][n]
        for k in range(row + 1, n):
            acc = acc - a[row][k] * sol[k]
        sol[row] = acc / a[row][row]
    return sol


def _poly_eval_real(ctx, coeffs_low_high, x):
    acc = ctx.mpf(0)
    for c in reversed(coeffs_low_high):
        acc = acc * x + c
    return acc


def solve_spectrum(spec: SequenceSpec, precision: int = DEFAULT_START_BITS) -> SpectralData:
    ctx = context(precision)
    isolated = isolate_roots(spec.characteristic_polynomial(), precision, ctx)
    mods = [abs(r.value) for r in isolated]
    order = sorted(range(len(isolated)), key=lambda i: -upper(mods[i]))
    isolated = [isolated[i] for i in order]
    mods = [mods[i] for i in order]
    if len(isolated) > 1 and not lower(mods[0]) > upper(mods[1]):
        gap = abs(upper(mods[0]) - upper(mods[1]))
        if not isolated[0].is_real or gap < Fraction(1, 2 ** (precision // 2)):
            raise DominanceViolation("no strictly dominant characteristic root")
        raise PrecisionExhausted("moduli of the two largest roots not separated")
    top = isolated[0]
    if top.multiplicity != 1:
        raise DominanceViolation("dominant root is not simple")
    if not top.is_real:
        raise DominanceViolation("dominant root is not real")

    # exponential-polynomial coefficients from u_0..u_{r-1}
    r = spec.order
    columns = []
    for root in isolated:
        for j in range(root.multiplicity):
            col = []
            power = ctx.mpc(1, 0)
            for n in range(r):
                col.append(power * (ctx.mpf(n) ** j if j else 1))
                power = power * root.value
            columns.append(col)
    matrix = [[columns[c][n] for c in range(r)] for n in range(r)]
    sol = _ivc_solve(ctx, matrix, [ctx.mpc(u, 0) for u in spec.initial_terms])
    kappas, pos = [], 0
    for root in isolated:
        kappas.append(tuple(sol[pos:pos + root.multiplicity]))
        pos += root.multiplicity

    alpha1 = top.value.real
    kappa1 = _kappa1_closed_form(ctx, spec, top, alpha1)
    k_sys = kappas[0][0]
    lo, hi = endpoints(kappa1)
    slo, shi = endpoints(k_sys.real)
    if shi < lo or slo > hi:
        raise PrecisionExhausted("linear-system and closed-form kappa_1 disagree")
    kappas[0] = (ctx.mpc(kappa1, 0),)
    data = SpectralData(
        roots=tuple(r.value for r in isolated),
        multiplicities=tuple(r.multiplicity for r in isolated),
        kappas=tuple(kappas),
        alpha1=alpha1,
        kappa1=kappa1,
        degree=len(top.factor) - 1,
        minimal_polynomial=_primitive(top.factor),
        precision=precision,
        moduli=tuple(mods),
    )
    _check_expansion(ctx, spec, data)
    return data


def _primitive(coeffs) -> tuple[int, ...]:
    from math import gcd

    g = 0
    for c in coeffs:
        g = gcd(g, int(c))
    out = [int(c) // g for c in coeffs]
    if out[0] < 0:
        out = [-c for c in out]
    return tuple(out)


def _kappa1_closed_form(ctx, spec: SequenceSpec, top, alpha1):
    """kappa_1 = G(alpha_1)/P'(alpha_1), zero exactly when the minimal polynomial divides G."""
    g = kappa_numerator(spec)
    x = sympy.Symbol("x")
    f = sympy.Poly(list(top.factor), x, domain="QQ")
    if sympy.Poly(list(reversed(g)), x, domain="QQ").rem(f).is_zero:
        raise HypothesisViolation("kappa_1 vanishes", check="kappa_1 != 0")
    charp = spec.characteristic_polynomial()
    dp = [c * (len(charp) - 1 - i) for i, c in enumerate(charp[:-1])]
    dp_low = list(reversed(dp))
    num = _poly_eval_real(ctx, [ctx.mpf(c) for c in g], alpha1)
    den = _poly_eval_real(ctx, [ctx.mpf(c) for c in dp_low], alpha1)
    if lower(abs(den)) <= 0 or (lower(num) <= 0 <= upper(num)):
        raise PrecisionExhausted("kappa_1 enclosure straddles zero")
    return num / den


def expansion_value(ctx, data: SpectralData, n: int):
    total = ctx.mpc(0, 0)
    for root, coeffs in zip(data.roots, data.kappas):
        q = ctx.mpc(0, 0)
        for j, c in enumerate(coeffs):
            c = transfer(ctx, c)
            q = q + (c * ctx.mpf(n) ** j if j else c)
        total = total + q * _ipow(ctx, transfer(ctx, root), n)
    return total


def _ipow(ctx, z, n: int):
    # complex interval powers by squaring; mpmath's ivmpc ** int is not implemented
    out, base = ctx.mpc(1, 0), z
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out


def _check_expansion(ctx, spec: SequenceSpec, data: SpectralData, depth: int = CHECK_DEPTH):
    us = terms(spec, depth + 1)
    powers = [ctx.mpc(1, 0) for _ in data.roots]
    for n, u in enumerate(us):
        total = ctx.mpc(0, 0)
        for i, coeffs in enumerate(data.kappas):
            q = coeffs[0]
            for j in range(1, len(coeffs)):
                q = q + coeffs[j] * ctx.mpf(n) ** j
            total = total + q * powers[i]
            powers[i] = powers[i] * data.roots[i]
        re_lo, re_hi = endpoints(total.real)
        if re_hi - re_lo >= Fraction(1, 4) or upper(abs(total.imag)) >= Fraction(1, 4):
            raise PrecisionExhausted(f"expansion enclosure too wide at n={n}")
        if not (re_lo > u - Fraction(1, 2) and re_hi < u + Fraction(1, 2)):
            raise PrecisionExhausted(f"expansion does not reproduce u_{n}")


def solve_spectrum_auto(spec: SequenceSpec, start: int = DEFAULT_START_BITS,
                        cap: int = DEFAULT_MAX_BITS) -> SpectralData:
    """solve_spectrum with the doubling precision schedule."""
    prec = start
    while True:
        try:
            return solve_spectrum(spec, prec)
        except PrecisionExhausted:
            if prec * 2 > cap:
                raise
            prec *= 2


def tail_bound_params(spec: SequenceSpec, spectral: SpectralData, n_threshold: int = 0,
                      check_depth: int = CHECK_DEPTH) -> TailBound:
    """K = sum_{i>=2}|kappa_i|/|kappa_1| rounded up, delta = |alpha_1/alpha_2| rounded down."""
    if any(d != 1 for d in spectral.multiplicities):
        raise MultipleRootsUnsupported("closed-form K and delta need simple roots")
    if len(spectral.roots) < 2:
        raise HypothesisViolation("sequence has a single characteristic root", check="t >= 2")
    others = [abs(c[0]) for c in spectral.kappas[1:]]
    if all(lower(o) <= 0 for o in others):
        raise HypothesisViolation("kappa_i = 0 for every i >= 2", check="some kappa_i != 0")
    k1 = abs(spectral.kappa1)
    K = upper(sum(others[1:], others[0]) / k1)
    delta = lower(abs(spectral.alpha1) / spectral.moduli[1])
    if delta <= 1:
        raise PrecisionExhausted("delta enclosure does not exceed 1")
    tail = TailBound(K, delta, n_threshold)
    check_data = spectral
    while True:
        try:
            check_tail(context(check_data.precision), spec, check_data, tail, check_depth)
            return tail
        except PrecisionExhausted:
            if check_data.precision * 2 > DEFAULT_MAX_BITS:
                raise
            check_data = solve_spectrum(spec, check_data.precision * 2)


def check_tail(ctx, spec: SequenceSpec, spectral: SpectralData, tail: TailBound,
               depth: int = CHECK_DEPTH) -> None:
    """Interval check of the tail inequality on [n_threshold, depth]; raises on failure."""
    us = terms(spec, depth + 1)
    K = from_fraction(ctx, tail.K)
    d = from_fraction(ctx, tail.delta)
    kappa1 = transfer(ctx, spectral.kappa1)
    alpha1 = transfer(ctx, spectral.alpha1)
    pw = kappa1 * alpha1 ** tail.n_threshold
    for n in range(tail.n_threshold, depth + 1):
        lhs = abs(ctx.mpf(us[n]) / pw - 1)
        rhs = K / d**n
        if not upper(lhs) < lower(rhs):
            raise PrecisionExhausted(f"tail inequality not certified at n={n}")
        pw = pw * alpha1
