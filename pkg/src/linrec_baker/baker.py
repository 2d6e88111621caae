"""Matveev's lower bound, the preliminary S-unit index bound and the ratio-equation constant cascade.

All constants are evaluated in interval arithmetic and handed out as exact
rational upper bounds. ``form="strict"`` multiplies the displayed closed form
C(n) by D^2 max(1, n/6), which is how the bound is stated in Matveev's
original theorem; ``form="displayed"`` uses C(n) exactly as printed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import mpmath

from .errors import HypothesisViolation, NoConvergence
from .intervals import context, endpoints, from_fraction, interval, lower, upper

CASCADE_BITS = 256
MATVEEV_FORMS = ("strict", "displayed")
LOG_TERMS = ("one_plus_eps1_K", "two_K")


# ---------------------------------------------------------------- Matveev
def matveev_c(n: int, D: int, ctx=None):
    """Interval enclosure of the closed form C(n) at degree D."""
    if n < 2 or D < 1:
        raise ValueError("need n >= 2 and D >= 1")
    ctx = ctx or context(CASCADE_BITS)
    e = ctx.e
    tail = ctx.mpf(44) / 10 * n + ctx.mpf(55) / 10 * ctx.log(n) + 7 + 2 * ctx.log(D) + ctx.log(1 + ctx.log(D))
    return (ctx.mpf(16) / ctx.factorial(n) * e**n * (2 * n + 3) * (n + 2)
            * ctx.mpf(4 * (n + 1)) ** (n + 1) * (e * n / 2) * tail)


def matveev_constant(n: int, D: int, form: str = "strict", ctx=None):
    ctx = ctx or context(CASCADE_BITS)
    c = matveev_c(n, D, ctx)
    if form == "strict":
        return c * D**2 * max(ctx.mpf(1), ctx.mpf(n) / 6)
    if form == "displayed":
        return c
    raise ValueError(f"unknown Matveev form {form!r}")


def c1_constant(D: int, ctx=None):
    ctx = ctx or context(CASCADE_BITS)
    return ctx.mpf(3) / 2 * ctx.e * D * (1 + ctx.log(D))


@dataclass(frozen=True)
class MatveevInput:
    n: int
    D: int
    A_values: tuple[Fraction, ...]
    B: Fraction
    form: str = "strict"

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if len(self.A_values) != self.n or any(a <= 0 for a in self.A_values):
            raise ValueError("need n positive A-values")

    @property
    def omega(self) -> Fraction:
        out = Fraction(1)
        for a in self.A_values:
            out *= a
        return out


def matveev_lower_bound(inp: MatveevInput, ctx=None) -> Fraction:
    """Lower bound for log|Lambda|: -C(n) Omega log(c_1 B), rounded down."""
    ctx = ctx or context(CASCADE_BITS)
    c = matveev_constant(inp.n, inp.D, inp.form, ctx)
    val = -c * from_fraction(ctx, inp.omega) * ctx.log(c1_constant(inp.D, ctx) * from_fraction(ctx, inp.B))
    return lower(val)


# ---------------------------------------------------------------- eta
def _eta_residual_sign(ctx, eta: Fraction, Y: Fraction) -> int:
    """Sign of eta*Y*log Y - Y*log(eta*Y*log Y); 0 when not certified."""
    y = from_fraction(ctx, Y)
    z = from_fraction(ctx, eta) * y * ctx.log(y)
    g = z - y * ctx.log(z)
    if lower(g) > 0:
        return 1
    if upper(g) < 0:
        return -1
    return 0


def _eta_newton(Y: Fraction, bits: int) -> Fraction | None:
    """Newton estimate of eta from z = Y log z on the branch z > Y; certified by the caller."""
    with mpmath.workprec(bits + 32):
        y = mpmath.mpf(Y.numerator) / Y.denominator
        z = y * mpmath.log(y)
        for _ in range(200):
            step = (z - y * mpmath.log(z)) / (1 - y / z)
            z -= step
            if abs(step) < z * mpmath.mpf(2) ** (-bits - 16):
                break
        eta = z / (y * mpmath.log(y))
        if not mpmath.isfinite(eta) or eta <= 0:
            return None
        m, e = mpmath.frexp(eta)
        scale = bits + 32
        return Fraction(int(mpmath.nint(m * mpmath.mpf(2) ** scale)), 1) * Fraction(2) ** (e - scale)


def _eta_bracket(Y: Fraction, bits: int, rel_tol: Fraction) -> tuple[Fraction, Fraction]:
    if Y <= 3:  # e < 3, and the bracket [1, 2] below needs log Y > 1
        ctx = context(bits)
        if not lower(ctx.log(from_fraction(ctx, Y))) > 1:
            raise NoConvergence("fixpoint needs Y > e", None, None)
    ctx = context(bits)
    guess = _eta_newton(Y, bits)
    if guess is not None:
        lo, hi = guess * (1 - rel_tol / 4), guess * (1 + rel_tol / 4)
        if _eta_residual_sign(ctx, lo, Y) < 0 and _eta_residual_sign(ctx, hi, Y) > 0:
            return lo, hi
    lo, hi = Fraction(1), Fraction(2)
    if _eta_residual_sign(ctx, lo, Y) > 0 or _eta_residual_sign(ctx, hi, Y) < 0:
        raise NoConvergence("bracket [1, 2] does not enclose the fixpoint", lo, hi)
    while hi - lo > rel_tol * lo:
        mid = (lo + hi) / 2
        mid = Fraction(round(mid * 2**bits), 2**bits) if mid.denominator > 2**bits else mid
        s = _eta_residual_sign(ctx, mid, Y)
        if s < 0:
            lo = mid
        elif s > 0:
            hi = mid
        else:
            if bits > 4096:
                raise NoConvergence("cannot certify residual sign", lo, hi)
            bits *= 2
            ctx = context(bits)
    return lo, hi


def fixpoint_eta(Y, bits: int = 128, rel_tol: Fraction = Fraction(1, 10**30)):
    """Enclosure [eta_lo, eta_hi] of the eta with eta Y log Y / log(eta Y log Y) = Y.

    ``Y`` may be a number or an interval; eta decreases in Y, so the
    endpoints come from the opposite ends of Y.
    """
    if hasattr(Y, "_mpi_"):
        y_lo, y_hi = endpoints(Y)
    elif isinstance(Y, tuple):
        y_lo, y_hi = Fraction(Y[0]), Fraction(Y[1])
    else:
        y_lo = y_hi = Fraction(Y)
    eta_lo = _eta_bracket(y_hi, bits, rel_tol)[0]
    eta_hi = _eta_bracket(y_lo, bits, rel_tol)[1] if y_lo != y_hi else _eta_bracket(y_hi, bits, rel_tol)[1]
    return eta_lo, eta_hi


def _eta_iv(ctx, Y):
    lo, hi = fixpoint_eta(Y)
    return interval(ctx, lo, hi)


# ---------------------------------------------------------------- inputs
@dataclass(frozen=True)
class SequenceConstants:
    """Rational enclosures of every sequence-dependent quantity the bounds need."""

    D: int
    log_alpha1: tuple[Fraction, Fraction]
    kappa1: tuple[Fraction, Fraction]
    h_alpha1: tuple[Fraction, Fraction]
    h_kappa1: tuple[Fraction, Fraction]
    A_alpha1: Fraction  # max{D h, |log alpha_1|}, upper
    A_kappa1: Fraction
    K: Fraction
    delta: Fraction

    def to_json(self) -> dict:
        from .intervals import decimal_lower, decimal_upper

        def pair(p):
            return [decimal_lower(p[0], 20), decimal_upper(p[1], 20)]

        return {
            "D": self.D,
            "log_alpha1": pair(self.log_alpha1),
            "kappa1": pair(self.kappa1),
            "h_alpha1": pair(self.h_alpha1),
            "h_kappa1": pair(self.h_kappa1),
            "K_upper": decimal_upper(self.K, 20),
            "delta_lower": decimal_lower(self.delta, 20),
        }


def _iv(ctx, pair):
    return interval(ctx, pair[0], pair[1])


def _imax(ctx, *xs):
    lo = max(lower(x) for x in xs)
    hi = max(upper(x) for x in xs)
    return interval(ctx, lo, hi)


def _imin(ctx, *xs):
    lo = min(lower(x) for x in xs)
    hi = min(upper(x) for x in xs)
    return interval(ctx, lo, hi)


def _prod(ctx, xs):
    out = ctx.mpf(1)
    for x in xs:
        out = out * x
    return out


# ---------------------------------------------------------------- preliminary bound
@dataclass(frozen=True)
class Lemma31Params:
    """Inputs of the S-unit index bound for u_n = m_1^{e_1} ... m_k^{e_k} with n >= n_0.

    ``extra_logs`` adds further multiplicands known only through an interval
    for their logarithm (used for the non-smooth part x).
    """

    seq: SequenceConstants
    multiplicands: tuple[int, ...]
    n0: int
    form: str = "strict"
    log_term: str = "one_plus_eps1_K"
    extra_logs: tuple[tuple[Fraction, Fraction], ...] = ()


@dataclass
class Lemma31Stage:
    s: int
    A: Fraction
    Psi: Fraction
    Psi_prime: Fraction
    c3: Fraction
    C_prime: Fraction
    Y: Fraction
    eta: Fraction
    C_dprime: Fraction
    bound: Fraction


@dataclass
class Lemma31Result:
    epsilon: Fraction
    epsilon_1: Fraction
    c2: Fraction
    stages: list[Lemma31Stage]
    bound: Fraction

    @property
    def index_bound(self) -> int:
        """Largest n compatible with the strict inequality n < bound."""
        b = self.bound
        return -((-b.numerator) // b.denominator) - 1


def _eps(ctx, seq: SequenceConstants, n0: int):
    eps = from_fraction(ctx, seq.K) / from_fraction(ctx, seq.delta) ** n0
    if not upper(eps) < 1:
        raise HypothesisViolation(f"epsilon = K delta^-{n0} is not below 1", check="epsilon < 1")
    eps1 = eps / (1 - eps)
    return eps, eps1


def _log_term(ctx, seq, eps1, mode):
    K = from_fraction(ctx, seq.K)
    if mode == "one_plus_eps1_K":
        val = ctx.log((1 + eps1) * K)
    elif mode == "two_K":
        val = ctx.log(2 * K)
    else:
        raise ValueError(f"unknown log-term reading {mode!r}")
    return _imax(ctx, val, ctx.mpf(0))


def c2_constant(ctx, seq: SequenceConstants, n0: int, eps):
    """c_1 max{h(alpha_1), h(kappa_1)/n_0, log alpha_1 + log+(max(K,1) kappa_1 (1+eps))/n_0}."""
    c1 = c1_constant(seq.D, ctx)
    ha, hk = _iv(ctx, seq.h_alpha1), _iv(ctx, seq.h_kappa1)
    la, k1 = _iv(ctx, seq.log_alpha1), _iv(ctx, seq.kappa1)
    Kp = from_fraction(ctx, max(seq.K, Fraction(1)))
    third = la + _imax(ctx, ctx.log(Kp * k1 * (1 + eps)), ctx.mpf(0)) / n0
    return c1 * _imax(ctx, ha, hk / n0, third)


def _term_A_values(ctx, seq: SequenceConstants, logs):
    """Matveev A-values: D log m for the multiplicands, then kappa_1 and alpha_1."""
    D = seq.D
    return [D * lg for lg in logs] + [from_fraction(ctx, seq.A_kappa1), from_fraction(ctx, seq.A_alpha1)]


def _stage(ctx, seq, logs, c2, n0, logterm, form, c3_override=None):
    """One stage of the preliminary bound with multiplicand logs ``logs``."""
    ha, hk = _iv(ctx, seq.h_alpha1), _iv(ctx, seq.h_kappa1)
    D = seq.D
    s = len(logs)
    A = _imax(ctx, ha, hk, *logs)
    # Psi is Omega / D^{s+2}; it equals the product of the heights when every A_j = D h_j
    Psi = _prod(ctx, _term_A_values(ctx, seq, logs)) / ctx.mpf(D) ** (s + 2)
    Psi_p = Psi / A
    ratio = c2 * n0 / A
    if not lower(ratio) > 1:
        raise HypothesisViolation("n_0 <= A/c_2", check="n_0 > A/c_2")
    c3 = logterm / (Psi * ctx.log(ratio)) if c3_override is None else c3_override
    Cp = (matveev_constant(s + 2, D, form, ctx) * ctx.mpf(D) ** (s + 2) + c3) / ctx.log(from_fraction(ctx, seq.delta))
    Y = c2 * Cp * Psi_p
    eta = _eta_iv(ctx, Y)
    Cpp = Cp * eta
    bound = Cpp * Psi * ctx.log(Y)
    return dict(A=A, Psi=Psi, Psi_prime=Psi_p, c3=c3, C_prime=Cp, Y=Y, eta=eta, C_dprime=Cpp, bound=bound)


def lemma31_bound(params: Lemma31Params) -> Lemma31Result:
    """Index bound for S-unit terms, maximised over every prefix stage s = 0..k."""
    ctx = context(CASCADE_BITS)
    seq = params.seq
    eps, eps1 = _eps(ctx, seq, params.n0)
    c2 = c2_constant(ctx, seq, params.n0, eps)
    logterm = _log_term(ctx, seq, eps1, params.log_term)
    logs = [ctx.log(m) for m in params.multiplicands] + [_iv(ctx, p) for p in params.extra_logs]
    stages = []
    for s in range(len(logs) + 1):
        st = _stage(ctx, seq, logs[:s], c2, params.n0, logterm, params.form)
        stages.append(Lemma31Stage(s=s, **{k: upper(v) for k, v in st.items()}))
    bound = max(st.bound for st in stages)
    return Lemma31Result(upper(eps), upper(eps1), upper(c2), stages, bound)


# ---------------------------------------------------------------- cascade
def next_prime_outside(primes: Sequence[int]) -> int:
    import sympy

    p = 2
    while p in set(primes):
        p = int(sympy.nextprime(p))
    return p


CASCADE_NAMES = (
    "mu", "x_0", "A", "c_1", "c_2", "C_0", "Psi", "epsilon", "epsilon_1", "epsilon_2",
    "C_1", "C_1'", "eta_1", "N_1", "C_2", "C_2'", "C_3", "C_4", "C_5'", "C_5", "C_5_as_printed",
    "C_6", "eta_2", "C_7", "Q", "bound_mn_small_x", "bound_m", "bound_n",
)


@dataclass
class BoundCascade:
    """Certified upper bounds for every named constant (``values``) and the data they came from."""

    primes: tuple[int, ...]
    n1: int
    mu: Fraction
    form: str
    log_term: str
    values: dict[str, Fraction] = field(default_factory=dict)
    Psi_i: dict[int, Fraction] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Fraction:
        return self.values[name]

    def to_json(self) -> dict:
        from .intervals import decimal_upper

        return {
            "primes": list(self.primes),
            "n1": self.n1,
            "mu": str(self.mu),
            "matveev_form": self.form,
            "log_term": self.log_term,
            "constants": {k: decimal_upper(v, 16) for k, v in self.values.items()},
            "Psi_i": {str(p): decimal_upper(v, 16) for p, v in self.Psi_i.items()},
        }


def theorem41_cascade(seq: SequenceConstants, primes: Sequence[int], n1: int, mu,
                      form: str = "strict", log_term: str = "one_plus_eps1_K") -> BoundCascade:
    """All constants for u_n^a = p_1^{g_1}...p_k^{g_k} u_m^b with n > m >= n1."""
    primes = tuple(sorted(int(p) for p in primes))
    mu = Fraction(mu)
    if mu <= 1:
        raise HypothesisViolation("mu must exceed 1", check="mu > 1")
    ctx = context(CASCADE_BITS)
    k, D = len(primes), seq.D
    x0 = next_prime_outside(primes)
    ha, hk = _iv(ctx, seq.h_alpha1), _iv(ctx, seq.h_kappa1)
    la, k1 = _iv(ctx, seq.log_alpha1), _iv(ctx, seq.kappa1)
    logs = [ctx.log(p) for p in primes]
    logx0 = ctx.log(x0)
    Kiv, dlt = from_fraction(ctx, seq.K), from_fraction(ctx, seq.delta)
    logd = ctx.log(dlt)
    muv = from_fraction(ctx, mu)

    c1 = c1_constant(D, ctx)
    A = _imax(ctx, ha, hk, *logs)
    C0 = muv / (c1 * ha)
    if not upper(C0 * A) < n1:
        raise HypothesisViolation(f"n_1 = {n1} does not exceed C_0 A", check="n_1 > C_0 A")
    eps, eps1 = _eps(ctx, seq, n1)
    eps2 = _imax(ctx, ctx.mpf(0), ctx.log(k1) / (n1 * la))
    c2 = c2_constant(ctx, seq, n1, eps)
    logterm = _log_term(ctx, seq, eps1, log_term)
    Psi = _prod(ctx, _term_A_values(ctx, seq, logs)) / ctx.mpf(D) ** (k + 2)

    # x = 1 or b = 0: S-unit case with c_3 bounded through log mu
    Cp1 = (matveev_constant(k + 2, D, form, ctx) * ctx.mpf(D) ** (k + 2)
           + logterm / (Psi * ctx.log(muv))) / logd
    C1p = c2 * Cp1
    eta1 = _eta_iv(ctx, c2 * Cp1 * Psi / A)
    C1 = Cp1 * eta1
    N1 = C1 * Psi * ctx.log(C1p * Psi / _imin(ctx, A, ctx.mpf(1)))

    # x >= 2: one more multiplicand x with log x >= log x_0
    Cp2 = (matveev_constant(k + 3, D, form, ctx) * ctx.mpf(D) ** (k + 3)
           + logterm / (Psi * logx0 * ctx.log(muv))) / logd
    C2p = c2 * Cp2
    Y2_min = c2 * Cp2 * Psi * _imin(ctx, ctx.mpf(1), logx0 / A)
    C2 = Cp2 * _eta_iv(ctx, Y2_min)
    C3 = C2 * (1 + eps)
    C4 = matveev_constant(k + 2, D, form, ctx) * ctx.mpf(D) ** (k + 2)
    lC2 = ctx.log(C2p * Psi)
    C5p = c1 * C3 * Psi**2 * la * lC2**2 * _imax(ctx, C2 * ha, C3 * la) / A
    L0 = ctx.log(2 * (1 + eps1) * Kiv * C3 * Psi * la * lC2)
    C5_printed = C4 + L0 / (2 * C4 * Psi * ctx.log(C5p) * logd)
    C5 = (C4 + L0 / (2 * Psi * ctx.log(C5p))) / logd
    C6 = 2 * C5 * (1 + eps) * (1 + eps2) * la
    eta2 = _eta_iv(ctx, C6 * Psi)
    C7 = eta2 * C6
    Q = _imax(ctx, C0, C2 * Psi * lC2)
    vals = {
        "mu": muv, "x_0": ctx.mpf(x0), "A": A, "c_1": c1, "c_2": c2, "C_0": C0, "Psi": Psi,
        "epsilon": eps, "epsilon_1": eps1, "epsilon_2": eps2,
        "C_1": C1, "C_1'": C1p, "eta_1": eta1, "N_1": N1,
        "C_2": C2, "C_2'": C2p, "C_3": C3, "C_4": C4, "C_5'": C5p, "C_5": C5,
        "C_5_as_printed": C5_printed, "C_6": C6, "eta_2": eta2, "C_7": C7, "Q": Q,
        "bound_mn_small_x": 2 * Q * C5p,
        "bound_m": 2 * C5 * Psi * ctx.log(C7 * Psi * ctx.log(C6 * Psi)),
        "bound_n": Q * C7 * Psi * ctx.log(C6 * Psi),
    }
    cascade = BoundCascade(primes, n1, mu, form, log_term, {k_: upper(v) for k_, v in vals.items()})
    cascade.Psi_i = {p: upper(Psi / lg) for p, lg in zip(primes, logs)}
    return cascade


def all_subset_matveev(seq: SequenceConstants, logs_iv, form: str, ctx) -> object:
    """max over term subsets S (|S| >= 2) of C(|S|) prod_{j in S} A_j, an upper bound usable
    whichever coefficients of the linear form vanish."""
    A_vals = _term_A_values(ctx, seq, logs_iv)
    best = None
    for size in range(2, len(A_vals) + 1):
        c = matveev_constant(size, seq.D, form, ctx)
        for sub in combinations(A_vals, size):
            val = c * _prod(ctx, sub)
            best = val if best is None else _imax(ctx, best, val)
    return best
