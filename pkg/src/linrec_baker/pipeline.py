"""End-to-end campaigns: S-unit terms, the global ratio bound and the per-m endgame."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import sympy

from .baker import (
    CASCADE_BITS, BoundCascade, Lemma31Params, SequenceConstants, all_subset_matveev, c1_constant,
    lemma31_bound, next_prime_outside, theorem41_cascade,
)
from .errors import AmbiguousFloor, HypothesisViolation, PrecisionExhausted, SearchExhausted
from .heights import FieldElement, a_value
from .intervals import (
    context, decimal_lower, decimal_upper, endpoints, from_fraction, lower, parse_decimal, transfer, upper,
)
from .lattice import DEFAULT_GAMMAS, ReductionCertificate, auto_tune, find_integer_relation, index_bound_from_form
from .recurrence import PRESETS, SequenceSpec, kappa_numerator, sequence_from_dict, solve_spectrum, solve_spectrum_auto, \
    tail_bound_params, terms
from .smooth import SolutionClasses, classify, is_perfect_power, primitive_root_power, smooth_split

DIGITS = 20
JOBS_ENV = "LINREC_JOBS"
MAX_SLIDES = 8


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------- configuration
@dataclass
class RunConfig:
    preset: str | None = "padovan"
    sequence: dict | None = None
    primes: tuple[int, ...] = (2, 3, 5, 7)
    n1: int = 27
    mu: str = "10"
    precision: int = 128
    gammas: tuple[str, ...] = tuple(str(g) for g in DEFAULT_GAMMAS)
    c_span: int = 12
    max_passes: int = 4
    tail_start: int = 100
    max_index: int | None = None
    jobs: int = field(default_factory=default_jobs)
    matveev_form: str = "strict"
    log_term: str = "one_plus_eps1_K"
    floor_method: str = "best"
    assume_independent: bool = False
    out: str | None = None

    def __post_init__(self):
        self.primes = tuple(int(p) for p in self.primes)
        self.gammas = tuple(str(Fraction(g)) for g in self.gammas)
        self.mu = str(Fraction(self.mu))
        self.validate()

    def validate(self) -> None:
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("primes must be distinct")
        for p in self.primes:
            if p < 2 or not sympy.isprime(p):
                raise ValueError(f"{p} is not a prime")
        if Fraction(self.mu) <= 1:
            raise ValueError("mu must exceed 1")
        if self.n1 < 1 or self.c_span < 1 or self.max_passes < 1 or self.jobs < 1 or self.precision < 32:
            raise ValueError("n1, c_span, max_passes, jobs must be positive and precision at least 32")
        if self.tail_start < self.n1:
            raise ValueError("tail_start must be at least n1")
        if self.max_index is not None and self.max_index < 0:
            raise ValueError("max_index must be nonnegative")
        if self.preset is None and self.sequence is None:
            raise ValueError("either a preset or an inline sequence is required")
        if self.sequence is None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")

    def spec(self) -> SequenceSpec:
        if self.sequence is not None:
            return sequence_from_dict(self.sequence)
        return PRESETS[self.preset]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["primes"] = list(self.primes)
        d["gammas"] = list(self.gammas)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def load_config(path: str | Path) -> RunConfig:
    return RunConfig.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- rounding helpers
def round_up(x, digits: int = DIGITS) -> Fraction:
    """Upper endpoint of an interval (or a rational) rounded up to a short decimal."""
    q = upper(x) if not isinstance(x, (int, Fraction)) else Fraction(x)
    return parse_decimal(decimal_upper(q, digits))


def round_down(x, digits: int = DIGITS) -> Fraction:
    q = lower(x) if not isinstance(x, (int, Fraction)) else Fraction(x)
    return parse_decimal(decimal_lower(q, digits))


def ceil_int(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def floor_int(q: Fraction) -> int:
    return q.numerator // q.denominator


# ---------------------------------------------------------------- sequence constants
@dataclass(frozen=True)
class Prepared:
    """Everything sequence-dependent that the bound stages need."""

    spec: SequenceSpec
    constants: SequenceConstants
    n_threshold: int


def kappa1_element(spec: SequenceSpec, minpoly, alpha1) -> FieldElement:
    """kappa_1 = G(alpha_1)/P'(alpha_1) as an element of Q(alpha_1)."""
    g = kappa_numerator(spec)
    charp = spec.characteristic_polynomial()
    r = len(charp) - 1
    dp_low = list(reversed([c * (r - i) for i, c in enumerate(charp[:-1])]))
    num = FieldElement.from_poly(g, minpoly, alpha1)
    den = FieldElement.from_poly(dp_low, minpoly, alpha1)
    return num / den


def sequence_constants(spec: SequenceSpec, precision: int = 128) -> SequenceConstants:
    """Certified D, log alpha_1, kappa_1, heights, A-values, K and delta."""
    spectral = solve_spectrum_auto(spec, precision)
    tail = tail_bound_params(spec, spectral)
    bits = max(precision, spectral.precision)
    ctx = context(bits)
    alpha1 = transfer(ctx, spectral.alpha1)
    kappa1 = transfer(ctx, spectral.kappa1)
    if not lower(alpha1) > 1:
        raise HypothesisViolation("dominant root is not real and larger than 1", check="alpha_1 > 1")
    if not lower(kappa1) > 0:
        raise HypothesisViolation("kappa_1 is not positive", check="kappa_1 > 0")
    D = spectral.degree
    a = FieldElement.generator(spectral.minimal_polynomial, spectral.alpha1)
    k = kappa1_element(spec, spectral.minimal_polynomial, spectral.alpha1)
    ha = a_value(a, D, bits)
    hk = a_value(k, D, bits)
    return SequenceConstants(
        D=D,
        log_alpha1=endpoints(ctx.log(alpha1)),
        kappa1=endpoints(kappa1),
        h_alpha1=(ha.h_lower, ha.h_upper),
        h_kappa1=(hk.h_lower, hk.h_upper),
        A_alpha1=ha.A,
        A_kappa1=hk.A,
        K=tail.K,
        delta=tail.delta,
    )


# ---------------------------------------------------------------- theta values
ALPHA, KAPPA = "log:alpha1", "log:kappa1"


def log_symbol(n: int) -> str:
    return f"log:{int(n)}"


class ThetaSource:
    """Certified enclosures of log alpha_1, log kappa_1 and logs of integers at any precision."""

    def __init__(self, spec: SequenceSpec):
        self.spec = spec
        self._cache: dict[int, tuple] = {}

    def _spectral_logs(self, bits: int):
        for have, val in self._cache.items():
            if have >= bits:
                return val
        prec = bits + 64
        while True:
            try:
                spectral = solve_spectrum(self.spec, prec)
            except PrecisionExhausted:
                prec *= 2
                continue
            ctx = context(prec)
            la = endpoints(ctx.log(transfer(ctx, spectral.alpha1)))
            lk = endpoints(ctx.log(transfer(ctx, spectral.kappa1)))
            if max(la[1] - la[0], lk[1] - lk[0]) < Fraction(1, 2 ** (bits + 8)):
                self._cache[bits] = (la, lk)
                return la, lk
            prec *= 2

    def enclosures(self, symbols: Sequence[str], bits: int) -> list[tuple[Fraction, Fraction]]:
        return theta_enclosures(symbols, bits, self._spectral_logs(bits))


def theta_enclosures(symbols, bits: int, spectral_logs) -> list[tuple[Fraction, Fraction]]:
    la, lk = spectral_logs
    ctx = context(bits + 32)
    out = []
    for s in symbols:
        if s == ALPHA:
            out.append(la)
        elif s == KAPPA:
            out.append(lk)
        elif s.startswith("log:"):
            out.append(endpoints(ctx.log(int(s[4:]))))
        else:
            raise ValueError(f"unknown theta symbol {s!r}")
    return out


def theta_bits(n: int, x_bound: int, gammas, span: int, last_abs_min: float, min_exponent: int = 0) -> int:
    """Working precision large enough for every (C, gamma) the tuner may try."""
    from .lattice import heuristic_exponent

    worst = 0.0
    for g in gammas:
        g = Fraction(g)
        start = max(heuristic_exponent(n, x_bound, g, Fraction(last_abs_min)), min_exponent)
        worst = max(worst, start + span + math.log10(g) + 2)
    return int(worst * math.log2(10)) + 64


# ---------------------------------------------------------------- reductions
@dataclass
class ReductionRecord:
    """One certified reduction and the index bound derived from it.

    The bound is the largest idx with (1 + eps) (slope idx + intercept) K delta^-idx > L,
    iterated from ``start`` (constant multiplier when slope is zero).
    """

    kind: str
    index: int
    symbols: tuple[str, ...]
    x_bound: int
    scale: int
    gamma: Fraction
    certificate: ReductionCertificate
    eps: Fraction
    slope: Fraction
    intercept: Fraction
    start: int
    floor: int
    index_bound: int

    @property
    def lambda_lower(self) -> Fraction:
        return Fraction(self.x_bound) / (self.scale * self.gamma)


def multiplier_fn(slope: Fraction, intercept: Fraction) -> Callable[[int], Fraction]:
    return lambda i: slope * i + intercept


def bound_from_lambda(L: Fraction, K: Fraction, delta: Fraction, eps: Fraction, slope: Fraction,
                      intercept: Fraction, start: int, floor: int) -> int:
    if slope == 0:
        b = index_bound_from_form(L, K, delta, eps, intercept)
    else:
        b = index_bound_from_form(L, K, delta, eps, multiplier_fn(slope, intercept), start=start)
    return max(b, floor)


def reduce_form(source_logs, symbols, x_bound: int, config: RunConfig, kind: str, index: int,
                consts: SequenceConstants, eps: Fraction, slope: Fraction, intercept: Fraction,
                start: int, floor: int, probe: bool = False, min_exponent: int = 0) -> ReductionRecord:
    """Auto-tuned reduction of sum c_i theta_i with |c_i| <= x_bound, tried over every last column.

    With ``probe`` the thetas are first searched for a small integer relation at
    twice the working precision; one found aborts with HypothesisViolation. When
    a window of ``c_span`` exponents is exhausted the window slides upward.
    """
    gammas = [Fraction(g) for g in config.gammas]
    approx = [abs(float((lo + hi) / 2)) for lo, hi in theta_enclosures(symbols, 64, source_logs(64))]
    bits = theta_bits(len(symbols), x_bound, gammas, config.c_span, min(approx), min_exponent)
    if probe and not config.assume_independent:
        check_independence(symbols, source_logs, 2 * bits, f"{kind} form {index}")
    tuned, doublings, slides = None, 0, 0
    while tuned is None:
        thetas = theta_enclosures(symbols, bits, source_logs(bits))
        try:
            tuned = auto_tune(thetas, x_bound, gammas, config.c_span, tuple(symbols), config.floor_method,
                              last_choices=range(len(symbols)), min_exponent=min_exponent)
        except (PrecisionExhausted, AmbiguousFloor):
            doublings += 1
            if doublings >= 6:
                raise PrecisionExhausted(f"{kind} reduction {index}: floors stayed ambiguous")
            bits *= 2
        except SearchExhausted as exc:
            slides += 1
            if slides > MAX_SLIDES:
                raise
            min_exponent = exc.largest_c + 1
            bits = max(bits, theta_bits(len(symbols), x_bound, gammas, config.c_span, min(approx), min_exponent))
    ordered = tuple(symbols[i] for i in tuned.order)
    rec = ReductionRecord(kind, index, ordered, x_bound, tuned.scale, tuned.gamma, tuned.certificate,
                          eps, slope, intercept, start, floor, 0)
    rec.index_bound = bound_from_lambda(rec.lambda_lower, consts.K, consts.delta, eps, slope, intercept,
                                        start, floor)
    return rec


# ---------------------------------------------------------------- shared quantities
@dataclass(frozen=True)
class Basics:
    """Rounded constants shared by every stage (all upper bounds unless named *_low)."""

    eps: Fraction
    eps1: Fraction
    rho: Fraction
    log_pmin_low: Fraction

    def to_json(self) -> dict:
        return {k: decimal_upper(v, DIGITS) if not k.endswith("_low") else decimal_lower(v, DIGITS)
                for k, v in asdict(self).items()}


def basics(consts: SequenceConstants, primes: Sequence[int], n1: int) -> Basics:
    """eps, eps_1 at n_1 and rho with log|u_n| <= rho n for n >= n_1."""
    ctx = context(CASCADE_BITS)
    eps = from_fraction(ctx, consts.K) / from_fraction(ctx, consts.delta) ** n1
    if not upper(eps) < 1:
        raise HypothesisViolation(f"K delta^-{n1} is not below 1", check="epsilon < 1")
    eps1 = eps / (1 - eps)
    la = from_fraction(ctx, consts.log_alpha1[1])
    lk = from_fraction(ctx, consts.kappa1[1])
    rho = la + (ctx.log(lk) if upper(lk) > 1 else 0) / n1 + ctx.log(1 + eps) / n1
    pmin = min(primes) if primes else None
    log_pmin = round_down(ctx.log(pmin)) if pmin else Fraction(0)
    return Basics(round_up(eps), round_up(eps1), round_up(rho), log_pmin)


def coefficient_bound(basics_: Basics, n_bound: int, extra_log_low: Fraction | None = None) -> int:
    """Bound on every coefficient of an S-unit form in which log|u_n| <= rho n and n <= n_bound."""
    x = Fraction(n_bound)
    top = basics_.rho * n_bound
    if basics_.log_pmin_low > 0:
        x = max(x, top / basics_.log_pmin_low)
    if extra_log_low is not None:
        x = max(x, top / extra_log_low)
    return ceil_int(x)


PROBE_COEFF_BOUND = 10**4


def check_independence(symbols, source_logs, bits: int, what: str) -> None:
    """Heuristic probe for an integer relation among the thetas; raises HypothesisViolation."""
    if len(symbols) < 2:
        return
    rel = find_integer_relation(theta_enclosures(symbols, bits, source_logs(bits)), PROBE_COEFF_BOUND, bits)
    if rel is not None:
        terms_ = " + ".join(f"{c}*{s}" for c, s in zip(rel, symbols) if c)
        raise HypothesisViolation(f"{what}: integer relation {terms_} = 0 detected", check="independence")


# ---------------------------------------------------------------- S-unit stage
@dataclass
class SUnitResult:
    initial_bound: int
    reductions: list[ReductionRecord]
    final_bound: int
    scan_bound: int
    s_units: tuple[int, ...]
    zeros: tuple[int, ...]
    direct: bool = False


def _s_unit_symbols(primes) -> list[str]:
    return [log_symbol(p) for p in primes] + [KAPPA, ALPHA]


def solve_s_unit(spec: SequenceSpec, primes: Sequence[int], config: RunConfig,
                 consts: SequenceConstants | None = None, source: ThetaSource | None = None) -> SUnitResult:
    """Every n with u_n = +-prod p_i^{f_i}; zero terms are listed separately."""
    primes = tuple(sorted(primes))
    if config.max_index is not None:
        return _scan_s_units(spec, primes, config.max_index, 0, 0, [], direct=True)
    consts = consts or sequence_constants(spec, config.precision)
    source = source or ThetaSource(spec)
    b = basics(consts, primes, config.n1)
    symbols = _s_unit_symbols(primes)
    lem = lemma31_bound(Lemma31Params(consts, primes, config.n1, config.matveev_form, config.log_term))
    bound = max(config.n1, lem.index_bound)
    initial = bound
    records = []
    for p in range(1, config.max_passes + 1):
        x1 = coefficient_bound(b, bound)
        rec = reduce_form(source._spectral_logs, symbols, x1, config, "s_unit", p, consts, b.eps1,
                          Fraction(0), Fraction(1), bound, config.n1, probe=p == 1)
        if rec.index_bound >= bound:
            break
        records.append(rec)
        bound = rec.index_bound
    return _scan_s_units(spec, primes, max(bound, config.n1), initial, bound, records)


def _scan_s_units(spec, primes, scan_bound, initial, final, records, direct=False) -> SUnitResult:
    us = terms(spec, scan_bound + 1)
    sunits, zeros = [], []
    for n, u in enumerate(us):
        c = smooth_split(u, primes).cofactor
        if c == 0:
            zeros.append(n)
        elif c == 1:
            sunits.append(n)
    return SUnitResult(initial, records, final, scan_bound, tuple(sunits), tuple(zeros), direct)


# ---------------------------------------------------------------- global ratio stage
@dataclass(frozen=True)
class RatioChain:
    """Rounded inputs of the m-bound for u_n^a = prod p_i^{g_i} u_m^b with n > m >= n_1."""

    Q: Fraction
    AB: Fraction
    log_x0_low: Fraction
    c4_omega: Fraction
    c1: Fraction
    A_values: tuple[Fraction, ...]
    A_min_low: Fraction
    log_primes_low: tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "Q": decimal_upper(self.Q, DIGITS),
            "AB": decimal_upper(self.AB, DIGITS),
            "log_x0_low": decimal_lower(self.log_x0_low, DIGITS),
            "c4_omega": decimal_upper(self.c4_omega, DIGITS),
            "c1": decimal_upper(self.c1, DIGITS),
            "A_values": [decimal_upper(a, DIGITS) for a in self.A_values],
            "A_min_low": decimal_lower(self.A_min_low, DIGITS),
            "log_primes_low": [decimal_lower(v, DIGITS) for v in self.log_primes_low],
        }


def ratio_chain(consts: SequenceConstants, cascade: BoundCascade, b: Basics, config: RunConfig) -> RatioChain:
    ctx = context(CASCADE_BITS)
    primes = cascade.primes
    x0 = next_prime_outside(primes)
    log_x0 = round_down(ctx.log(x0))
    Q = round_up(cascade["Q"])
    AB = round_up(b.rho * max(Q, Fraction(config.n1) / log_x0))
    logs = [ctx.log(p) for p in primes]
    c4 = round_up(all_subset_matveev(consts, logs, config.matveev_form, ctx))
    A_vals = tuple(round_up(consts.D * lg) for lg in logs) + (round_up(consts.A_kappa1), round_up(consts.A_alpha1))
    A_min = min([round_down(consts.D * lg) for lg in logs] + [consts.A_kappa1, consts.A_alpha1])
    A_min = round_down(A_min)
    return RatioChain(Q, AB, log_x0, c4, round_up(c1_constant(consts.D, ctx)), A_vals, A_min,
                      tuple(round_down(lg) for lg in logs))


def ratio_size_bound(chain: RatioChain, b: Basics, n1: int, m: int) -> Fraction:
    """Upper bound for max(bm, an)."""
    return max(chain.AB * m, chain.AB * n1, chain.Q * b.rho * m)


def ratio_coefficients(chain: RatioChain, b: Basics, n1: int, m: int) -> list[Fraction]:
    """Bounds for |g_i|, |b - a| and |bm - an| given m."""
    W = ratio_size_bound(chain, b, n1, m)
    return [b.rho * W / lp for lp in chain.log_primes_low] + [chain.AB, W]


def ratio_x_bound(chain: RatioChain, b: Basics, n1: int, m: int) -> int:
    return ceil_int(max(ratio_coefficients(chain, b, n1, m)))


def ratio_multiplier(chain: RatioChain, b: Basics) -> tuple[Fraction, Fraction]:
    """a + b <= slope m + intercept."""
    return b.rho / chain.log_x0_low, chain.AB


def _matveev_rhs(ctx, chain, b, consts, n1, m):
    coefs = ratio_coefficients(chain, b, n1, m)
    B = max([Fraction(1)] + [c * a / chain.A_min_low for c, a in zip(coefs, chain.A_values)])
    slope, icpt = ratio_multiplier(chain, b)
    mult = slope * m + icpt
    val = (ctx.log(from_fraction(ctx, (1 + b.eps1) * mult * consts.K))
           + from_fraction(ctx, chain.c4_omega) * ctx.log(from_fraction(ctx, chain.c1 * B)))
    return val / ctx.log(from_fraction(ctx, consts.delta))


def matveev_m_bound(chain: RatioChain, b: Basics, consts: SequenceConstants, n1: int) -> int:
    """Largest m with m < rhs(m); rhs grows like log m, so iterate down from a point beyond the crossing."""
    ctx = context(CASCADE_BITS)
    logd = lower(ctx.log(from_fraction(ctx, consts.delta)))
    start = max(n1, ceil_int(10 * chain.c4_omega / logd))
    while not upper(_matveev_rhs(ctx, chain, b, consts, n1, start)) <= start:
        start *= 2
    cur = start
    while True:
        nxt = min(cur, ceil_int(upper(_matveev_rhs(ctx, chain, b, consts, n1, cur))) - 1)
        if nxt >= cur:
            return max(cur, n1)
        cur = nxt


@dataclass
class RatioResult:
    chain: RatioChain
    initial_bound: int
    reductions: list[ReductionRecord]
    m_bound: int


def global_ratio_stage(spec, consts, cascade, b: Basics, config: RunConfig, source: ThetaSource) -> RatioResult:
    chain = ratio_chain(consts, cascade, b, config)
    symbols = _s_unit_symbols(cascade.primes)
    m = matveev_m_bound(chain, b, consts, config.n1)
    initial = m
    slope, icpt = ratio_multiplier(chain, b)
    records = []
    for p in range(1, config.max_passes + 1):
        x1 = ratio_x_bound(chain, b, config.n1, m)
        rec = reduce_form(source._spectral_logs, symbols, x1, config, "ratio", p, consts, b.eps1,
                          slope, icpt, m, config.n1, probe=p == 1)
        if rec.index_bound >= m:
            break
        records.append(rec)
        m = rec.index_bound
    return RatioResult(chain, initial, records, m)


# ---------------------------------------------------------------- per-m stage
@dataclass
class PerMResult:
    m: int
    H: int
    root: int
    exponent: int
    n0: int
    lemma_bound: int
    record: ReductionRecord


@dataclass(frozen=True)
class PerMJob:
    m: int
    H: int
    consts: SequenceConstants
    primes: tuple[int, ...]
    config: RunConfig
    basics: Basics
    eps3: Fraction
    C0: Fraction
    spectral_logs: dict
    min_exponent: int = 0


def per_m_n0(C0: Fraction, A: Fraction, log_t_up: Fraction, n1: int) -> int:
    return max(n1, floor_int(C0 * max(A, log_t_up)) + 1)


def per_m_symbols(primes, root) -> list[str]:
    return [log_symbol(p) for p in primes] + [log_symbol(root), KAPPA, ALPHA]


def _run_per_m(job: PerMJob) -> PerMResult:
    cfg, consts, b = job.config, job.consts, job.basics
    root, e = primitive_root_power(job.H)
    ctx = context(CASCADE_BITS)
    lt = endpoints(ctx.log(root))
    A = max(consts.h_alpha1[1], consts.h_kappa1[1], *(upper(ctx.log(p)) for p in job.primes)) \
        if job.primes else max(consts.h_alpha1[1], consts.h_kappa1[1])
    n0 = per_m_n0(job.C0, A, lt[1], cfg.n1)
    lem = lemma31_bound(Lemma31Params(consts, job.primes, n0, cfg.matveev_form, cfg.log_term, (lt,)))
    N = max(n0, lem.index_bound)
    x1 = coefficient_bound(b, N, round_down(lt[0]))
    symbols = per_m_symbols(job.primes, root)

    def logs(bits):
        have = [k for k in job.spectral_logs if k >= bits]
        if not have:
            raise PrecisionExhausted("shared theta enclosures too coarse")
        return job.spectral_logs[min(have)]

    rec = reduce_form(logs, symbols, x1, cfg, "per_m", job.m, consts, job.eps3, Fraction(0), Fraction(1),
                      N, cfg.tail_start, probe=True, min_exponent=job.min_exponent)
    return PerMResult(job.m, job.H, root, e, n0, N, rec)


def epsilon3(consts: SequenceConstants, tail_start: int) -> tuple[Fraction, Fraction]:
    """eps_3 = K delta^-tail_start and the factor eps with 1 + eps = 1/(1 - eps_3)."""
    ctx = context(CASCADE_BITS)
    e3 = from_fraction(ctx, consts.K) / from_fraction(ctx, consts.delta) ** tail_start
    if not upper(e3) < 1:
        raise HypothesisViolation("K delta^-tail_start is not below 1", check="epsilon_3 < 1")
    return round_up(e3), round_up(e3 / (1 - e3))


def c0_constant(consts: SequenceConstants, mu) -> Fraction:
    ctx = context(CASCADE_BITS)
    return round_up(from_fraction(ctx, Fraction(mu)) / (c1_constant(consts.D, ctx) * from_fraction(ctx, consts.h_alpha1[0])))


# ---------------------------------------------------------------- full run
@dataclass
class SolutionReport:
    config: RunConfig
    constants: SequenceConstants
    basics: Basics
    cascade: BoundCascade
    s_unit: SUnitResult
    ratio: RatioResult
    per_m: list[PerMResult]
    perfect_power_m: tuple[int, ...]
    eps3: Fraction
    eps3_factor: Fraction
    C0: Fraction
    scan_bound: int
    cofactors: tuple[int, ...]
    classes: SolutionClasses

    @property
    def n_bound(self) -> int:
        return max([r.record.index_bound for r in self.per_m], default=0)

    @property
    def lambda1_lower(self) -> Fraction | None:
        return min((r.record.lambda_lower for r in self.per_m), default=None)


def _shared_spectral_logs(source: ThetaSource, bits_list) -> dict:
    return {bits: source._spectral_logs(bits) for bits in sorted(set(bits_list))}


def per_m_candidates(spec: SequenceSpec, primes, m_bound: int) -> list[tuple[int, int]]:
    us = terms(spec, m_bound + 1)
    out = []
    for m, u in enumerate(us):
        h = smooth_split(u, primes).cofactor
        if h not in (0, 1):
            out.append((m, h))
    return out


def solve_power_ratio(spec: SequenceSpec, primes: Sequence[int], config: RunConfig,
                      progress: Callable[[str], None] | None = None) -> SolutionReport:
    """Every class of indices related by u_n^a = prod p_i^{g_i} u_m^b with a, b > 0."""
    say = progress or (lambda _msg: None)
    primes = tuple(sorted(int(p) for p in primes))
    consts = sequence_constants(spec, config.precision)
    b = basics(consts, primes, config.n1)
    source = ThetaSource(spec)
    say("constants ready")
    cascade = theorem41_cascade(consts, primes, config.n1, Fraction(config.mu), config.matveev_form, config.log_term)
    cfg_scan = RunConfig.from_dict({**config.to_dict(), "max_index": None})
    s_unit = solve_s_unit(spec, primes, cfg_scan, consts, source)
    say(f"S-unit stage: n <= {s_unit.final_bound}")
    ratio = global_ratio_stage(spec, consts, cascade, b, config, source)
    say(f"ratio stage: m <= {ratio.m_bound}")

    eps3, eps3_factor = epsilon3(consts, config.tail_start)
    C0 = c0_constant(consts, config.mu)
    cands = per_m_candidates(spec, primes, ratio.m_bound)
    pp = tuple(m for m, h in cands if is_perfect_power(h) is not None)
    shared = _shared_spectral_logs(source, [1024, 2048, 4096])
    jobs = [PerMJob(m, h, consts, primes, config, b, eps3_factor, C0, shared) for m, h in cands]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            per_m = list(ex.map(_run_per_m, jobs, chunksize=4))
    else:
        per_m = [_run_per_m(j) for j in jobs]
    per_m.sort(key=lambda r: r.m)
    say(f"per-m stage: {len(per_m)} forms")

    scan = max([s_unit.scan_bound, ratio.m_bound, config.tail_start, config.n1]
               + [r.record.index_bound for r in per_m])
    us = terms(spec, scan + 1)
    cof = tuple(smooth_split(u, primes).cofactor for u in us)
    classes = classify(cof)
    return SolutionReport(config, consts, b, cascade, s_unit, ratio, per_m, pp, eps3, eps3_factor, C0,
                          scan, cof, classes)


def extend_per_m(report: SolutionReport, spec: SequenceSpec, m_max: int) -> list[PerMResult]:
    """Per-m forms for ratio_bound < m <= m_max; not needed for the result, used to cross-check wider ranges.

    The needed C grows with m, so each search starts one exponent below the previous one.
    """
    cfg = report.config
    cands = [(m, h) for m, h in per_m_candidates(spec, report.cascade.primes, m_max) if m > report.ratio.m_bound]
    shared = _shared_spectral_logs(ThetaSource(spec), [1024, 2048, 4096])
    hint = max((len(str(r.record.scale)) - 1 for r in report.per_m[-5:]), default=0)
    out = []
    for m, h in cands:
        res = _run_per_m(PerMJob(m, h, report.constants, report.cascade.primes, cfg, report.basics,
                                 report.eps3_factor, report.C0, shared, max(0, hint - 1)))
        hint = len(str(res.record.scale)) - 1
        out.append(res)
    return out
