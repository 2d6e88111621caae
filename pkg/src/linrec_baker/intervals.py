"""Thin helpers over mpmath's interval context.

Every computation creates its own context via :func:`context`, so precision
is never global state. Endpoints are exposed as exact :class:`Fraction`
values, which is what the lattice and certificate code compares against.
"""
from __future__ import annotations

import math
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext, ivmpc


def context(prec: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = int(prec)
    return ctx


def _raw_to_fraction(raw) -> Fraction:
    if raw in (libmp.finf, libmp.fninf, libmp.fnan):
        raise OverflowError("unbounded interval endpoint")
    return raw_to_fraction(raw)


def raw_to_fraction(raw) -> Fraction:
    """Exact value of a finite raw mpf tuple ``(sign, man, exp, bc)``."""
    sign, man, exp, _ = raw
    man = -int(man) if sign else int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of a real interval."""
    lo, hi = x._mpi_
    return _raw_to_fraction(lo), _raw_to_fraction(hi)


def lower(x) -> Fraction:
    return endpoints(x)[0]


def upper(x) -> Fraction:
    return endpoints(x)[1]


def is_bounded(x) -> bool:
    lo, hi = x._mpi_
    bad = (libmp.finf, libmp.fninf, libmp.fnan)
    return lo not in bad and hi not in bad


def width(x) -> Fraction:
    lo, hi = endpoints(x)
    return hi - lo


def contains_zero(x) -> bool:
    lo, hi = endpoints(x)
    return lo <= 0 <= hi


def is_positive(x) -> bool:
    return is_bounded(x) and lower(x) > 0


def transfer(ctx, x):
    """Re-home a real or complex interval into ``ctx`` (outward rounded)."""
    if isinstance(x, ivmpc):
        return ctx.mpc(transfer(ctx, x.real), transfer(ctx, x.imag))
    if isinstance(x, (int, Fraction)):
        return from_fraction(ctx, Fraction(x))
    lo, hi = endpoints(x)
    return ctx.mpf([from_fraction(ctx, lo).a, from_fraction(ctx, hi).b])


def interval(ctx, lo: Fraction, hi: Fraction):
    return ctx.mpf([from_fraction(ctx, lo).a, from_fraction(ctx, hi).b])


def from_fraction(ctx, q: Fraction):
    q = Fraction(q)
    return ctx.mpf(q.numerator) / ctx.mpf(q.denominator)


def hull(ctx, lo, hi):
    """Interval spanning two real intervals."""
    a = min(lower(lo), lower(hi))
    b = max(upper(lo), upper(hi))
    return ctx.mpf([from_fraction(ctx, a).a, from_fraction(ctx, b).b])


def imax(ctx, *xs):
    los = [lower(x) for x in xs]
    his = [upper(x) for x in xs]
    return ctx.mpf([from_fraction(ctx, max(los)).a, from_fraction(ctx, max(his)).b])


def imin(ctx, *xs):
    los = [lower(x) for x in xs]
    his = [upper(x) for x in xs]
    return ctx.mpf([from_fraction(ctx, min(los)).a, from_fraction(ctx, min(his)).b])


def log_plus(ctx, x):
    """Enclosure of max(0, log x) for a positive interval x."""
    lo, hi = endpoints(x)
    zero = ctx.mpf(0)
    up = ctx.log(from_fraction(ctx, hi)) if hi > 1 else zero
    down = ctx.log(from_fraction(ctx, lo)) if lo > 1 else zero
    return ctx.mpf([down.a, up.b])


def decimal_upper(q: Fraction | int, digits: int = 15) -> str:
    """Decimal string >= q with ``digits`` significant figures."""
    return _decimal_round(Fraction(q), digits, ROUND_CEILING)


def decimal_lower(q: Fraction | int, digits: int = 15) -> str:
    return _decimal_round(Fraction(q), digits, ROUND_FLOOR)


def _decimal_round(q: Fraction, digits: int, rounding) -> str:
    if q == 0:
        return "0"
    mag = _floor_log10(abs(q))
    with localcontext() as dctx:
        dctx.prec = digits + 5
        dctx.rounding = rounding
        scale = mag - digits + 1
        if scale >= 0:
            scaled = q / 10**scale
        else:
            scaled = q * 10**-scale
        if rounding == ROUND_CEILING:
            n = -((-scaled.numerator) // scaled.denominator)
        else:
            n = scaled.numerator // scaled.denominator
        return str(Decimal(n).scaleb(scale)).replace("E+", "e").replace("E", "e")


def _floor_log10(q: Fraction) -> int:
    est = len(str(q.numerator)) - len(str(q.denominator))
    while Fraction(10) ** est > q:
        est -= 1
    while Fraction(10) ** (est + 1) <= q:
        est += 1
    return est


def parse_decimal(s: str) -> Fraction:
    return Fraction(Decimal(s)) if "/" not in s else Fraction(s)


def log_fraction_upper(q: Fraction, prec: int = 128) -> Fraction:
    ctx = context(prec)
    return upper(ctx.log(from_fraction(ctx, q)))


def ceil_fraction(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def floor_fraction(q: Fraction) -> int:
    return q.numerator // q.denominator


def bits_for(magnitude: Fraction | int, guard: int = 64) -> int:
    """Working precision able to resolve integers of the given magnitude."""
    m = abs(Fraction(magnitude))
    if m <= 1:
        return guard + 32
    return int(math.log2(m.numerator + 1) - math.log2(m.denominator)) + guard + 32
