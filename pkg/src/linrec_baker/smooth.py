"""Smooth parts, perfect powers, multiplicative dependence and the brute-force solution oracle."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import gmpy2
import sympy

from .errors import FactorizationTooHard
from .recurrence import SequenceSpec, terms

DEFAULT_DIGIT_BUDGET = 20_000


@dataclass(frozen=True)
class SmoothSplit:
    """N = sign * prod p_i^{exponents_i} * cofactor, with cofactor coprime to every p_i (or zero)."""

    exponents: tuple[int, ...]
    cofactor: int
    sign: int = 1


@dataclass(frozen=True)
class PowerWitness:
    base: int
    exponent: int


def smooth_split(N: int, primes: Sequence[int]) -> SmoothSplit:
    N = int(N)
    if N == 0:
        return SmoothSplit(tuple(0 for _ in primes), 0, 1)
    sign = -1 if N < 0 else 1
    rest = abs(N)
    exps = []
    for p in primes:
        e = 0
        if rest % p == 0:
            mpz_rest, e = gmpy2.remove(gmpy2.mpz(rest), p)
            rest = int(mpz_rest)
        exps.append(int(e))
    return SmoothSplit(tuple(exps), rest, sign)


def is_perfect_power(N: int) -> PowerWitness | None:
    """Witness x^q = N with the largest exponent q >= 2, or None (also for N = 1)."""
    N = int(N)
    if N < 2:
        return None
    best = None
    base, total = N, 1
    progress = True
    while progress and base >= 4:
        progress = False
        for q in sympy.primerange(2, base.bit_length() + 1):
            root, exact = gmpy2.iroot(gmpy2.mpz(base), int(q))
            if exact:
                base, total = int(root), total * int(q)
                progress = True
                break
    if total > 1:
        best = PowerWitness(base, total)
    return best


def primitive_root_power(N: int) -> tuple[int, int]:
    """N = root^e with root not a perfect power (N >= 2)."""
    w = is_perfect_power(N)
    return (w.base, w.exponent) if w else (int(N), 1)


def coprime_base(numbers: Iterable[int]) -> list[int]:
    """Pairwise coprime integers > 1 generating every input multiplicatively (gcd refinement)."""
    base = [int(n) for n in numbers if int(n) > 1]
    changed = True
    while changed:
        changed = False
        for i in range(len(base)):
            for j in range(i + 1, len(base)):
                g = gcd(base[i], base[j])
                if g > 1:
                    a, b = base[i] // g, base[j] // g
                    base = [x for k, x in enumerate(base) if k not in (i, j)] + [g, a, b]
                    base = [x for x in base if x > 1]
                    changed = True
                    break
            if changed:
                break
    return sorted(set(base))


def _valuation(n: int, q: int) -> int:
    if q < 2:
        return 0
    _, e = gmpy2.remove(gmpy2.mpz(n), q)
    return int(e)


def multiplicative_dependence(h_m: int, h_n: int, digit_budget: int = DEFAULT_DIGIT_BUDGET) -> tuple[int, int] | None:
    """Coprime (a, b) with h_m^b = h_n^a, or None when no such positive pair exists."""
    h_m, h_n = int(h_m), int(h_n)
    if h_m < 1 or h_n < 1:
        raise ValueError("inputs must be positive integers")
    if max(len(str(h_m)), len(str(h_n))) > digit_budget:
        raise FactorizationTooHard("inputs exceed the digit budget")
    if h_m == h_n:
        return (1, 1)
    if h_m == 1 or h_n == 1:
        return None
    base = coprime_base([h_m, h_n])
    vm = [_valuation(h_m, q) for q in base]
    vn = [_valuation(h_n, q) for q in base]
    # h_m^b = h_n^a  <=>  b * vm = a * vn componentwise
    ratio = None
    for x, y in zip(vm, vn):
        if (x == 0) != (y == 0):
            return None
        if x:
            r = Fraction(x, y)
            if ratio is None:
                ratio = r
            elif r != ratio:
                return None
    # a / b = vm / vn, already in lowest terms
    return ratio.numerator, ratio.denominator


@dataclass(frozen=True)
class SolutionPair:
    m: int
    n: int
    a: int
    b: int
    g: tuple[int, ...]


def check_relation(u_m: int, u_n: int, primes: Sequence[int], pair: SolutionPair) -> bool:
    """Exact check of u_n^a = prod p_i^{g_i} u_m^b."""
    num, den = u_n ** pair.a, u_m ** pair.b
    for p, g in zip(primes, pair.g):
        if g >= 0:
            den *= p**g
        else:
            num *= p ** (-g)
    return num == den


def relation_for(m: int, n: int, u_m: int, u_n: int, primes: Sequence[int]) -> SolutionPair | None:
    """Reconstruct (a, b, g) with u_n^a = prod p_i^{g_i} u_m^b, a, b > 0 coprime."""
    sm, sn = smooth_split(u_m, primes), smooth_split(u_n, primes)
    if sm.cofactor == 0 or sn.cofactor == 0:
        if sm.cofactor == 0 and sn.cofactor == 0:
            return SolutionPair(m, n, 1, 1, tuple(0 for _ in primes))
        return None
    dep = multiplicative_dependence(sm.cofactor, sn.cofactor)
    if dep is None:
        return None
    a, b = dep
    if sn.sign**a != sm.sign**b:
        return None
    g = tuple(a * fn - b * em for em, fn in zip(sm.exponents, sn.exponents))
    pair = SolutionPair(m, n, a, b, g)
    if not check_relation(u_m, u_n, primes, pair):
        raise AssertionError(f"reconstructed relation fails for ({m}, {n})")
    return pair


def brute_force_oracle(spec: SequenceSpec, primes: Sequence[int], R: int) -> list[SolutionPair]:
    """All 0 <= m < n <= R with u_n^a = prod p_i^{g_i} u_m^b for some a, b > 0."""
    us = terms(spec, R + 1)
    splits = [smooth_split(u, primes) for u in us]
    out = []
    for m in range(R + 1):
        for n in range(m + 1, R + 1):
            hm, hn = splits[m].cofactor, splits[n].cofactor
            if (hm == 0) != (hn == 0):
                continue
            if hm and hn and hm != hn and gcd(hm, hn) == 1:
                continue
            pair = relation_for(m, n, us[m], us[n], primes)
            if pair is not None:
                out.append(pair)
    return out


@dataclass(frozen=True)
class SolutionClasses:
    zero: tuple[int, ...]
    smooth: tuple[int, ...]
    nontrivial: tuple[tuple[int, tuple[int, ...]], ...]  # (primitive root of H, indices)

    def as_sets(self) -> list[frozenset[int]]:
        out = []
        if self.zero:
            out.append(frozenset(self.zero))
        if self.smooth:
            out.append(frozenset(self.smooth))
        out.extend(frozenset(ix) for _, ix in self.nontrivial)
        return out


def classify(cofactors: Sequence[int], signs: Sequence[int] | None = None) -> SolutionClasses:
    """Group indices by the primitive root of their non-smooth part.

    Indices in one group are exactly those pairwise related by H_m^b = H_n^a.
    Groups of size one are dropped from the nontrivial list.
    """
    zero, smooth, groups = [], [], {}
    for i, h in enumerate(cofactors):
        if h == 0:
            zero.append(i)
        elif h == 1:
            smooth.append(i)
        else:
            root, _ = primitive_root_power(h)
            groups.setdefault(root, []).append(i)
    nontriv = tuple(sorted(((r, tuple(ix)) for r, ix in groups.items() if len(ix) >= 2), key=lambda t: t[1]))
    return SolutionClasses(tuple(zero), tuple(smooth), nontriv)


def classes_from_pairs(pairs: Iterable[SolutionPair]) -> list[frozenset[int]]:
    parent: dict[int, int] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in pairs:
        ra, rb = find(p.m), find(p.n)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, set[int]] = {}
    for x in list(parent):
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)
