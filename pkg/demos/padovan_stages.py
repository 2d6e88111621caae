"""Walk through the Padovan / {2, 3, 5, 7} computation one stage at a time.

Runs the quick stages and lists the per-m work without doing it, so it finishes
in seconds. Use ``linrec-baker solve`` for the complete run.
"""
import time

from linrec_baker.baker import Lemma31Params, lemma31_bound, theorem41_cascade
from linrec_baker.pipeline import (
    RunConfig, ThetaSource, basics, global_ratio_stage, per_m_candidates, sequence_constants, solve_s_unit,
)
from linrec_baker.recurrence import PADOVAN, terms
from linrec_baker.smooth import brute_force_oracle, classes_from_pairs, smooth_split

PRIMES = (2, 3, 5, 7)
t0 = time.perf_counter()


def stamp(msg):
    print(f"[{time.perf_counter() - t0:6.1f}s] {msg}")


print("first terms:", terms(PADOVAN, 20))

consts = sequence_constants(PADOVAN)
stamp(f"K <= {float(consts.K):.10f}, delta >= {float(consts.delta):.10f}, "
      f"h(kappa1) ~ {float(consts.h_kappa1[1]):.6f}")

lem = lemma31_bound(Lemma31Params(consts, PRIMES, 27))
for st in lem.stages:
    print(f"    s={st.s}  Psi={float(st.Psi):.4e}  bound={float(st.bound):.4e}")
stamp(f"S-unit bound before reduction: n < {float(lem.bound):.4e}")

su = solve_s_unit(PADOVAN, PRIMES, RunConfig())
for rec in su.reductions:
    print(f"    C=10^{len(str(rec.scale)) - 1}  gamma={rec.gamma}  last={rec.symbols[-1]}  -> n <= {rec.index_bound}")
stamp(f"S-units: {su.s_units}, zero terms: {su.zeros}")

cascade = theorem41_cascade(consts, PRIMES, 27, 10)
for name in ("epsilon", "C_1", "C_2", "C_3", "C_5", "C_5'"):
    print(f"    {name:8s} <= {float(cascade[name]):.6e}")
ratio = global_ratio_stage(PADOVAN, consts, cascade, basics(consts, PRIMES, 27), RunConfig(), ThetaSource(PADOVAN))
for rec in ratio.reductions:
    print(f"    C=10^{len(str(rec.scale)) - 1}  last={rec.symbols[-1]}  -> m <= {rec.index_bound}")
stamp(f"ratio stage: m <= {ratio.m_bound}")

cands = per_m_candidates(PADOVAN, PRIMES, ratio.m_bound)
print(f"{len(cands)} indices m need a per-m form; the first few cofactors H_m:")
for m, h in cands[:6]:
    print(f"    m={m:3d}  H_m={h}")

us = terms(PADOVAN, 301)
pairs = brute_force_oracle(PADOVAN, PRIMES, 300)
for cls in sorted(classes_from_pairs(pairs), key=min):
    idx = sorted(cls)
    h = smooth_split(us[idx[-1]], PRIMES).cofactor
    print(f"    H={h}: {idx}")
stamp("oracle classes on [0, 300]")
