import json
import math
from fractions import Fraction
from itertools import combinations

import pytest

from linrec_baker.baker import theorem41_cascade
from linrec_baker.errors import HypothesisViolation
from linrec_baker.heights import FieldElement
from linrec_baker.pipeline import (
    RunConfig, ThetaSource, basics, check_independence, epsilon3, global_ratio_stage, kappa1_element, load_config,
    per_m_candidates, sequence_constants, solve_s_unit,
)
from linrec_baker.recurrence import FIBONACCI, PADOVAN, solve_spectrum_auto, terms
from linrec_baker.smooth import check_relation, classify, is_perfect_power, relation_for, smooth_split

PRIMES = (2, 3, 5, 7)
S_UNITS = tuple(list(range(0, 19)) + [20, 25, 36])


def padovan_s_units():
    return tuple(n for n in S_UNITS if n not in (1, 2, 4))


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        RunConfig(primes=(4,))
    with pytest.raises(ValueError):
        RunConfig(primes=(2, 2))
    with pytest.raises(ValueError):
        RunConfig(mu="1")
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        RunConfig(preset="lucas")
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"primes": [2, 3], "n1": 30}))
    cfg = load_config(p)
    assert cfg.primes == (2, 3) and cfg.n1 == 30 and RunConfig.from_dict(cfg.to_dict()) == cfg


def test_kappa1_in_field():
    sd = solve_spectrum_auto(PADOVAN)
    k = kappa1_element(PADOVAN, sd.minimal_polynomial, sd.alpha1)
    alpha = FieldElement.generator(sd.minimal_polynomial, sd.alpha1)
    assert k == 1 / (2 * alpha + 3)


def test_sequence_constants():
    c = sequence_constants(PADOVAN)
    assert c.D == 3
    assert abs(float(c.K) - 5.5998153592861) < 1e-10
    assert abs(float(c.delta) - 1.5247025799) < 1e-9
    assert abs(float(c.h_kappa1[1]) - math.log(23) / 3) < 1e-12


def test_s_unit_padovan():
    res = solve_s_unit(PADOVAN, PRIMES, RunConfig())
    assert res.s_units == padovan_s_units()
    assert res.zeros == (1, 2, 4)
    assert res.initial_bound < Fraction("2.456e24")
    assert res.final_bound <= 1000 and res.scan_bound >= res.final_bound
    bounds = [res.initial_bound] + [r.index_bound for r in res.reductions]
    assert bounds == sorted(bounds, reverse=True)


def test_s_unit_direct_scan():
    res = solve_s_unit(PADOVAN, PRIMES, RunConfig(max_index=50))
    assert res.direct and res.scan_bound == 50
    assert res.s_units == tuple(n for n in padovan_s_units() if n <= 50)


def test_s_unit_fibonacci_against_direct_scan():
    res = solve_s_unit(FIBONACCI, (2, 3), RunConfig(preset="fibonacci", primes=(2, 3)))
    us = terms(FIBONACCI, res.scan_bound + 1)
    direct = tuple(n for n in range(res.scan_bound + 1) if smooth_split(us[n], (2, 3)).cofactor == 1)
    assert res.s_units == direct == (1, 2, 3, 4, 6, 12)
    assert res.zeros == (0,)


def test_global_ratio_stage():
    cfg = RunConfig()
    consts = sequence_constants(PADOVAN)
    cascade = theorem41_cascade(consts, PRIMES, 27, 10)
    res = global_ratio_stage(PADOVAN, consts, cascade, basics(consts, PRIMES, 27), cfg, ThetaSource(PADOVAN))
    assert res.m_bound <= 1100
    bounds = [res.initial_bound] + [r.index_bound for r in res.reductions]
    assert bounds == sorted(bounds, reverse=True) and len(res.reductions) >= 2


def test_epsilon3():
    e3, factor = epsilon3(sequence_constants(PADOVAN), 100)
    assert e3 < Fraction(3, 10**18)
    assert factor > e3


def test_independence_probe_flags_relation():
    src = ThetaSource(PADOVAN)
    with pytest.raises(HypothesisViolation):
        check_independence(["log:2", "log:3", "log:6"], src._spectral_logs, 256, "probe")
    check_independence(["log:2", "log:3", "log:5", "log:7", "log:kappa1", "log:alpha1"], src._spectral_logs, 512,
                       "probe")


def test_per_m_candidates():
    cands = per_m_candidates(PADOVAN, PRIMES, 60)
    assert [m for m, _ in cands] == [m for m in range(61) if m not in padovan_s_units() and m not in (1, 2, 4)]
    assert dict(cands)[21] == 13


def test_full_run_classes(padovan_report):
    sets = sorted(padovan_report.classes.as_sets(), key=min)
    assert sets == [frozenset(padovan_s_units()), frozenset({1, 2, 4}), frozenset({21, 27, 49})]
    assert dict(padovan_report.classes.nontrivial) == {13: (21, 27, 49)}


def test_full_run_bounds(padovan_report):
    r = padovan_report
    assert r.s_unit.final_bound <= 1000
    assert r.ratio.m_bound <= 1100
    assert r.n_bound <= 1100
    assert r.scan_bound >= max(r.n_bound, r.ratio.m_bound, r.s_unit.scan_bound)
    assert r.eps3 < Fraction(3, 10**18)
    for res in r.per_m:
        assert res.record.scale * res.record.gamma <= 3 * 10**214


def test_full_run_per_m_coverage(padovan_report):
    r = padovan_report
    want = [m for m, _ in per_m_candidates(PADOVAN, PRIMES, r.ratio.m_bound)]
    assert [res.m for res in r.per_m] == want
    assert r.perfect_power_m == ()
    for res in r.per_m:
        assert is_perfect_power(res.H) is None and res.root == res.H


def test_full_run_relations_exact(padovan_report):
    us = terms(PADOVAN, padovan_report.scan_bound + 1)
    for ix in padovan_report.classes.as_sets():
        for m, n in combinations(sorted(ix), 2):
            pair = relation_for(m, n, us[m], us[n], PRIMES)
            assert pair is not None and pair.a > 0 and pair.b > 0
            assert check_relation(us[m], us[n], PRIMES, pair)


def test_larger_scan_keeps_solutions(padovan_report):
    r = padovan_report
    us = terms(PADOVAN, r.scan_bound + 201)
    bigger = classify([smooth_split(u, PRIMES).cofactor for u in us])
    for old in r.classes.as_sets():
        assert any(old <= new for new in bigger.as_sets())
