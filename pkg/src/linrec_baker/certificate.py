"""Self-contained run documents and their independent re-verification."""
from __future__ import annotations

import json
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .baker import Lemma31Params, lemma31_bound, theorem41_cascade
from .errors import LinrecError, MalformedDocument, VerificationFailed
from .intervals import context, decimal_lower, decimal_upper, endpoints
from .lattice import (
    LatticeProblem, ReductionCertificate, build_lattice, check_lattice_equality, is_reduced,
    lemma22_threshold2, shortest_vector_floor,
)
from .pipeline import (
    ALPHA, KAPPA, RunConfig, SolutionReport, ThetaSource, basics, bound_from_lambda, c0_constant,
    coefficient_bound, epsilon3, matveev_m_bound, per_m_candidates, per_m_n0, ratio_chain,
    ratio_multiplier, ratio_x_bound, round_down, sequence_constants, theta_enclosures,
)
from .recurrence import sequence_from_dict, terms
from .smooth import SolutionPair, check_relation, classify, primitive_root_power, relation_for, smooth_split

FORMAT = "linrec-baker-certificate/1"
CHECKS = ("structure", "lattice_equality", "floors", "lemma22", "bounds", "cascade", "scan_completeness")


# ---------------------------------------------------------------- encoding
def _q(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _unq(s: str) -> Fraction:
    return Fraction(s)


def _mat(rows) -> list[list[str]]:
    return [[str(v) for v in r] for r in rows]


def _unmat(rows) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in r) for r in rows)


def _record_json(rec) -> dict:
    c = rec.certificate
    return {
        "kind": rec.kind,
        "index": rec.index,
        "symbols": list(rec.symbols),
        "x_bound": str(rec.x_bound),
        "scale": str(rec.scale),
        "gamma": _q(rec.gamma),
        "matrix": _mat(c.matrix),
        "reduced": _mat(c.reduced),
        "transform": _mat(c.transform),
        "l2_floor": _q(c.l2_floor),
        "threshold2": _q(c.threshold2),
        "lambda_lower": _q(rec.lambda_lower),
        "lambda_lower_decimal": decimal_lower(rec.lambda_lower, 8),
        "eps": _q(rec.eps),
        "slope": _q(rec.slope),
        "intercept": _q(rec.intercept),
        "start": rec.start,
        "floor": rec.floor,
        "index_bound": rec.index_bound,
    }


def _versions() -> dict:
    import gmpy2
    import mpmath
    import sympy

    from . import __version__

    return {"artifact": __version__, "python": platform.python_version(), "mpmath": mpmath.__version__,
            "sympy": sympy.__version__, "gmpy2": gmpy2.version()}


def _config_json(config: RunConfig) -> dict:
    d = config.to_dict()
    for k in ("jobs", "out"):
        d.pop(k)
    return d


def emit_certificate(report: SolutionReport) -> dict:
    """Document from which every inequality of the run can be re-checked."""
    cfg = report.config
    spec = cfg.spec()
    reductions, per_m = [], []
    for rec in report.s_unit.reductions + report.ratio.reductions:
        reductions.append(_record_json(rec))
    for r in report.per_m:
        per_m.append({"m": r.m, "H": str(r.H), "root": str(r.root), "exponent": r.exponent, "n0": r.n0,
                      "lemma_bound": r.lemma_bound, "reduction": len(reductions)})
        reductions.append(_record_json(r.record))
    classes = [{"kind": "zero", "indices": list(report.classes.zero)},
               {"kind": "smooth", "indices": list(report.classes.smooth)}]
    us = terms(spec, report.scan_bound + 1)
    for root, idx in report.classes.nontrivial:
        rels = []
        for m, n in zip(idx, idx[1:]):
            pair = relation_for(m, n, us[m], us[n], report.cascade.primes)
            rels.append({"m": m, "n": n, "a": pair.a, "b": pair.b, "g": list(pair.g)})
        classes.append({"kind": "nontrivial", "root": str(root), "indices": list(idx), "relations": rels})
    doc = {
        "format": FORMAT,
        "status": "complete",
        "sequence": spec.to_json(),
        "primes": list(report.cascade.primes),
        "config": _config_json(cfg),
        "constants": {
            **report.constants.to_json(),
            **report.basics.to_json(),
            "C_0_rounded": decimal_upper(report.C0, 20),
            "epsilon_3": decimal_upper(report.eps3, 20),
            "epsilon_3_factor": decimal_upper(report.eps3_factor, 20),
        },
        "cascade": report.cascade.to_json(),
        "chain": {**report.ratio.chain.to_json(), "m_initial": report.ratio.initial_bound,
                  "s_unit_initial": report.s_unit.initial_bound},
        "reductions": reductions,
        "per_m": per_m,
        "scans": [
            {"name": "s_unit", "bound": report.s_unit.scan_bound, "s_units": list(report.s_unit.s_units),
             "zeros": list(report.s_unit.zeros)},
            {"name": "final", "bound": report.scan_bound},
        ],
        "classes": classes,
        "results": {
            "s_unit_bound": report.s_unit.final_bound,
            "m_bound": report.ratio.m_bound,
            "n_bound": report.n_bound,
            "lambda1_lower": decimal_lower(report.lambda1_lower, 8) if report.lambda1_lower else None,
            "perfect_power_m": list(report.perfect_power_m),
        },
        "notes": ["per-m forms use log|u_n| - log kappa_1 - n log alpha_1 with u_n split as an S-unit "
                  "times a power of the primitive root of the non-smooth part of u_m"],
        "meta": {"precision": cfg.precision, "versions": _versions()},
    }
    return doc


def failure_document(config: RunConfig, error: Exception) -> dict:
    return {
        "format": FORMAT,
        "status": "failed",
        "config": _config_json(config),
        "failure": {"error": type(error).__name__, "message": str(error),
                    "check": getattr(error, "check", None)},
        "meta": {"precision": config.precision, "versions": _versions()},
    }


def serialize(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be an object")
    return doc


def write_certificate(doc: dict, path: str | Path) -> None:
    Path(path).write_text(serialize(doc))


def read_certificate(path: str | Path) -> dict:
    return parse(Path(path).read_text())


# ---------------------------------------------------------------- verification
@dataclass
class VerifyResult:
    ok: bool
    failed_check: str | None = None
    detail: str = ""
    checks: tuple[str, ...] = ()


REQUIRED = {
    "format": str, "status": str, "sequence": dict, "primes": list, "config": dict, "constants": dict,
    "cascade": dict, "chain": dict, "reductions": list, "per_m": list, "scans": list, "classes": list,
    "results": dict, "meta": dict,
}
RECORD_KEYS = ("kind", "index", "symbols", "x_bound", "scale", "gamma", "matrix", "reduced", "transform",
               "l2_floor", "threshold2", "lambda_lower", "eps", "slope", "intercept", "start", "floor",
               "index_bound")


def _check_structure(doc: dict) -> None:
    if doc.get("format") != FORMAT:
        raise MalformedDocument("unknown format")
    if doc.get("status") == "failed":
        return
    for k, t in REQUIRED.items():
        if not isinstance(doc.get(k), t):
            raise MalformedDocument(f"missing or mistyped section {k!r}")
    for i, r in enumerate(doc["reductions"]):
        if not isinstance(r, dict) or any(k not in r for k in RECORD_KEYS):
            raise MalformedDocument(f"reduction {i} is incomplete")
        n = len(r["symbols"])
        for key in ("matrix", "reduced", "transform"):
            if len(r[key]) != n or any(len(row) != n for row in r[key]):
                raise MalformedDocument(f"reduction {i}: {key} is not {n}x{n}")
    names = [s.get("name") for s in doc["scans"]]
    if names != ["s_unit", "final"]:
        raise MalformedDocument("scans must be s_unit then final")
    try:
        sequence_from_dict(doc["sequence"])
        RunConfig.from_dict(doc["config"])
    except (ValueError, TypeError, KeyError) as exc:
        raise MalformedDocument(f"bad sequence or config: {exc}") from exc


def _cert(r: dict) -> ReductionCertificate:
    g = _unq(r["gamma"])
    return ReductionCertificate(_unmat(r["matrix"]), _unmat(r["reduced"]), _unmat(r["transform"]), g.denominator)


class _Fail(Exception):
    def __init__(self, check, detail):
        super().__init__(detail)
        self.check = check
        self.detail = detail


def _require(cond: bool, check: str, detail: str) -> None:
    if not cond:
        raise _Fail(check, detail)


def _lemma31_for(args):
    consts, primes, n0, form, log_term, lt = args
    return lemma31_bound(Lemma31Params(consts, primes, n0, form, log_term, (lt,) if lt else ())).index_bound


def verify_certificate(doc: dict, jobs: int = 1) -> VerifyResult:
    """Re-check every recorded inequality; the first failing check is reported."""
    _check_structure(doc)
    if doc["status"] == "failed":
        f = doc.get("failure", {})
        return VerifyResult(False, "status", f"run failed: {f.get('error')}: {f.get('message')}", ("structure",))
    done = ["structure"]
    try:
        _verify_body(doc, done, jobs)
    except _Fail as exc:
        return VerifyResult(False, exc.check, exc.detail, tuple(done))
    except LinrecError as exc:
        return VerifyResult(False, done[-1] if done else "structure", f"{type(exc).__name__}: {exc}", tuple(done))
    return VerifyResult(True, None, "", tuple(done))


def _verify_body(doc: dict, done: list, jobs: int) -> None:
    spec = sequence_from_dict(doc["sequence"])
    cfg = RunConfig.from_dict({**doc["config"], "jobs": 1})
    primes = tuple(doc["primes"])
    recs = doc["reductions"]

    # lattice equality: the reduced basis generates the same lattice as M
    for i, r in enumerate(recs):
        _require(check_lattice_equality(_cert(r)), "lattice_equality", f"reduction {i} ({r['kind']} {r['index']})")
    done.append("lattice_equality")

    # floors: rebuild every matrix from independently recomputed theta enclosures
    source = ThetaSource(spec)
    for i, r in enumerate(recs):
        scale, gamma = int(r["scale"]), _unq(r["gamma"])
        bits = (scale * gamma.numerator).bit_length() + 64
        thetas = theta_enclosures(r["symbols"], bits, source._spectral_logs(bits))
        prob = LatticeProblem(tuple(thetas), scale, gamma, int(r["x_bound"]), tuple(r["symbols"]))
        _require(build_lattice(prob) == _unmat(r["matrix"]), "floors", f"reduction {i}: matrix entries differ")
    done.append("floors")

    # shortest-vector test
    for i, r in enumerate(recs):
        c = _cert(r)
        n, x, gamma = len(r["symbols"]), int(r["x_bound"]), _unq(r["gamma"])
        _require(is_reduced(c.reduced), "lemma22", f"reduction {i}: basis is not reduced")
        l2 = shortest_vector_floor(c, cfg.floor_method)
        thr = lemma22_threshold2(n, x, gamma)
        _require(l2 == _unq(r["l2_floor"]) and thr == _unq(r["threshold2"]), "lemma22",
                 f"reduction {i}: recorded floor or threshold differs")
        _require(l2 > thr, "lemma22", f"reduction {i}: shortest-vector floor below threshold")
        _require(_unq(r["lambda_lower"]) == Fraction(x) / (int(r["scale"]) * gamma), "lemma22",
                 f"reduction {i}: |Lambda| lower bound differs")
    done.append("lemma22")

    _verify_bounds(doc, spec, cfg, primes, recs, jobs)
    done.append("bounds")

    consts = sequence_constants(spec, cfg.precision)
    cascade = theorem41_cascade(consts, primes, cfg.n1, Fraction(cfg.mu), cfg.matveev_form, cfg.log_term)
    _require(cascade.to_json() == doc["cascade"], "cascade", "recomputed cascade differs")
    done.append("cascade")

    _verify_scans(doc, spec, cfg, primes)
    done.append("scan_completeness")


def _check_record_bound(r: dict, consts, eps, slope, intercept, start, floor, what) -> int:
    _require(_unq(r["eps"]) == eps and _unq(r["slope"]) == slope and _unq(r["intercept"]) == intercept
             and r["start"] == start and r["floor"] == floor, "bounds", f"{what}: bound inputs differ")
    b = bound_from_lambda(_unq(r["lambda_lower"]), consts.K, consts.delta, eps, slope, intercept, start, floor)
    _require(b == r["index_bound"], "bounds", f"{what}: index bound {r['index_bound']} should be {b}")
    return b


def _verify_bounds(doc, spec, cfg, primes, recs, jobs) -> None:
    consts = sequence_constants(spec, cfg.precision)
    _require(consts.to_json() == {k: doc["constants"][k] for k in consts.to_json()}, "bounds",
             "sequence constants differ")
    b = basics(consts, primes, cfg.n1)
    s_recs = [r for r in recs if r["kind"] == "s_unit"]
    r_recs = [r for r in recs if r["kind"] == "ratio"]
    m_recs = [r for r in recs if r["kind"] == "per_m"]

    lem = lemma31_bound(Lemma31Params(consts, primes, cfg.n1, cfg.matveev_form, cfg.log_term))
    bound = max(cfg.n1, lem.index_bound)
    _require(doc["chain"]["s_unit_initial"] == bound, "bounds", "S-unit preliminary bound differs")
    for r in s_recs:
        _require(int(r["x_bound"]) >= coefficient_bound(b, bound), "bounds", f"S-unit pass {r['index']}: X_1 too small")
        bound = _check_record_bound(r, consts, b.eps1, Fraction(0), Fraction(1), bound, cfg.n1,
                                    f"S-unit pass {r['index']}")
    _require(doc["results"]["s_unit_bound"] == bound, "bounds", "S-unit final bound differs")

    cascade = theorem41_cascade(consts, primes, cfg.n1, Fraction(cfg.mu), cfg.matveev_form, cfg.log_term)
    chain = ratio_chain(consts, cascade, b, cfg)
    chain_json = {k: v for k, v in doc["chain"].items() if k not in ("m_initial", "s_unit_initial")}
    _require(chain.to_json() == chain_json, "bounds", "ratio-stage constants differ")
    m = matveev_m_bound(chain, b, consts, cfg.n1)
    _require(doc["chain"]["m_initial"] == m, "bounds", "initial m bound differs")
    slope, icpt = ratio_multiplier(chain, b)
    for r in r_recs:
        _require(int(r["x_bound"]) >= ratio_x_bound(chain, b, cfg.n1, m), "bounds",
                 f"ratio pass {r['index']}: X_1 too small")
        m = _check_record_bound(r, consts, b.eps1, slope, icpt, m, cfg.n1, f"ratio pass {r['index']}")
    _require(doc["results"]["m_bound"] == m, "bounds", "m bound differs")

    # per-m forms cover every m <= m bound with a non-trivial non-smooth part
    cands = per_m_candidates(spec, primes, m)
    entries = doc["per_m"]
    _require([e["m"] for e in entries] == [c[0] for c in cands], "bounds", "per-m forms do not cover every m")
    _, eps3f = epsilon3(consts, cfg.tail_start)
    C0 = c0_constant(consts, cfg.mu)
    ctx = context(256)
    A = max([consts.h_alpha1[1], consts.h_kappa1[1]] + [endpoints(ctx.log(p))[1] for p in primes])
    args, checks = [], []
    for e, (mm, h) in zip(entries, cands):
        root, ex = primitive_root_power(h)
        _require(int(e["H"]) == h and int(e["root"]) == root and e["exponent"] == ex, "bounds",
                 f"m = {mm}: non-smooth part differs")
        lt = endpoints(ctx.log(root))
        n0 = per_m_n0(C0, A, lt[1], cfg.n1)
        _require(e["n0"] == n0, "bounds", f"m = {mm}: n_0 differs")
        args.append((consts, primes, n0, cfg.matveev_form, cfg.log_term, lt))
        checks.append((e, mm, root, lt))
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            lems = list(ex.map(_lemma31_for, args, chunksize=8))
    else:
        lems = [_lemma31_for(a) for a in args]
    n_bound = 0
    for lem_b, (e, mm, root, lt), a in zip(lems, checks, args):
        N = max(a[2], lem_b)
        _require(e["lemma_bound"] == N, "bounds", f"m = {mm}: preliminary n bound differs")
        r = recs[e["reduction"]]
        _require(r["kind"] == "per_m" and r["index"] == mm, "bounds", f"m = {mm}: reduction link broken")
        _require(sorted(r["symbols"]) == sorted([f"log:{p}" for p in primes] + [f"log:{root}", KAPPA, ALPHA]),
                 "bounds", f"m = {mm}: wrong thetas")
        _require(int(r["x_bound"]) >= coefficient_bound(b, N, round_down(lt[0])), "bounds", f"m = {mm}: X_1 too small")
        n_bound = max(n_bound, _check_record_bound(r, consts, eps3f, Fraction(0), Fraction(1), N, cfg.tail_start,
                                                   f"m = {mm}"))
    _require(len(m_recs) == len(entries), "bounds", "unlinked per-m reductions")
    _require(doc["results"]["n_bound"] == n_bound, "bounds", "final n bound differs")


def _verify_scans(doc, spec, cfg, primes) -> None:
    res = doc["results"]
    s_scan, final = doc["scans"]
    _require(s_scan["bound"] >= max(res["s_unit_bound"], cfg.n1), "scan_completeness", "S-unit scan too short")
    need = max(s_scan["bound"], res["m_bound"], res["n_bound"], cfg.tail_start, cfg.n1)
    _require(final["bound"] >= need, "scan_completeness",
             f"final scan bound {final['bound']} is below the proven bound {need}")
    us = terms(spec, max(final["bound"], s_scan["bound"]) + 1)
    cof = [smooth_split(u, primes).cofactor for u in us]
    su = [n for n in range(s_scan["bound"] + 1) if cof[n] == 1]
    zs = [n for n in range(s_scan["bound"] + 1) if cof[n] == 0]
    _require(su == s_scan["s_units"] and zs == s_scan["zeros"], "scan_completeness", "S-unit list differs")
    classes = classify(cof[: final["bound"] + 1])
    expect = [{"kind": "zero", "indices": list(classes.zero)}, {"kind": "smooth", "indices": list(classes.smooth)}]
    expect += [{"kind": "nontrivial", "root": str(r), "indices": list(ix)} for r, ix in classes.nontrivial]
    got = [{k: v for k, v in c.items() if k != "relations"} for c in doc["classes"]]
    _require(got == expect, "scan_completeness", "classes differ from a rescan")
    for c in doc["classes"]:
        for rel in c.get("relations", []):
            pair = SolutionPair(rel["m"], rel["n"], rel["a"], rel["b"], tuple(rel["g"]))
            _require(rel["a"] > 0 and rel["b"] > 0 and check_relation(us[rel["m"]], us[rel["n"]], primes, pair),
                     "scan_completeness", f"relation for ({rel['m']}, {rel['n']}) fails")


def verify_or_raise(doc: dict, jobs: int = 1) -> VerifyResult:
    res = verify_certificate(doc, jobs)
    if not res.ok:
        raise VerificationFailed(res.failed_check, res.detail)
    return res
