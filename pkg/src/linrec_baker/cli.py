"""Command-line front end: solve, sunit, verify and oracle."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    AmbiguousFloor, DominanceViolation, HypothesisViolation, LinrecError, MalformedDocument,
    MultipleRootsUnsupported, NotRealPositive, PrecisionExhausted, SearchExhausted, SingularMatrix, TestFailed,
    VerificationFailed,
)
from .recurrence import load_sequence, terms

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_REDUCTION, EXIT_VERIFY = 0, 2, 3, 4, 5
DEFAULT_OUT = "certificate.json"

HYPOTHESIS_ERRORS = (HypothesisViolation, DominanceViolation, MultipleRootsUnsupported, NotRealPositive)
REDUCTION_ERRORS = (SearchExhausted, TestFailed, AmbiguousFloor, SingularMatrix, PrecisionExhausted)


class UsageError(Exception):
    pass


def format_indices(ix) -> str:
    """Compress runs: [0, 1, 2, 3, 5] -> '0..3 5'."""
    ix = sorted(ix)
    out, i = [], 0
    while i < len(ix):
        j = i
        while j + 1 < len(ix) and ix[j + 1] == ix[j] + 1:
            j += 1
        if j - i >= 2:
            out.append(f"{ix[i]}..{ix[j]}")
        else:
            out.extend(str(v) for v in ix[i:j + 1])
        i = j + 1
    return " ".join(out) if out else "-"


def parse_primes(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad prime list {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    p.add_argument("--preset", help="built-in sequence (padovan, fibonacci)")
    p.add_argument("--sequence", help="JSON file with coefficients and initial_terms")
    p.add_argument("--primes", help="comma separated primes, e.g. 2,3,5,7")
    p.add_argument("--n1", type=int)
    p.add_argument("--mu")
    p.add_argument("--precision", type=int, help="starting precision in bits")
    p.add_argument("--max-index", type=int, dest="max_index")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linrec-baker", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("solve", "find every class of related indices and write a certificate"),
                       ("sunit", "list the indices whose term is an S-unit"),
                       ("oracle", "brute-force all related pairs up to --max-index")]:
        _common(sub.add_parser(name, help=text))
    v = sub.add_parser("verify", help="re-check a certificate")
    v.add_argument("path")
    v.add_argument("--jobs", type=int, default=None)
    return parser


def make_config(args):
    from .pipeline import RunConfig, load_config

    try:
        data = load_config(args.config).to_dict() if args.config else {}
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    if args.preset is not None:
        data["preset"], data["sequence"] = args.preset, None
    if args.sequence is not None:
        try:
            data["sequence"] = load_sequence(args.sequence).to_json()
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read sequence file: {exc}") from exc
    if args.primes is not None:
        data["primes"] = parse_primes(args.primes)
    for key in ("n1", "mu", "precision", "max_index", "jobs", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    try:
        return RunConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    from .certificate import emit_certificate, failure_document, write_certificate
    from .pipeline import solve_power_ratio

    cfg = make_config(args)
    path = cfg.out or DEFAULT_OUT
    try:
        report = solve_power_ratio(cfg.spec(), cfg.primes, cfg, progress=lambda m: print(m, file=sys.stderr))
    except LinrecError as exc:
        write_certificate(failure_document(cfg, exc), path)
        raise
    write_certificate(emit_certificate(report), path)
    print(summary_table(report), file=out)
    print(f"certificate written to {path}", file=out)
    return EXIT_OK


def summary_table(report) -> str:
    rows = [("class", "H", "indices")]
    c = report.classes
    rows.append(("zero", "0", format_indices(c.zero)))
    rows.append(("smooth", "1", format_indices(c.smooth)))
    for root, ix in c.nontrivial:
        rows.append(("power", str(root), format_indices(ix)))
    w0 = max(len(r[0]) for r in rows)
    w1 = min(24, max(len(r[1]) for r in rows))
    lines = [f"{r[0]:<{w0}}  {r[1]:<{w1}}  {r[2]}" for r in rows]
    lines.append(f"S-unit bound  n <= {report.s_unit.final_bound}")
    lines.append(f"ratio bound   m <= {report.ratio.m_bound}")
    lines.append(f"per-m bound   n <= {report.n_bound} ({len(report.per_m)} forms)")
    lines.append(f"scan bound    {report.scan_bound}")
    return "\n".join(lines)


def cmd_sunit(args, out=None) -> int:
    out = out or sys.stdout
    from .pipeline import solve_s_unit

    cfg = make_config(args)
    res = solve_s_unit(cfg.spec(), cfg.primes, cfg)
    print(format_indices(res.s_units + res.zeros), file=out)
    print(f"S-units:    {format_indices(res.s_units)}", file=out)
    print(f"zero terms: {format_indices(res.zeros)}", file=out)
    how = "direct scan" if res.direct else f"reduced bound n <= {res.final_bound}"
    print(f"scanned 0..{res.scan_bound} ({how})", file=out)
    return EXIT_OK


def cmd_oracle(args, out=None) -> int:
    out = out or sys.stdout
    from .smooth import brute_force_oracle, classify, smooth_split

    cfg = make_config(args)
    R = 60 if cfg.max_index is None else cfg.max_index
    spec = cfg.spec()
    pairs = brute_force_oracle(spec, cfg.primes, R)
    cls = classify([smooth_split(u, cfg.primes).cofactor for u in terms(spec, R + 1)])
    print(f"range 0..{R}: {len(pairs)} related pairs", file=out)
    print(f"zero    {format_indices(cls.zero)}", file=out)
    print(f"smooth  {format_indices(cls.smooth)}", file=out)
    for root, ix in cls.nontrivial:
        print(f"H={root}  {format_indices(ix)}", file=out)
    return EXIT_OK


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    from .certificate import read_certificate, verify_certificate
    from .pipeline import default_jobs

    path = Path(args.path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    res = verify_certificate(read_certificate(path), args.jobs or default_jobs())
    if res.ok:
        print(f"verification passed ({', '.join(res.checks)})", file=out)
        return EXIT_OK
    print(f"verification FAILED at {res.failed_check}: {res.detail}", file=out)
    return EXIT_VERIFY


COMMANDS = {"solve": cmd_solve, "sunit": cmd_sunit, "oracle": cmd_oracle, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HYPOTHESIS_ERRORS as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (MalformedDocument, VerificationFailed) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except REDUCTION_ERRORS as exc:
        print(f"reduction failure: {exc}", file=sys.stderr)
        return EXIT_REDUCTION
    except json.JSONDecodeError as exc:
        print(f"usage error: bad JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LinrecError as exc:
        print(f"pipeline failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REDUCTION


if __name__ == "__main__":
    sys.exit(main())
