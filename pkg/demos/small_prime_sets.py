"""Full runs on small prime sets, one of which stops at a genuine integer relation."""
import time

from linrec_baker.certificate import emit_certificate, serialize, verify_certificate
from linrec_baker.errors import HypothesisViolation
from linrec_baker.pipeline import RunConfig, solve_power_ratio
from linrec_baker.recurrence import FIBONACCI, PADOVAN

for name, spec, primes in [("padovan", PADOVAN, (2,)), ("fibonacci", FIBONACCI, (2, 3))]:
    cfg = RunConfig(preset=name, primes=primes)
    t0 = time.perf_counter()
    try:
        report = solve_power_ratio(spec, primes, cfg)
    except HypothesisViolation as exc:
        # u_n = (alpha^n - beta^n) / sqrt(5): the leading coefficient and H_m = 5 are multiplicatively dependent
        print(f"{name} {primes}: stopped, {exc}")
        continue
    doc = emit_certificate(report)
    res = verify_certificate(doc)
    print(f"{name} {primes}: {time.perf_counter() - t0:.1f}s, m <= {report.ratio.m_bound}, n <= {report.n_bound}, "
          f"certificate {len(serialize(doc)) // 1024} KiB, verified={res.ok}")
    for root, idx in report.classes.nontrivial:
        print(f"    H={root}: {list(idx)}")
