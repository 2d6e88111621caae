import time

import pytest

from linrec_baker.certificate import emit_certificate, serialize
from linrec_baker.pipeline import RunConfig, default_jobs, solve_power_ratio
from linrec_baker.recurrence import PADOVAN


@pytest.fixture(scope="session")
def padovan_run():
    """The full Padovan / {2,3,5,7} run, shared by every test that needs it."""
    cfg = RunConfig(jobs=default_jobs())
    t0 = time.perf_counter()
    report = solve_power_ratio(PADOVAN, cfg.primes, cfg)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def padovan_report(padovan_run):
    return padovan_run[0]


@pytest.fixture(scope="session")
def padovan_certificate(padovan_report, tmp_path_factory):
    text = serialize(emit_certificate(padovan_report))
    path = tmp_path_factory.mktemp("cert") / "padovan.json"
    path.write_text(text)
    return path, text
