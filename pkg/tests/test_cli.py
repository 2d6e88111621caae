import copy
import json

from linrec_baker.certificate import parse, serialize
from linrec_baker.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, format_indices, main
from linrec_baker.recurrence import PADOVAN
from linrec_baker.smooth import brute_force_oracle, classes_from_pairs


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_format_indices():
    assert format_indices([0, 1, 2, 3, 5]) == "0..3 5"
    assert format_indices([1, 2, 4]) == "1 2 4"
    assert format_indices([]) == "-"


def test_sunit_padovan(capsys):
    code, out, _ = run(capsys, "sunit", "--preset", "padovan", "--primes", "2,3,5,7")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "0..18 20 25 36"
    assert lines[2] == "zero terms: 1 2 4"


def test_sunit_direct_scan(capsys):
    code, out, _ = run(capsys, "sunit", "--max-index", "50")
    assert code == EXIT_OK and out.splitlines()[0] == "0..18 20 25 36"
    assert "direct scan" in out
    code, out, _ = run(capsys, "sunit", "--max-index", "30")
    assert out.splitlines()[0] == "0..18 20 25"


def test_sunit_empty_prime_list(capsys):
    code, out, _ = run(capsys, "sunit", "--primes", "")
    assert code == EXIT_OK
    # only the terms equal to 0 or 1
    assert out.splitlines()[0] == "0..7"
    assert out.splitlines()[2] == "zero terms: 1 2 4"


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "--max-index", "60")
    assert code == EXIT_OK
    assert "zero    1 2 4" in out
    assert "smooth  0 3 5..18 20 25 36" in out
    assert "H=13  21 27 49" in out
    code, out, _ = run(capsys, "oracle", "--max-index", "5")
    assert "zero    1 2 4" in out and "smooth  0 3 5" in out and "H=" not in out
    code, out, _ = run(capsys, "oracle", "--max-index", "0")
    assert code == EXIT_OK and "range 0..0: 0 related pairs" in out


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "solve", "--primes", "4")[0] == EXIT_USAGE
    assert run(capsys, "sunit", "--primes", "2,x")[0] == EXIT_USAGE
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"primes": [2], "nonsense": 1}))
    assert run(capsys, "sunit", "--config", str(bad))[0] == EXIT_USAGE


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"preset": "padovan", "primes": [2, 3], "max_index": 40}))
    code, out, _ = run(capsys, "sunit", "--config", str(cfg), "--primes", "2,3,5,7")
    assert code == EXIT_OK and out.splitlines()[0] == "0..18 20 25 36"


def test_sequence_file(capsys, tmp_path):
    seq = tmp_path / "fib.json"
    seq.write_text(json.dumps({"order": 2, "coefficients": [1, 1], "initial_terms": [0, 1]}))
    code, out, _ = run(capsys, "sunit", "--sequence", str(seq), "--primes", "2,3")
    assert code == EXIT_OK
    assert out.splitlines()[1] == "S-units:    1..4 6 12"


def test_solve_then_verify_small(capsys, tmp_path):
    out_path = tmp_path / "p2.json"
    code, out, _ = run(capsys, "solve", "--preset", "padovan", "--primes", "2", "--out", str(out_path))
    assert code == EXIT_OK and out_path.is_file()
    assert "power   3  10 14 15" in out and "power   7  13 18 20" in out
    doc = parse(out_path.read_text())
    scan = doc["scans"][-1]["bound"]
    want = sorted(map(sorted, classes_from_pairs(brute_force_oracle(PADOVAN, (2,), scan))))
    got = sorted(sorted(c["indices"]) for c in doc["classes"])
    assert got == want
    assert serialize(doc) == out_path.read_text()
    code, vout, _ = run(capsys, "verify", str(out_path))
    assert code == EXIT_OK and "verification passed" in vout


def test_verify_padovan_and_tampered(capsys, padovan_certificate, tmp_path):
    path, text = padovan_certificate
    code, out, _ = run(capsys, "verify", str(path))
    assert code == EXIT_OK
    doc = copy.deepcopy(parse(text))
    doc["scans"][1]["bound"] = 40
    bad = tmp_path / "tampered.json"
    bad.write_text(serialize(doc))
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == EXIT_VERIFY and "scan_completeness" in out


def test_solve_hypothesis_failure_writes_document(capsys, tmp_path):
    out_path = tmp_path / "fail.json"
    code, _, err = run(capsys, "solve", "--n1", "3", "--out", str(out_path))
    assert code == 3 and "hypothesis" in err
    doc = json.loads(out_path.read_text())
    assert doc["status"] == "failed" and doc["failure"]["error"] == "HypothesisViolation"


def test_solve_reports_genuine_relation(capsys, tmp_path):
    # for Fibonacci the leading coefficient is 1/sqrt(5), so H = 5 forms a dependent set of logarithms
    code, _, err = run(capsys, "solve", "--preset", "fibonacci", "--primes", "2,3", "--out", str(tmp_path / "f.json"))
    assert code == 3 and "integer relation" in err
