import json
import subprocess
import sys

import pytest

from pseudodet.circuits import CircuitBuilder, write_netlist
from pseudodet.cli import EXIT_ASSERT, EXIT_BUDGET, EXIT_USAGE, main, parse_range, run


@pytest.fixture
def and2(tmp_path):
    b = CircuitBuilder(2)
    path = tmp_path / "and2.net"
    write_netlist(path, b.build(b.and_(b.input(0), b.input(1))))
    return str(path)


def report(argv):
    text, _ = run(argv)
    return json.loads(text)


def stable(rep):
    return {k: v for k, v in rep.items() if k != "timing_s"}


def test_parse_range():
    assert parse_range("5") == ([5], False)
    assert parse_range("2:5") == ([2, 3, 4], True)
    assert parse_range("3:3") == ([], True)


def test_capp_exact_report(and2):
    rep = report(["capp", "exact", "--circuit", and2])
    assert (rep["result"]["mu_num"], rep["result"]["mu_logden"]) == (1, 2)
    assert rep["command"] == "capp exact"
    assert rep["manifest_version"] == "toy-machine-1"
    assert len(rep["config_hash"]) == 16


def test_reports_are_reproducible(and2):
    argv = ["--seed", "3", "capp", "sample", "--circuit", and2, "--samples", "2000"]
    assert stable(report(argv)) == stable(report(argv))
    other = report(["--seed", "4", *argv[2:]])
    assert other["config_hash"] != report(argv)["config_hash"]


def test_rkt_construct_end_to_end():
    res = report(["rkt", "construct", "--n", "16", "--d", "2"])["result"]
    assert (res["string"], res["oracle_rkt"], res["status"]) == ("00000000", 20, "OK")


def test_invalid_flag_leaves_no_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["--out", str(out), "capp", "exact", "--bogus"]) == EXIT_USAGE
    assert main(["--out", str(out), "nothing"]) == EXIT_USAGE
    assert not out.exists()


def test_output_file(tmp_path, and2):
    out = tmp_path / "r.json"
    assert main(["--out", str(out), "capp", "exact", "--circuit", and2]) == 0
    assert json.loads(out.read_text())["result"]["mu_num"] == 1


def test_budget_and_assertion_exit_codes(tmp_path):
    assert main(["kolmo", "census", "--m", "13"]) == EXIT_BUDGET
    assert main(["rkt", "fact51", "--n", "5", "--lang", "constant1", "--ell", "4"]) == EXIT_BUDGET
    assert main(["rkt", "fact51", "--n", "5", "--ell", "4"]) == EXIT_USAGE
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 0}))
    assert main(["--config", str(cfg), "rkt", "fact51", "--ell", "1"]) == 0


def test_failed_self_check_exit_code(monkeypatch):
    from pseudodet import rktconstruct

    def broken(*args, **kw):
        raise AssertionError("witness does not replay")

    monkeypatch.setattr(rktconstruct, "fact51_witness", broken)
    assert main(["rkt", "fact51", "--n", "2", "--ell", "2"]) == EXIT_ASSERT


def test_diag_n_sweep_rows():
    text, _ = run(["diag", "verify", "--n", "32:40", "--i", "0"])
    lines = text.splitlines()
    assert lines[0] == "i,n,verdict,capp_err" and len(lines) == 9
    assert [int(l.split(",")[1]) for l in lines[1:]] == list(range(32, 40))


def test_sweep_rejects_two_ranges():
    assert main(["diag", "sweep", "--n", "32:34", "--i", "0:2"]) == EXIT_USAGE


def test_empty_sweep_is_header_only():
    assert run(["diag", "sweep", "--n", "32:32"])[0] == "i,n,verdict,capp_err\n"


def test_sweep_identical_across_workers():
    a = run(["diag", "sweep", "--n", "32"])[0]
    b = run(["--workers", "4", "diag", "sweep", "--n", "32"])[0]
    assert a == b


def test_fact51_sweep_is_monotone():
    text, _ = run(["rkt", "fact51", "--n", "4", "--ell", "1:17"])
    rows = [list(map(int, l.split(","))) for l in text.splitlines()[1:]]
    assert len(rows) == 16
    costs = [r[1] for r in rows]
    assert costs == sorted(costs)
    assert all(c <= b for _, c, b in rows)


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"x": "0101", "measure": "kt"}))
    assert report(["--config", str(cfg), "kolmo", "measure"])["result"]["measure"] == "Kt"
    assert report(["--config", str(cfg), "kolmo", "measure", "--measure", "rkt"])["result"]["value"] == 23
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["--config", str(cfg), "kolmo", "measure", "--x", "1"]) == EXIT_USAGE


def test_primes_commands():
    assert report(["primes", "find", "--n", "16"])["result"]["prime"] == 2
    w = report(["primes", "witness", "--n", "16"])["result"]
    assert w["cost"] == 32 <= w["bound"]
    r = report(["primes", "rate", "--n", "8", "--trials", "20000"])["result"]
    assert r["status"] == "OK" and abs(r["z"]) <= 3


def test_prg_commands(tmp_path, and2):
    g = report(["prg", "gen", "--seed-bits", "0" * 16])["result"]
    assert len(g["output"]) == 8
    adv = report(["prg", "advantage", "--circuit", and2])["result"]
    assert adv["mode"] == "EXACT"


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "pseudodet.cli", "kolmo", "measure", "--x", "1", "--measure", "kt"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == 8
