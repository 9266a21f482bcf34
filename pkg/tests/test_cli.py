import json
import subprocess
import sys

import pytest

from dssat import evaluate, parse_sdimacs, parse_skolem

TAUT = "p cnf 2 1\nr 0.5 1 0\nd 2 1 0\n1 -1 0\n"
LOW = "p cnf 2 2\nr 0.3 1 0\nd 2 1 0\n1 0\n2 0\n"
DQBF = "p cnf 3 2\na 1 0\na 2 0\nd 3 1 0\n-1 3 0\n1 -3 0\n"

MODEL = """\
agents: 1
states: s0 s1
actions: stay go
observations: low high
horizon: 2
start: 0.7 0.3
T: s0 stay s0 0.9
T: s0 stay s1 0.1
T: s0 go s0 0.5
T: s0 go s1 0.5
T: s1 stay s0 0.2
T: s1 stay s1 0.8
T: s1 go s0 0.5
T: s1 go s1 0.5
O: s0 stay low 0.8
O: s0 stay high 0.2
O: s0 go low 0.5
O: s0 go high 0.5
O: s1 stay low 0.3
O: s1 stay high 0.7
O: s1 go low 0.5
O: s1 go high 0.5
R: s0 stay 1.0
R: s0 go 3.0
R: s1 stay 2.0
R: s1 go 2.0
"""
POLICY = "0 :  : go\n0 : low : stay\n0 : high : go\n"

SPEC = "x1 input\nx2 input\ng and x1 x2\noutput g\n"
IMPL = "x1 input\nx2 input\nt bb x1\noutput t\n"


def run(*argv, env=None):
    return subprocess.run(
        [sys.executable, "-m", "dssat", *argv],
        capture_output=True, env=env)


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in [("taut.sdimacs", TAUT), ("low.sdimacs", LOW),
                       ("dqbf.sdimacs", DQBF), ("model.txt", MODEL),
                       ("policy.txt", POLICY), ("spec.ckt", SPEC),
                       ("impl.ckt", IMPL)]:
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def test_parse_echoes_canonical_form(files):
    r = run("parse", files["taut.sdimacs"])
    assert r.returncode == 0
    assert r.stdout.decode() == TAUT
    j = json.loads(run("parse", files["taut.sdimacs"], "--json").stdout)
    assert j["vars"] == 2 and j["clauses"] == 1 and not j["extended"]


def test_solve_reports_value_and_witness(files):
    r = run("solve", files["low.sdimacs"], "--json")
    assert r.returncode == 0
    j = json.loads(r.stdout)
    assert j["value"] == pytest.approx(0.3, abs=1e-12)
    f = parse_sdimacs(LOW)
    sk = parse_skolem(j["witness"], f)
    assert evaluate(f, sk) == pytest.approx(0.3, abs=1e-12)
    plain = run("solve", files["low.sdimacs"])
    assert plain.stdout.decode() == "value 0.3\n"


def test_decide_exit_codes(files):
    yes = run("decide", files["low.sdimacs"], "--theta", "0.2")
    assert yes.returncode == 0
    assert yes.stdout.decode().startswith("decision yes")
    no = run("decide", files["low.sdimacs"], "--theta", "0.9")
    assert no.returncode == 1
    assert no.stdout.decode().startswith("decision no")
    bad = run("decide", files["low.sdimacs"], "--theta", "1.5")
    assert bad.returncode == 2
    assert bad.stderr.decode().startswith("error:")


def test_eval_with_table_file(files, tmp_path):
    sk = tmp_path / "tables.skolem"
    sk.write_text("f 2 11\n")
    r = run("eval", files["low.sdimacs"], "--skolem", str(sk), "--json")
    assert r.returncode == 0
    assert json.loads(r.stdout)["value"] == pytest.approx(0.3)
    short = tmp_path / "short.skolem"
    short.write_text("f 2 1\n")
    assert run("eval", files["low.sdimacs"], "--skolem",
               str(short)).returncode == 2


def test_ssat_linear_prefix(files):
    j = json.loads(run("ssat", files["low.sdimacs"], "--json").stdout)
    assert j["value"] == pytest.approx(0.3, abs=1e-12)
    assert "f 2" in j["witness"]


def test_dqbf_embedding(files, tmp_path):
    r = run("dqbf2dssat", files["dqbf.sdimacs"])
    assert r.returncode == 0
    text = r.stdout.decode()
    assert "r 0.5 1 0" in text and "r 0.5 2 0" in text
    out = tmp_path / "emb.sdimacs"
    r2 = run("dqbf2dssat", files["dqbf.sdimacs"], "--out", str(out))
    assert r2.returncode == 0 and r2.stdout == b""
    assert out.read_text() == text
    # embedded value 1.0: the identity table satisfies the equivalence
    j = json.loads(run("solve", str(out), "--json").stdout)
    assert j["value"] == pytest.approx(1.0)


def test_encode_decpomdp_outputs(files, tmp_path):
    j = json.loads(run("encode-decpomdp", files["model.txt"], "--json").stdout)
    assert j["kappa"] == 16 and j["horizon"] == 2
    assert j["stage_vars"] == [13, 4] and j["stage_clauses"] == [23, 5]
    out = tmp_path / "enc.sdimacs"
    side = tmp_path / "enc.json"
    r = run("encode-decpomdp", files["model.txt"], "--out", str(out),
            "--dir", str(side))
    assert r.returncode == 0
    assert "kappa 16" in r.stdout.decode()
    parse_sdimacs(out.read_text())  # formula must round-trip
    sidecar = json.loads(side.read_text())
    assert sidecar["kappa"] == 16
    assert sidecar["scale"] == 4.0 and sidecar["offset"] == 1.0
    assert "act[0][0]" in sidecar["variables"]


def test_certify_policy(files):
    r = run("certify-policy", files["model.txt"], "--policy",
            files["policy.txt"])
    assert r.returncode == 0
    assert "certified yes" in r.stdout.decode()
    j = json.loads(run("certify-policy", files["model.txt"], "--policy",
                       files["policy.txt"], "--json").stdout)
    assert j["certified"] is True
    assert j["descaled"] == pytest.approx(j["reference"], abs=1e-9)


def test_encode_circuit(files):
    j = json.loads(run("encode-circuit", "--spec", files["spec.ckt"],
                       "--impl", files["impl.ckt"], "--approx",
                       "--json").stdout)
    assert j["kind"] == "approx"
    assert j["inputs"] == ["x1", "x2"] and j["noise"] == []
    assert set(j["black_boxes"]) == {"t"}
    parse_sdimacs(j["text"])
    plain = run("encode-circuit", "--spec", files["spec.ckt"],
                "--impl", files["impl.ckt"])
    assert plain.returncode == 0 and plain.stdout.decode() == \
        json.loads(run("encode-circuit", "--spec", files["spec.ckt"],
                       "--impl", files["impl.ckt"], "--json").stdout)["text"]


def test_error_exit_codes(files, tmp_path):
    garbage = tmp_path / "garbage.sdimacs"
    garbage.write_text("not a header\n")
    r = run("solve", str(garbage))
    assert r.returncode == 2 and r.stdout == b""
    assert r.stderr.decode().startswith("error:")
    assert run("solve", str(tmp_path / "missing.sdimacs")).returncode == 2
    big = tmp_path / "big.sdimacs"
    lines = ["p cnf 12 1"] + [f"r 0.5 {v} 0" for v in range(1, 12)] \
        + ["d 12 " + " ".join(map(str, range(1, 12))) + " 0", "12 0"]
    big.write_text("\n".join(lines) + "\n")
    r = run("solve", str(big), "--max-skolem-space", "64")
    assert r.returncode == 3
    assert r.stderr.decode().startswith("error:")
    assert run("solve", files["low.sdimacs"], "--threads", "0").returncode == 2


def test_outputs_do_not_depend_on_thread_count(files):
    base = run("solve", files["low.sdimacs"], "--json").stdout
    for n in ("1", "2", "8"):
        assert run("solve", files["low.sdimacs"], "--json",
                   "--threads", n).stdout == base
    import os
    env = dict(os.environ, DSSAT_THREADS="3")
    assert run("solve", files["low.sdimacs"], "--json", env=env).stdout == base


def test_repeated_runs_are_byte_identical(files):
    for argv in (
        ("solve", files["taut.sdimacs"], "--json"),
        ("encode-decpomdp", files["model.txt"], "--json"),
        ("certify-policy", files["model.txt"], "--policy",
         files["policy.txt"], "--json"),
        ("encode-circuit", "--spec", files["spec.ckt"], "--impl",
         files["impl.ckt"], "--json"),
    ):
        assert run(*argv).stdout == run(*argv).stdout
