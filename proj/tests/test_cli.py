import json
import os
import subprocess

import pytest

BIN = os.environ.get("QKDLAB_BIN", "build/tools/qkdlab")
HEADER = "protocol,scenario,D,p,Q,N,m,eps_bar,eps_PE,eps_EC,eps_PA,SXE,HXY,zeta,aep,pa_corr,rate,status"


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("QKDLAB_CONFIG", None)
    full_env.update(env or {})
    return subprocess.run([BIN, *args], capture_output=True, text=True, env=full_env, timeout=300)


def test_trivial_rate_is_one():
    r = run("rate", "--protocol", "bb84", "--mode", "asym", "--disturbance", "0", "--noise", "0")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["result"]["rate"] == 1.0
    assert doc["config"]["protocol"] == "bb84"
    assert doc["config"]["epsilon"] is not None


def test_domain_error_exit_1():
    r = run("rate", "--disturbance", "0.6")
    assert r.returncode == 1
    assert "disturbance" in r.stderr


def test_usage_error_exit_1():
    assert run("rate", "--bogus").returncode == 1
    assert run("rate", "--disturbance", "0.1", "--qber", "0.1").returncode == 1
    assert run().returncode == 1


def test_infeasible_exit_2():
    r = run("n0", "--protocol", "bb84", "--disturbance", "0.2")
    assert r.returncode == 2


def test_finite_rate_csv_row():
    r = run("rate", "--protocol", "six-state", "--mode", "finite", "--qber", "0.05", "--noise", "0.05",
            "--signals", "1e8", "--epsilon", "1e-9", "--optimize", "--format", "csv")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0] == HEADER
    fields = dict(zip(HEADER.split(","), lines[1].split(",")))
    assert fields["protocol"] == "six-state" and fields["status"] == "ok"
    assert 0.4 < float(fields["rate"]) < 0.6
    assert r.stderr.startswith("# config ")


def test_empty_sweep_is_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    r = run("sweep", "--kind", "n0-vs-d", "--d-range", "0.2:0.1:0.01", "--output", str(out))
    assert r.returncode == 0
    assert out.read_bytes() == (HEADER + "\n").encode()


def test_unwritable_exit_3():
    r = run("sweep", "--kind", "n0-vs-d", "--d-range", "0.05:0.05:0.01", "--output", "/nonexistent/dir/x.csv")
    assert r.returncode == 3


def test_sweep_is_byte_identical(tmp_path):
    args = ["sweep", "--kind", "r-vs-n", "--protocol", "both", "--disturbance", "0.05", "--n-range", "1e5:1e9:3"]
    a = run(*args, "--output", str(tmp_path / "a.csv"))
    b = run(*args, "--output", str(tmp_path / "b.csv"), "--threads", "1")
    assert a.returncode == b.returncode == 0
    data = (tmp_path / "a.csv").read_bytes()
    assert data == (tmp_path / "b.csv").read_bytes()
    assert len(data.decode().splitlines()) == 7


def test_config_file_merges_under_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("protocol = six-state\nnoise = 0.2\ndisturbance = 0.05\n")
    r = run("rate", "--noise", "0.1", env={"QKDLAB_CONFIG": str(cfg)})
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["result"]["protocol"] == "six-state"
    assert doc["result"]["p"] == 0.1
    assert doc["result"]["D"] == 0.05

    jcfg = tmp_path / "run.json"
    jcfg.write_text(json.dumps({"protocol": "bb84", "qber": 0.05, "mode": "finite", "optimize": True}))
    r = run("rate", "--config", str(jcfg), "--format", "csv")
    assert r.returncode == 0
    assert r.stdout.splitlines()[1].startswith("bb84,S1,0.05,0,0.05,100000000,")


def test_threshold_and_opt_noise():
    r = run("threshold", "--protocol", "bb84")
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["D"] == pytest.approx(0.110, abs=1e-3)
    r = run("opt-noise", "--protocol", "six-state", "--disturbance", "0.12")
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["p"] > 0.05


def test_n0_with_noise():
    r = run("n0", "--protocol", "six-state", "--disturbance", "0.12", "--optimize-noise")
    assert r.returncode == 0
    res = json.loads(r.stdout)["result"]
    assert res["p"] > 0 and res["N0"] < 2.9e6


def test_verify_and_self_test():
    r = run("verify")
    assert r.returncode == 0, r.stdout
    lines = r.stdout.splitlines()
    assert lines and all(line.startswith("PASS ") for line in lines)
    bad = run("verify", "--self-test")
    assert bad.returncode != 0
    assert any(line.startswith("FAIL ") for line in bad.stdout.splitlines())
