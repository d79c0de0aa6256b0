import csv
import json
import math
import subprocess
import sys

import pytest

from covertkey.channel import example_fig2
from covertkey.cli import main

TOY = {"n": 4, "g": 1, "alpha": 0.3, "kappa": 0.1, "code_count": 2, "m_override": [2, 2, 1],
       "states": {"kind": "constant-weight", "beta": 0.5}, "trials": 300}


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- usage and parsing ---------------------------------------------------------------


def test_usage_errors(tmp_path):
    assert main(["rates"]) == 2
    assert main(["rates", "--seed", "-1"]) == 2
    assert main(["rates", "--seed", str(1 << 64)]) == 2
    assert main(["nonsense", "--seed", "1"]) == 2


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["rates", "--seed", "1", "--config", str(bad)]) == 3
    assert main(["rates", "--seed", "1", "--channel", str(tmp_path / "missing.json")]) == 3
    d = example_fig2().to_dict()
    d["slices"]["x0_s0"] = [0.5, 0.5, 0.5, 0.5]
    assert main(["rates", "--seed", "1", "--channel", write_json(tmp_path / "ch.json", d)]) == 3
    cfg = dict(TOY)
    del cfg["alpha"]
    out = str(tmp_path / "o.jsonl")
    assert main(["simulate", "--seed", "1", "--config", write_json(tmp_path / "c.json", cfg), "--out", out]) == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "covertkey", "rates", "--seed", "0", "--grid", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("beta,achievable,converse,pairing")


# -- rates ------------------------------------------------------------------------


def test_rates_endpoints(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["rates", "--seed", "0", "--grid", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [float(r["beta"]) for r in rows] == [0.0, 1.0]
    assert float(rows[0]["achievable"]) == pytest.approx(8.784753853889, abs=1e-9)
    assert float(rows[1]["achievable"]) == pytest.approx(3.18530835558, abs=1e-9)
    for r in rows:
        assert float(r["achievable"]) == pytest.approx(float(r["converse"]), abs=1e-9)


def test_rates_both_pairings_and_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["rates", "--seed", "3", "--grid", "3", "--pairing", "both"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    assert len(rows) == 6
    mid = {r["pairing"]: float(r["converse"]) for r in rows if float(r["beta"]) == 0.5}
    assert mid["derived"] == pytest.approx(6.607499133, abs=1e-8)
    assert mid["as-stated"] == pytest.approx(5.624230300, abs=1e-8)


def test_rates_rejects_degenerate_channel(tmp_path):
    d = example_fig2().to_dict()
    # make Willie's input-1 law equal his innocent law in both states
    d["slices"]["x1_s0"] = d["slices"]["x0_s0"]
    d["slices"]["x1_s1"] = d["slices"]["x0_s1"]
    assert main(["rates", "--seed", "0", "--channel", write_json(tmp_path / "ch.json", d)]) == 4


# -- simulate -----------------------------------------------------------------------


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = write_json(tmp_path / "c.json", TOY)
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["simulate", "--seed", "7", "--config", cfg, "--out", str(a)]) == 0
    assert main(["simulate", "--seed", "7", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    sa = tmp_path / "a.jsonl.summary.csv"
    assert sa.read_bytes() == (tmp_path / "b.jsonl.summary.csv").read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 300
    assert [json.loads(line)["index"] for line in lines] == list(range(300))
    row = read_csv(sa)[0]
    assert int(row["state_weight"]) == math.floor(5 / 2)
    assert int(row["halted"]) + int(row["completed"]) == 300


def test_simulate_needs_out(tmp_path):
    assert main(["simulate", "--seed", "1", "--config", write_json(tmp_path / "c.json", TOY)]) == 4


def test_simulate_guard(tmp_path):
    cfg = dict(TOY, n=64, g=2, kappa=0.01, m_override=[1 << 12, 1 << 8, 1 << 2])
    out = str(tmp_path / "o.jsonl")
    assert main(["simulate", "--seed", "1", "--config", write_json(tmp_path / "c.json", cfg), "--out", out]) == 5


# -- verification commands ----------------------------------------------------------


def test_verify_lemma1(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"grid": [[1000, 0.1, 0.3]], "trials": 5000})
    out = tmp_path / "l.csv"
    assert main(["verify-lemma1", "--seed", "2", "--config", cfg, "--out", str(out)]) == 0
    assert all(r["verdict"] == "pass" for r in read_csv(out))
    assert main(["verify-lemma1", "--seed", "2", "--config", cfg, "--bound-scale", "1e-9"]) == 6


def test_verify_oneshot(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"m1": [2], "m2": [4], "codebooks": 40})
    out = tmp_path / "o.csv"
    assert main(["verify-oneshot", "--seed", "2", "--config", cfg, "--out", str(out)]) == 0
    assert [r["name"] for r in read_csv(out)] == ["reliability", "secrecy"]


def test_estimate_beta(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"trials": 500})
    out = tmp_path / "e.csv"
    assert main(["estimate-beta", "--seed", "4", "--config", cfg, "--out", str(out)]) == 0
    assert len(read_csv(out)) == 7
    assert main(["estimate-beta", "--seed", "4", "--config", cfg, "--bound-scale", "0.001"]) == 6


def derand_config(eps_prime):
    states = ["111000", "110100", "110010", "110001"]
    return {"n": 5, "g": 1, "alpha": 0.3, "kappa": 0.1, "code_count": 32, "m_override": [1, 4, 2],
            "eps_prime": eps_prime, "state_set": [[int(c) for c in s] for s in states]}


def test_derandomize(tmp_path):
    out = tmp_path / "d.csv"
    cfg = write_json(tmp_path / "c.json", derand_config(0.08))
    assert main(["derandomize", "--seed", "11", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["state"] for r in rows] == ["111000", "110100", "110010", "110001"]
    assert all(r["verdict"] == "pass" and r["L"] == "151" for r in rows)
    tight = write_json(tmp_path / "t.json", derand_config(0.01))
    assert main(["derandomize", "--seed", "11", "--config", tight]) == 4
    empty = write_json(tmp_path / "e.json", dict(derand_config(0.08), state_set=[]))
    assert main(["derandomize", "--seed", "11", "--config", empty]) == 3
