import json
import subprocess
import sys

import numpy as np
import pytest

from hslice import cli, io as hio, stats


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def levels3(tmp_path, capsys):
    path = tmp_path / "levels3.json"
    assert run(capsys, "gen", "--kind", "levels", "--n", "3", "-o", str(path))[0] == 0
    return path


def test_gen_levels(levels3):
    n, hs = hio.load_collection(levels3)
    assert n == 3 and [h.b for h in hs] == [-2, 0, 2]
    assert all(list(h.a) == [1, 1, 1] for h in hs)


def test_gen_levels_two(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "levels", "--n", "2")
    n, hs = hio.collection_from_dict(json.loads(out))
    assert code == 0 and [h.b for h in hs] == [-1, 1]


def test_gen_random_unit_norms(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "random-unit", "--n", "16", "--k", "5", "--seed", "3")
    d = json.loads(out)
    n, hs = hio.collection_from_dict(d)
    assert len(hs) == 5 and d["generator"]["seed"] == 3
    for h in hs:
        assert abs(np.linalg.norm(np.array(h.a, dtype=float)) - 1) <= 1e-12
        assert -1 <= h.b <= 1


def test_verify(levels3, capsys):
    code, out, _ = run(capsys, "verify", "--input", str(levels3))
    assert code == 0 and out.strip() == "12/12 sliced"


def test_verify_unsliced_csv(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"n": 2, "hyperplanes": [{"a": [1, 0], "b": 0}]}))
    csv_path = tmp_path / "u.csv"
    code, out, _ = run(capsys, "verify", "-i", str(tmp_path / "c.json"), "--unsliced", str(csv_path))
    assert code == 0 and out.strip() == "2/4 sliced"
    edges = hio.edges_from_csv(csv_path.read_text())
    assert sorted(e.flip for e in edges) == [1, 1]


def test_witness_found(tmp_path, capsys):
    path = tmp_path / "u.json"
    run(capsys, "gen", "--kind", "random-unit", "--n", "16", "--k", "1", "-o", str(path))
    code, out, _ = run(capsys, "witness", "-i", str(path), "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["result"]["status"] == "Found" and d["seed"] == 7


def test_witness_breakdown_csv(tmp_path, capsys):
    path = tmp_path / "u.json"
    run(capsys, "gen", "--kind", "random-unit", "--n", "16", "--k", "2", "-o", str(path))
    csv_path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "witness", "-i", str(path), "--trials", "200",
                       "--params", "rho0=1,bad_threshold=1/2", "--breakdown", str(csv_path))
    assert code == 0
    assert csv_path.read_text().splitlines()[0] == "quantity,estimate,ci_lo,ci_hi,paper_bound,vacuous_flag"


def test_decompose_cli(tmp_path, capsys):
    path = tmp_path / "u.json"
    run(capsys, "gen", "--kind", "random-gaussian", "--n", "64", "--k", "4", "-o", str(path))
    code, out, _ = run(capsys, "decompose", "-i", str(path))
    assert code == 0 and json.loads(out)["verification"]["ok"]


def test_scales_cli(tmp_path, capsys):
    path = tmp_path / "v.json"
    path.write_text(json.dumps([10000, 100, 1]))
    code, out, _ = run(capsys, "scales", "-i", str(path), "--delta", "1", "--brute")
    d = json.loads(out)
    assert code == 0 and d["greedy_scales"] == 3 and d["max_scales"] == 3 and d["verified"]


def test_lab_bundled(capsys):
    code, out, err = run(capsys, "lab")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) - 1 >= 10
    assert not any(line.endswith(",Fail") for line in lines)
    assert json.loads(err)["seed"] == 0


def test_lab_unknown_check(tmp_path, capsys):
    path = tmp_path / "cases.json"
    path.write_text(json.dumps({"checks": [{"kind": "nope"}]}))
    assert run(capsys, "lab", "-i", str(path))[0] == 2


def test_lab_fail_verdict_exit(tmp_path, capsys, monkeypatch):
    failing = stats.binomial_report("forced", 90, 100, 0.1)
    monkeypatch.setattr(cli.lab, "check_chernoff", lambda *a, **k: [failing])
    path = tmp_path / "cases.json"
    path.write_text(json.dumps({"checks": [{"kind": "chernoff", "intervals": [[0, 1]], "ts": [1]}]}))
    code, out, _ = run(capsys, "lab", "-i", str(path))
    assert code == 1 and out.strip().endswith(",Fail")


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "verify", "-i", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "gen", "--kind", "levels", "--n", "1")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", "-i", str(bad))[0] == 2
    assert run(capsys, "verify", "-i", str(bad), "--seed", "-1")[0] == 2


def test_cap_exit(tmp_path, capsys):
    path = tmp_path / "big.json"
    run(capsys, "gen", "--kind", "levels", "--n", "30", "-o", str(path))
    assert run(capsys, "verify", "-i", str(path))[0] == 3
    assert run(capsys, "witness", "-i", str(path))[0] == 3


def test_env_overrides(monkeypatch, capsys):
    monkeypatch.setenv("HSLICE_SEED", "11")
    code, out, _ = run(capsys, "gen", "--kind", "random-unit", "--n", "4", "--k", "1")
    assert json.loads(out)["generator"]["seed"] == 11
    monkeypatch.setenv("HSLICE_WORKERS", "zero")
    assert run(capsys, "gen", "--kind", "levels", "--n", "3")[0] == 2


def test_outputs_byte_identical(tmp_path, capsys):
    path = tmp_path / "u.json"
    run(capsys, "gen", "--kind", "random-unit", "--n", "12", "--k", "3", "-o", str(path))
    for argv in (["witness", "-i", str(path), "--trials", "100"], ["lab", "--trials", "2000"],
                 ["decompose", "-i", str(path)], ["verify", "-i", str(path)]):
        first = run(capsys, *argv, "--seed", "5")[1:]
        second = run(capsys, *argv, "--seed", "5")[1:]
        assert first == second


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "hslice", "gen", "--kind", "levels", "--n", "3"],
                         capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["n"] == 3
