import csv
import io
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("MAGSPEC_CLI", "magspec")
CONFIGS = Path(os.environ.get("MAGSPEC_CONFIGS", Path(__file__).resolve().parents[2] / "configs"))


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_eigs_landau_lowest_level(tmp_path):
    out = tmp_path / "e.json"
    p = run("eigs", "--field", CONFIGS / "landau.json", "--ball", "0,0:8", "--bc", "dirichlet", "-k", 3, "--json", out)
    assert p.returncode == 0, p.stderr
    doc = read_json(out)
    ev = doc["eigenvalues"]
    assert len(ev) == 3
    # the lowest Landau level is highly degenerate on a radius-8 disk
    for v in ev:
        assert abs(v - 1.0) < 0.01
    assert doc["meta"]["seed"] == 20240601
    assert len(doc["meta"]["config_hash"]) == 16
    assert doc["meta"]["version"]


def test_eigs_landau_next_level_on_small_disk(tmp_path):
    out = tmp_path / "e.csv"
    p = run("eigs", "--field", CONFIGS / "landau.json", "--ball", "0,0:1.5", "-k", 6, "--csv", out)
    assert p.returncode == 0, p.stderr
    rows = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"), newline="")))
    ev = [float(r["eigenvalue"]) for r in rows]
    assert ev == sorted(ev)
    assert ev[0] > 1.0
    assert rows[0]["seed"] == "20240601"


def test_eigs_free_neumann_is_zero():
    p = run("eigs", "--field", CONFIGS / "free.json", "--ball", "0,0:1", "--bc", "neumann", "-k", 1)
    assert p.returncode == 0, p.stderr
    value = float(p.stdout.split("lambda[0] =")[1].split()[0])
    assert abs(value) < 1e-9


def test_invalid_json_exits_1_without_outputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    p = run("eigs", "--field", bad, "--ball", "0,0:1", "--json", tmp_path / "o.json", "--csv", tmp_path / "o.csv")
    assert p.returncode == 1
    assert "invalid JSON" in p.stderr
    assert sorted(x.name for x in tmp_path.iterdir()) == ["bad.json"]


def test_unknown_key_and_bad_flags_exit_1(tmp_path):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"dim": 2, "V": "0", "a": ["0", "0"], "potential": 1}), encoding="utf-8")
    assert run("eigs", "--field", f, "--ball", "0,0:1").returncode == 1
    assert run("eigs", "--field", CONFIGS / "free.json", "--ball", "0,0").returncode == 1
    assert run("eigs", "--frobnicate").returncode == 1
    assert run("sweep", "--field", CONFIGS / "free.json", "--quantity", "veff:twod:delta=3").returncode == 1


def test_solver_failure_exits_2(tmp_path):
    out = tmp_path / "o.json"
    p = run("eigs", "--field", CONFIGS / "landau.json", "--ball", "0,0:3", "--max-iter", 2, "--json", out)
    assert p.returncode == 2
    assert not out.exists()


def test_missing_output_directory_exits_1(tmp_path):
    p = run("eigs", "--field", CONFIGS / "free.json", "--ball", "0,0:1", "--json", tmp_path / "nope" / "o.json")
    assert p.returncode == 1


def sweep(tmp_path, name, *extra):
    out = tmp_path / f"{name}.json"
    p = run("sweep", "--field", CONFIGS / f"{name}.json", "--json", out, *extra)
    assert p.returncode == 0, p.stderr
    return read_json(out)


def test_sweep_harmonic_suggests_discrete(tmp_path):
    doc = sweep(tmp_path, "harmonic", "--step", 1, "--quantity", "lambda")
    assert doc["verdict"]["conclusion"] == "suggests-discrete"
    assert "finite-domain" in doc["caveat"]


def test_sweep_free_suggests_non_discrete(tmp_path):
    doc = sweep(tmp_path, "free", "--step", 1, "--quantity", "lambda")
    assert doc["verdict"]["conclusion"] == "suggests-non-discrete"


def test_sweep_ivrii_flags_conflict(tmp_path):
    svg = tmp_path / "ivrii.svg"
    doc = sweep(tmp_path, "ivrii", "--svg", svg)
    assert doc["verdict"]["conflict"] is True
    grows = {e["quantity"]: e["grows"] for e in doc["verdict"]["evidence"]}
    assert grows == {"lambda": False, "veff:twod:delta=1.5:probe": True}
    text = svg.read_text(encoding="utf-8")
    assert text.startswith("<?xml") and "<polyline" in text and "finite-domain" in text


def test_sweep_is_byte_identical_across_runs_and_jobs(tmp_path):
    outs = []
    for i, jobs in enumerate([1, 1, 3]):
        j, c = tmp_path / f"s{i}.json", tmp_path / f"s{i}.csv"
        p = run("sweep", "--field", CONFIGS / "harmonic.json", "--step", 2, "--quantity", "lambda",
                "--quantity", "mu", "--jobs", jobs, "--json", j, "--csv", c)
        assert p.returncode == 0, p.stderr
        outs.append((j.read_bytes(), c.read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    assert b"\r\n" in outs[0][1]


def test_run_config_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"r": 1.0, "step": 2.0, "quantities": ["lambda"], "seed": 5}), encoding="utf-8")
    out = tmp_path / "o.json"
    p = run("sweep", "--field", CONFIGS / "free.json", "--config", cfg, "--seed", 9, "--json", out)
    assert p.returncode == 0, p.stderr
    doc = read_json(out)
    assert doc["meta"]["seed"] == 9
    assert doc["r"] == 1.0
    assert doc["quantities"] == ["lambda"]


def test_effpot_twod_delta_one_on_ivrii_is_zero():
    p = run("effpot", "--field", CONFIGS / "ivrii.json", "--variant", "twod", "--delta", 1,
            "--point", "4,0", "--point", "7,0.5", "--point", "15,0")
    assert p.returncode == 0, p.stderr
    rows = list(csv.DictReader(io.StringIO(p.stdout, newline="")))
    assert len(rows) == 3
    assert all(float(r["value"]) == 0.0 for r in rows)


def test_capacity_positive_and_linear_in_3d(tmp_path):
    p = run("capacity", "--ball", "0,0,0:1", "--outer", "0,0,0:4", "--set", "ball:0,0,0:0.5", "--spacing", 0.125,
            "--json", tmp_path / "a.json")
    assert p.returncode == 0, p.stderr
    assert read_json(tmp_path / "a.json")["value"] > 0
    vals = []
    for r in (0.5, 1.0):
        out = tmp_path / f"c{r}.json"
        p = run("capacity", "--ball", f"0,0,0:{r}", "--spacing", r / 8, "--json", out)
        assert p.returncode == 0, p.stderr
        vals.append(read_json(out)["value"])
    assert abs(vals[0] / vals[1] - 0.5) < 0.05


def test_molchanov_reports_a_c_grid(tmp_path):
    out = tmp_path / "m.json"
    p = run("molchanov", "--field", CONFIGS / "harmonic.json", "--ball", "3,0:1", "--c", "0.001,0.01,0.1",
            "--json", out)
    assert p.returncode == 0, p.stderr
    doc = read_json(out)
    text = json.dumps(doc)
    assert "0.001" in text and "0.1" in text


def test_counterexample_output_is_a_usable_field(tmp_path):
    out = tmp_path / "cx.json"
    p = run("counterexample", "--kind", "ivrii", "--patches", "1,4,9", "--out", out)
    assert p.returncode == 0, p.stderr
    doc = read_json(out)
    assert doc["kind"] == "ivrii"
    assert doc["B_values"] == [1.0, 4.0, 9.0]
    assert len(doc["radii"]) == 3 and all(r > 0 for r in doc["radii"])
    c = doc["centers"][1]
    p = run("eigs", "--field", out, "--ball", f"{c[0]},{c[1]}:{doc['radii'][1]}", "-k", 1)
    assert p.returncode == 0, p.stderr
    assert float(p.stdout.split("lambda[0] =")[1].split()[0]) < 1.0


def test_version_flag():
    p = run("--version")
    assert p.returncode == 0
    assert p.stdout.strip()
