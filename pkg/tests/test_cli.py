import json
import subprocess
import sys

import pytest

from spherecut.cli import main


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def g22(tmp_path):
    p = tmp_path / "g.json"
    assert run("gen", "grid", 2, 2, "-o", p) == 0
    return p


SPEC = ["--k", "2", "--min-weight", "2", "--max-weight", "3"]


def test_optimize_writes_plan(g22, tmp_path, capsys):
    out = tmp_path / "plan.json"
    assert run("optimize", g22, *SPEC, "-o", out) == 0
    plan = json.loads(out.read_text())
    assert plan["cost"] == 2 and sorted(plan["weights"]) == [2, 2]
    assert run("validate", g22, *SPEC, "--plan", out) == 0


def test_count(g22, capsys):
    assert run("count", g22, *SPEC, "--cost", 2) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert run("count", g22, *SPEC, "--cost-range", 0, 1) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert run("count", g22, *SPEC, "--histogram") == 0
    assert json.loads(capsys.readouterr().out)["histogram"] == [{"weights": [2, 2], "cost": 2, "count": 2}]


def test_sample_deterministic(g22, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("sample", g22, *SPEC, "--seed", 7, "-o", a) == 0
    assert run("sample", g22, *SPEC, "--seed", 7, "-o", b, "--threads", 4) == 0
    assert a.read_text() == b.read_text()
    assert json.loads(a.read_text())["seed"] == 7


def test_sample_rank(g22, capsys):
    assert run("sample", g22, *SPEC, "--rank", 2) == 0
    assert json.loads(capsys.readouterr().out)["rank_p"] == 2


def test_exit_codes(g22, tmp_path):
    assert run("optimize", g22, "--k", 2, "--min-weight", 3, "--max-weight", 4) == 2
    assert run("sample", g22, *SPEC, "--cost", 3) == 2
    assert run("optimize", g22, "--k", 2) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run("count", bad, *SPEC) == 1
    assert run("count", tmp_path / "missing.json", *SPEC) == 1


def test_decompose_and_import(g22, tmp_path, capsys):
    d = tmp_path / "d.json"
    assert run("decompose", g22, "-o", d) == 0
    assert "width 2" in capsys.readouterr().err
    assert run("optimize", g22, *SPEC, "--builder", "import", "--decomposition", d) == 0
    assert run("decompose", g22, "--builder", "radial") == 0
    data = json.loads(d.read_text())
    leaf = next(n for n in data["nodes"] if n["children"] is None)
    leaf["edges"] = []
    d.write_text(json.dumps(data))
    assert run("validate", g22, "--decomposition", d) == 1
    assert "violation" in capsys.readouterr().out
    assert run("decompose", g22, "--builder", "import", "--decomposition", d) == 1


def test_oracle_command(tmp_path, capsys):
    g = tmp_path / "g3.json"
    run("gen", "grid", 3, 3, "-o", g)
    assert run("oracle", g, "--k", 3, "--min-weight", 3, "--max-weight", 4) == 0
    assert json.loads(capsys.readouterr().out)["total"] == 10
    big = tmp_path / "g4.json"
    run("gen", "grid", 4, 4, "-o", big)
    assert run("oracle", big, "--k", 2, "--min-weight", 8, "--max-weight", 9) == 1


def test_gadget_command(tmp_path):
    out = tmp_path / "gad.json"
    assert run("gadget", "binpacking", "--values", 1, 1, "--k", 2, "--B", 1, "-o", out) == 0
    labels = json.loads((tmp_path / "gad.labels.json").read_text())
    assert len(labels["labels"]) == 12
    L, U = labels["L"], labels["U"]
    assert run("optimize", out, "--k", 2, "--min-weight", L, "--max-weight", U) == 0


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "spherecut", "gen", "grid", "2", "3"], capture_output=True, text=True
    )
    assert r.returncode == 0
    assert len(json.loads(r.stdout)["edges"]) == 7
