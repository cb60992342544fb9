import csv
import json
import subprocess
import sys

import pytest

from gdft.cli import parse_eps_list, run


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


QUBIT = {"theory": {"kind": "qubit", "lambda": 1.0}, "params": {"steps": 4}}


def test_domain_bosonic(tmp_path):
    cfg = _write(tmp_path, "c.json", {"kind": "bosonic", "d": 2, "N": 4, "P": 1})
    out = tmp_path / "d.json"
    assert run(["domain", "--config", cfg, "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["dim"] == 1
    assert sorted(map(tuple, d["vertices"])) == [(1.0, 3.0), (3.0, 1.0)]
    assert d["permanents"]


def test_functional_grid_qubit_matches_closed_form(tmp_path):
    cfg = _write(tmp_path, "q.json", QUBIT)
    out = tmp_path / "g.csv"
    assert run(["functional-grid", "--config", cfg, "--out", str(out), "--multistarts", "4"]) == 0
    rows = _rows(out)
    assert rows[0] == ["rho0", "value", "residual", "starts_converged"]
    assert len(rows) == 6
    for r in rows[1:]:
        rho, val = float(r[0]), float(r[1])
        assert val == pytest.approx(-(1 - rho * rho) ** 0.5, abs=1e-8)


def test_outputs_are_byte_identical_across_runs(tmp_path):
    cfg = _write(tmp_path, "q.json", QUBIT)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["functional-grid", "--config", cfg, "--out", str(a), "--multistarts", "4"])
    run(["functional-grid", "--config", cfg, "--out", str(b), "--multistarts", "4"])
    assert a.read_bytes() == b.read_bytes()


def test_gradfield_qubit(tmp_path):
    cfg = _write(tmp_path, "q.json", QUBIT)
    out = tmp_path / "g.csv"
    assert run(["gradfield", "--config", cfg, "--out", str(out), "--multistarts", "4"]) == 0
    rows = _rows(out)
    assert rows[0] == ["rho0", "F", "dF_abs"]
    for r in rows[1:]:
        rho, grad = float(r[0]), float(r[2])
        assert grad == pytest.approx(abs(rho) / (1 - rho * rho) ** 0.5, abs=1e-4)


def test_boundary_force_qubit(tmp_path):
    cfg = _write(tmp_path, "b.json", {"theory": {"kind": "qubit"}, "params": {"rho_star": [1.0]}})
    out = tmp_path / "f.json"
    assert run(["boundary-force", "--config", cfg, "--out", str(out), "--eps-list", "1e-4,1e-3,1e-2"]) == 0
    d = json.loads(out.read_text())
    assert d["G_formula"] == pytest.approx(2**0.5, abs=1e-12)
    assert d["G_fit"] == pytest.approx(2**0.5, rel=0.02)
    assert [p["eps"] for p in d["eps_points"]] == [1e-4, 1e-3, 1e-2]


def test_boundary_force_dimer_defaults(tmp_path):
    cfg = _write(tmp_path, "b.json", {"kind": "dimer", "N": 3, "theta": 1.5707963267948966})
    out = tmp_path / "f.json"
    assert run(["boundary-force", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["G_formula"] == pytest.approx(3**0.5, abs=1e-9)


def test_kirwan_two_three(tmp_path):
    cfg = _write(tmp_path, "k.json", {"kind": "lie", "algebra": {"su2_product": 2, "irreps": [2, 3]}})
    out = tmp_path / "k.json.out"
    assert run(["kirwan", "--config", cfg, "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    got = sorted((tuple(i["sigma"]), i["c"]) for i in d["inequalities"])
    assert got == sorted([((-1.0, 0.0), -1.0), ((0.0, -1.0), -2.0), ((1.0, -1.0), -1.0)])
    assert {f["class"] for f in d["facets"]} >= {"nice", "trivial"}


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert run(["verify", "--criteria", "2,3", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["passed"] == d["total"] == 2
    assert "2/2 criteria passed" in capsys.readouterr().out


@pytest.mark.parametrize("argv,code", [
    (["nonsense"], 1),
    (["domain"], 1),
    (["verify", "--criteria", "42"], 1),
    (["verify", "--criteria", "x"], 1),
])
def test_usage_errors_exit_one(argv, code, capsys):
    try:
        got = run(argv)
    except SystemExit as exc:
        got = exc.code
    assert got == code


def test_config_errors_exit_one(tmp_path):
    bad = _write(tmp_path, "bad.json", {"kind": "nope"})
    assert run(["domain", "--config", bad, "--out", str(tmp_path / "x.json")]) == 1
    assert run(["domain", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x.json")]) == 1
    (tmp_path / "broken.json").write_text("{not json")
    assert run(["domain", "--config", str(tmp_path / "broken.json"), "--out", str(tmp_path / "x.json")]) == 1
    assert not (tmp_path / "x.json").exists()


def test_infeasible_point_exits_three(tmp_path):
    cfg = _write(tmp_path, "f.json", {"theory": {"kind": "qubit"}, "params": {"points": [[3.0]]}})
    out = tmp_path / "g.csv"
    assert run(["functional-grid", "--config", cfg, "--out", str(out)]) == 3
    assert _rows(out)[1][1] == "nan"


def test_eps_list_parsing():
    assert parse_eps_list("1e-3, 1e-2") == [1e-3, 1e-2]
    with pytest.raises(Exception):
        parse_eps_list("1e-2,abc")


def test_figures(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = _write(tmp_path, "c.json", {"kind": "bosonic", "d": 3, "N": 3, "P": 0})
    out = tmp_path / "d.json"
    assert run(["domain", "--config", cfg, "--out", str(out), "--figures"]) == 0
    assert (tmp_path / "d.png").stat().st_size > 0


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "c.json", {"kind": "qubit"})
    proc = subprocess.run([sys.executable, "-m", "gdft", "domain", "--config", cfg, "--out", str(tmp_path / "d.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
