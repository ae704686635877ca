import json
import os
import subprocess
import sys

import numpy as np
import pytest

from billiardlab.cli import main, read_csv, run_examples, write_csv


def _spec(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def shapes(tmp_path):
    return {
        "ellipse": _spec(tmp_path, "ellipse.json", {"type": "ellipse", "a": 2, "b": 1}),
        "disc": _spec(tmp_path, "disc.json", {"type": "support_fourier", "mean": 1.0}),
        "quartic": _spec(tmp_path, "quartic.json",
                         {"type": "support_fourier", "cos": [0, 0, 0, 0.05]}),
        "eight": _spec(tmp_path, "eight.json",
                       {"type": "support_fourier", "cos": [0] * 7 + [0.01]}),
        "bad8": _spec(tmp_path, "bad8.json", {"type": "support_fourier", "cos": [0] * 7 + [0.05]}),
        "hexagon": _spec(tmp_path, "hex.json", {"type": "polygon",
                                                "vertices": [[np.cos(a), np.sin(a)] for a in
                                                             np.arange(6) * np.pi / 3]}),
        "lp": _spec(tmp_path, "lp.json", {"type": "lp_ball", "p": 4}),
    }


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_curve_report(shapes, capsys):
    assert main(["curve", shapes["ellipse"], "--kmax", "6"]) == 0
    rep = _json_out(capsys)
    assert rep["rotation_orders"] == [2]
    assert rep["linear_orders"] == [2, 3, 4, 5, 6]
    assert rep["width_min"] == pytest.approx(2.0, abs=1e-9)
    assert rep["width_max"] == pytest.approx(4.0, abs=1e-9)
    assert rep["area"] == pytest.approx(2 * np.pi, abs=1e-12)


def test_orbit_json_and_csv(shapes, tmp_path, capsys):
    assert main(["orbit", "--system", "birkhoff", "--curve", shapes["disc"], "--k", "3"]) == 0
    rec = _json_out(capsys)
    assert rec["action"] == pytest.approx(3 * np.sqrt(3), abs=1e-9)
    out = str(tmp_path / "orbit.csv")
    assert main(["orbit", "--system", "outer", "--curve", shapes["quartic"], "--k", "4",
                 "--out", out]) == 0
    capsys.readouterr()
    cols, data = read_csv(out)
    assert cols == ["index", "param", "x", "y", "chord_value"]
    assert data.shape == (4, 5)


@pytest.mark.parametrize("system", ["birkhoff", "outer", "symplectic", "minkowski"])
def test_orbit_all_systems(shapes, system, capsys):
    assert main(["orbit", "--system", system, "--curve", shapes["eight"], "--k", "5",
                 "--r", "2"]) == 0
    assert _json_out(capsys)["residual"] < 1e-10


def test_criteria_commands(shapes, capsys):
    assert main(["criteria", "gutkin", "--curve", shapes["disc"], "--k", "5", "--r", "2"]) == 0
    assert _json_out(capsys)["verdict"] == "constant"
    assert main(["criteria", "outer-fourier", "--curve", shapes["ellipse"], "--k", "4"]) == 0
    assert _json_out(capsys)["consistent"] is True
    assert main(["criteria", "symplectic-fourier", "--curve", shapes["quartic"], "--k", "4"]) == 0
    assert _json_out(capsys)["consistent"] is False
    assert main(["criteria", "minkowski", "--body", shapes["lp"], "--k", "4"]) == 0
    assert _json_out(capsys)["verdict"] == "fails"
    assert main(["criteria", "minkowski", "--body", shapes["eight"], "--k", "4"]) == 0
    assert _json_out(capsys)["verdict"] == "passes"


def test_exit_codes(shapes, tmp_path, capsys):
    bad = _spec(tmp_path, "bad.json", {"type": "triangle"})
    assert main(["curve", bad]) == 2
    assert main(["curve", shapes["bad8"]]) == 3
    assert main(["criteria", "gutkin", "--curve", shapes["quartic"], "--k", "3"]) == 5
    assert main(["orbit", "--system", "birkhoff", "--curve", shapes["disc"], "--k", "4",
                 "--r", "2"]) == 5
    assert main(["orbit", "--system", "minkowski", "--curve", shapes["disc"],
                 "--body", shapes["hexagon"], "--k", "3"]) == 5
    assert main(["orbit", "--system", "birkhoff", "--curve", shapes["ellipse"], "--k", "7",
                 "--r", "3", "--max-iter", "1", "--tol", "1e-300"]) == 4
    assert main(["curve", str(tmp_path / "missing.json")]) == 6
    assert main(["plot-data", "curve", "--curve", shapes["disc"],
                 "--out", str(tmp_path / "no" / "dir.csv")]) == 6
    assert main(["criteria", "gutkin", "--k", "3"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["orbit", "--system", "pool"])
    assert exc.value.code == 2


def test_csv_round_trip(tmp_path, rng):
    data = rng.normal(size=(3, 20)) * 10.0 ** rng.integers(-10, 10, size=(3, 20))
    path = str(tmp_path / "x.csv")
    write_csv(path, ["a", "b", "c"], list(data), ["note: test"])
    cols, back = read_csv(path)
    assert cols == ["a", "b", "c"]
    np.testing.assert_array_equal(back.T, data)


@pytest.mark.parametrize("what,extra", [
    ("curve", []), ("angle", ["--k", "4"]), ("constancy", ["--k", "4"]),
    ("orbit", ["--system", "symplectic", "--k", "3"]), ("perimeters", []),
])
def test_plot_data(shapes, tmp_path, what, extra):
    out = str(tmp_path / f"{what}.csv")
    args = ["plot-data", what, "--out", out, *extra]
    if what != "perimeters":
        args += ["--curve", shapes["eight"]]
    assert main(args) == 0
    text = open(out).read()
    assert text.startswith("#")
    if what != "perimeters":
        assert read_csv(out)[1].shape[0] > 0


def test_examples_default(capsys):
    assert main(["examples"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 8 and "FAIL" not in out


def test_examples_deterministic():
    a = run_examples(rounded=0.05)
    b = run_examples(rounded=0.05)
    assert a == b
    assert all(ok for _, ok, _ in a)


def test_examples_nonconvex_family_reports_failure(capsys):
    assert main(["examples", "--family-eps", "0.05"]) == 1
    out = capsys.readouterr().out
    assert "FAIL invariant family: ConvexityError" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "billiardlab", "examples"], capture_output=True,
                         text=True, timeout=120)
    assert res.returncode == 0, res.stderr


def test_forced_fallback_runs_examples():
    env = dict(os.environ, BILLIARDLAB_PURE_PYTHON="1")
    code = ("import billiardlab.kernels as k; assert k.BACKEND == 'python', k.BACKEND; "
            "from billiardlab.cli import main; raise SystemExit(main(['examples']))")
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         timeout=120)
    assert res.returncode == 0, res.stdout + res.stderr
