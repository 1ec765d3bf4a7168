import json
import os
import subprocess
import sys

import numpy as np
import pytest

from firey_lab import cli, geometry
from firey_lab.geometry import AxisymBody, CircleGrid, disc, ellipse


def write_body(path, body):
    with open(path, "w") as fh:
        json.dump(geometry.body_to_dict(body), fh)
    return str(path)


@pytest.fixture
def ball(tmp_path):
    return write_body(tmp_path / "ball_r1.json", AxisymBody(3, disc(CircleGrid(256), 1.0)))


@pytest.fixture
def planar(tmp_path):
    return write_body(tmp_path / "ellipse.json", ellipse(CircleGrid(256), 1.3, 0.8, 0.2, (0.05, 0.1)))


def run(args, out, capsys=None):
    code = cli.run(list(args) + ["--out", str(out)])
    stdout = capsys.readouterr().out if capsys else None
    return code, (json.loads(stdout) if stdout else None)


def load(out, name):
    with open(os.path.join(out, name)) as fh:
        return json.load(fh)


# documented examples --------------------------------------------------------------------

def test_verify_ball_exits_zero(tmp_path, ball, capsys):
    code, summary = run(["verify", "--body", ball, "--G", "power:1"], tmp_path / "out", capsys)
    assert code == 0 and summary["max_abs"] == 0.0
    man = load(tmp_path / "out", "manifest.json")
    assert man["exit_code"] == 0 and man["status"] == "ok"
    assert ball in man["inputs"] and "residual.json" in man["outputs"]
    assert set(man["versions"]) >= {"firey_lab", "numpy", "scipy", "python"}


def test_counterexample_exits_zero(tmp_path, capsys):
    out = tmp_path / "ce"
    code, summary = run(["counterexample", "--n", "3", "--r", "1", "--lambda", "0.1"], out, capsys)
    assert code == 0 and summary["residual"] <= 1e-6
    rep = load(out, "counterexample.json")
    assert rep["report"]["residual_max"] == summary["residual"]
    for name in ("body.json", "shifted_body.json", "G.json", "residual.csv"):
        assert os.path.isfile(out / name)


def test_check_an_threshold_power_exits_one(tmp_path, capsys):
    out = tmp_path / "an"
    code, err = run(["check-an", "--G", "power:-4", "--n", "3"], out, capsys)
    assert code == 1
    assert err["error"] == "verification-failure"
    cert = err["details"]["certificate"]
    assert cert["passed"] is False and cert["violation"] is not None
    assert load(out, "error.json") == err
    assert load(out, "manifest.json")["exit_code"] == 1


def test_check_an_passing(tmp_path, capsys):
    code, cert = run(["check-an", "--G", "power:-3", "--n", "3"], tmp_path, capsys)
    assert code == 0 and cert["passed"]


# usage and error paths ------------------------------------------------------------------

@pytest.mark.parametrize("args", [
    [],
    ["density"],
    ["verify", "--body", "x.json", "--G", "power:1", "--grid-n", "300"],
    ["verify", "--body", "x.json", "--G", "power:1", "--grid-n", "128"],
    ["verify", "--body", "x.json", "--G", "power:1", "--tol", "-1"],
    ["solve2d", "--G", "power:1", "--seed", "-3"],
    ["probe-mr", "--body", "x.json", "--samples", "2"],
    ["nonsense"],
])
def test_usage_errors_exit_two(tmp_path, args, capsys):
    assert cli.run(args + ["--out", str(tmp_path)] if args else args) == 2


def test_missing_file_is_structured_error(tmp_path, capsys):
    code, err = run(["density", "--body", str(tmp_path / "missing.json")], tmp_path / "o", capsys)
    assert code == 1
    assert set(err) == {"error", "message", "details"}


def test_precondition_error_names_the_hypothesis(tmp_path, capsys):
    code, err = run(["counterexample", "--n", "3", "--m", "4"], tmp_path, capsys)
    assert code == 1 and err["error"] == "precondition"
    assert "minimal_admissible_m" in err["details"]


def test_verify_failure_exit_one(tmp_path, planar, capsys):
    code, err = run(["verify", "--body", planar, "--G", "const:1"], tmp_path, capsys)
    assert code == 1 and err["error"] == "verification-failure"
    assert err["details"]["max_abs"] > 1e-6


# subcommands -----------------------------------------------------------------------------

def test_density_and_csv_format(tmp_path, planar, capsys):
    code, summary = run(["density", "--body", planar, "--format", "csv"], tmp_path, capsys)
    assert code == 0 and summary["min_f"] > 0
    lines = (tmp_path / "density.csv").read_text().splitlines()
    assert lines[0] == "phi,f" and len(lines) == 257
    phi0 = lines[1].split(",")[0]
    assert phi0 == "0.0"


def test_polar_steiner_santalo(tmp_path, planar, capsys):
    assert run(["polar", "--body", planar], tmp_path / "p", capsys)[0] == 0
    back = geometry.body_from_dict(load(tmp_path / "p", "polar_body.json"))
    assert back.N == 256
    assert run(["steiner", "--body", planar, "--angle", "1.0"], tmp_path / "s", capsys)[0] == 0
    code, summary = run(["santalo", "--body", planar], tmp_path / "z", capsys)
    assert code == 0 and len(summary["point"]) == 2


def test_glue_modes(tmp_path, capsys):
    grid = CircleGrid(512)
    d = write_body(tmp_path / "d.json", disc(grid, 1.0))
    t = write_body(tmp_path / "t.json", geometry.ProfileSupport(grid, 1 + 0.3 * np.sin(grid.angles) ** 2))
    code, _ = run(["glue", "--mode", "tangency", "--body", d, "--body2", t, "--p", "1,0", "--q=-1,0"],
                  tmp_path / "tan", capsys)
    assert code == 0
    code, err = run(["glue", "--mode", "tangency", "--body", d, "--body2", t, "--p", "0,1", "--q=0,-1"],
                    tmp_path / "bad", capsys)
    assert code == 1 and err["error"] in ("tangent-mismatch", "boundary-intersection-not-found")
    code, summary = run(["glue", "--mode", "caps", "--n", "3", "--eps", "0.002"], tmp_path / "caps", capsys)
    assert code == 0
    assert os.path.isfile(tmp_path / "caps" / "G_eps.json")


def test_solve2d_and_probe(tmp_path, planar, capsys):
    code, summary = run(["solve2d", "--G", "power:2", "--seeds", "4"], tmp_path / "sol", capsys)
    assert code == 0 and summary["tags"] == ["circle-centered"]
    assert os.path.isfile(tmp_path / "sol" / "solution_00.csv")
    code, summary = run(["probe-mr", "--body", planar, "--samples", "11"], tmp_path / "mr", capsys)
    assert code == 0 and summary["passed"]


def test_report_roundtrip(tmp_path, capsys):
    code, summary = run(["report", "--criteria", "1,2,10"], tmp_path / "a", capsys)
    assert code == 0 and summary == {"criteria": 3, "passed": 3, "failed": []}
    code, again = run(["report", "--from", str(tmp_path / "a")], tmp_path / "b", capsys)
    assert code == 0 and again == summary
    assert (tmp_path / "a" / "acceptance.json").read_bytes() == (tmp_path / "b" / "acceptance.json").read_bytes()


# determinism ----------------------------------------------------------------------------

@pytest.mark.parametrize("args", [
    ["density", "--format", "csv"],
    ["santalo"],
    ["solve2d", "--G", "power:-3", "--seeds", "6", "--seed", "7"],
])
def test_outputs_are_byte_identical(tmp_path, planar, args, capsys):
    if args[0] != "solve2d":
        args = args + ["--body", planar]
    for tag in ("x", "y"):
        assert cli.run(args + ["--out", str(tmp_path / tag)]) == 0
    capsys.readouterr()
    names = sorted(os.listdir(tmp_path / "x"))
    assert names == sorted(os.listdir(tmp_path / "y"))
    for name in names:
        if name == "timings.json":
            continue
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes(), name


def test_module_entry_point(tmp_path, ball):
    proc = subprocess.run([sys.executable, "-m", "firey_lab", "verify", "--body", ball, "--G", "power:1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["max_abs"] == 0.0


def test_stale_error_record_is_removed(tmp_path, ball, capsys):
    out = tmp_path / "o"
    assert run(["verify", "--body", str(tmp_path / "nope.json"), "--G", "power:1"], out, capsys)[0] == 1
    assert os.path.isfile(out / "error.json")
    assert run(["verify", "--body", ball, "--G", "power:1"], out, capsys)[0] == 0
    assert not os.path.isfile(out / "error.json")
