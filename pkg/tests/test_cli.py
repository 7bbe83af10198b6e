import io

import numpy as np
import pytest

from gaussextrema.cli import OUTPUT_ENV, run
from gaussextrema.io import read_csv, read_obj


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_two_point_shows_negative_peak(tmp_path):
    path = tmp_path / "tp.csv"
    code, _, _ = call("two-point", "--kernel", "random-wave", "--r-max", "10", "-o", str(path))
    assert code == 0
    table = read_csv(path)
    assert list(table) == ["r", "psi", "C_times_4pi2", "method"]
    assert abs(table["r"][np.argmin(table["C_times_4pi2"])] - 3.4) <= 0.1


def test_verify_sum_rule_gaussian(tmp_path):
    code, out, _ = call("verify", "--suite", "sum-rule", "--kernel", "gaussian", "-o", str(tmp_path / "v.csv"))
    assert code == 0
    table = read_csv(tmp_path / "v.csv")
    row = table["check"].index("sum_rule_residual")
    assert table["value"][row] < 1e-8
    assert "PASS" in out and "FAIL" not in out


def test_verify_failure_exits_2(tmp_path):
    code, out, _ = call("verify", "--suite", "curvature", "--kernel", "gaussian", "--tol", "1e-30",
                        "-o", str(tmp_path / "v.csv"))
    assert code == 2
    assert "FAIL" in out


def test_embed_meridians(tmp_path):
    obj = tmp_path / "surface.obj"
    code, out, _ = call("embed", "--kernel", "random-wave", "--y-max", "7", "--meridian-step", "0.25",
                        "--n-angular", "16", "-o", str(obj))
    assert code == 0
    assert "meridians: 29" in out
    verts, tris = read_obj(obj)
    contour = read_csv(tmp_path / "surface_contour.csv")
    assert list(contour) == ["y", "A", "B", "valid"]
    assert verts.shape[0] == 1 + 16 * (len(contour["y"]) - 1)


def test_wall_profile_stdout_is_pure_csv():
    code, out, err = call("wall-profile", "--y-max", "3", "--n", "301", "-o", "-")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "y,f,rho_4pi" and len(lines) == 302
    assert "net charge" in err


def test_membrane_wall_profile(tmp_path):
    code, _, err = call("wall-profile", "--kernel", "membrane", "-o", str(tmp_path / "m.csv"))
    assert code == 0
    assert read_csv(tmp_path / "m.csv")["y"][0] == 0.25


def test_curvature_modes():
    code, out, _ = call("curvature", "--n", "50", "-o", "-")
    assert code == 0 and out.startswith("y,R\n")
    code, out, _ = call("curvature", "--mode", "oracle", "--kernel", "gaussian", "--r", "1,2", "-o", "-")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "r,R_closed,R_fd,abs_diff" and len(rows) == 3


def test_mc_is_deterministic():
    argv = ("mc", "--estimator", "density", "--realizations", "3", "--size", "12", "--seed", "4", "-o", "-")
    a, b = call(*argv), call(*argv, "--workers", "2")
    assert a[0] == 0 and a[1] == b[1]
    assert a[1].splitlines()[0] == "bin_center,mean,stderr,n"


def test_default_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "out"))
    code, _, err = call("two-point", "--kernel", "gaussian", "--n", "10")
    assert code == 0
    assert (tmp_path / "out" / "two-point.csv").exists()


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nkernel = gaussian\nr-max = 4\nn = 5\n", encoding="utf-8")
    code, out, _ = call("two-point", "--config", str(cfg), "-o", "-")
    assert code == 0
    table = out.splitlines()
    assert len(table) == 6 and table[-1].startswith("4,")
    code, out, _ = call("two-point", "--config", str(cfg), "--n", "3", "-o", "-")
    assert len(out.splitlines()) == 4


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n", encoding="utf-8")
    assert call("two-point", "--config", str(cfg))[0] == 1


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("two-point", "--nope"),
    ("two-point", "--r-max", "-3"),
    ("two-point", "--r-min", "5", "--r-max", "1"),
    ("wall-profile", "--kernel", "cauchy"),
    ("mc", "--kernel", "gaussian"),
    ("embed", "-o", "-"),
])
def test_validation_errors_exit_1(argv):
    code, _, err = call(*argv)
    assert code == 1
    assert err


def test_numerical_failure_exits_2():
    # the membrane metric degenerates close to the wall for B = 1
    code, _, err = call("wall-profile", "--kernel", "membrane", "--y-min", "0.05", "-o", "-")
    assert code == 2
    assert "numerical" in err


def test_help_exits_0(capsys):
    assert run(["two-point", "--help"]) == 0
    assert "--r-max" in capsys.readouterr().out
