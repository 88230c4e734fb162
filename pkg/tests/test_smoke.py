# tests/test_smoke.py

import csv

import pytest

from main import main
from special_fn import gamma


def read_record(path):
    record = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        key, value = line.split(" = ", 1)
        record[key] = value
    return record


def write_spec(tmp_path, text, name="problem.spec"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def printed_value(out, prefix):
    for line in out.splitlines():
        if line.startswith(prefix):
            return float(line[len(prefix):].split(",")[0])
    raise AssertionError(f"no line starting with {prefix!r} in {out!r}")


def test_example1_reports_gamma_value(capsys):
    assert main(["example1", "--alpha", "0.5"]) == 0
    out = capsys.readouterr().out
    assert printed_value(out, "value: ") == pytest.approx(0.886226925452758, abs=1e-8)
    assert "FAIL" not in out


def test_example1_at_alpha_one(capsys):
    assert main(["example1", "--alpha", "1", "--m", "2"]) == 0
    assert printed_value(capsys.readouterr().out, "value: ") == pytest.approx(1.0, abs=1e-8)


def test_example1_rejects_alpha_out_of_range():
    assert main(["example1", "--alpha", "1.5"]) == 2
    assert main(["example1", "--alpha", "0"]) == 2


def test_missing_arguments_are_usage_errors():
    assert main([]) == 2
    assert main(["example1"]) == 2
    assert main(["nope"]) == 2


def test_example2_reports_nonexistence(capsys):
    assert main(["example2", "--alpha", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "no minimizer in F" in out
    assert "y(1) diverges" in out


def test_example2_at_alpha_one(capsys):
    assert main(["example2", "--alpha", "1"]) == 0
    out = capsys.readouterr().out
    assert printed_value(out, "minimizer: y(t) = t, value ") == pytest.approx(1.0, abs=1e-12)


def test_example2_agrawal_sample(capsys):
    assert main(["example2", "--alpha", "0.75"]) == 0
    assert "3.16227766" in capsys.readouterr().out


def test_sweep_rows_match_gamma(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--alphas", "0.25,0.5,0.75,1.0", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(row["alpha"]) for row in rows] == [0.25, 0.5, 0.75, 1.0]
    for row in rows:
        assert float(row["abs_error"]) <= 1e-8
        assert float(row["gamma_alpha_plus_1"]) == pytest.approx(gamma(float(row["alpha"]) + 1.0))
        assert row["converged"] == "true"
    assert b"\r\n" not in out.read_bytes()


def test_sweep_is_deterministic(tmp_path, monkeypatch):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert main(["sweep", "--alphas", "0.3,0.9,0.6", "--out", str(first)]) == 0
    monkeypatch.setenv("FRACVAR_SWEEP_WORKERS", "3")
    assert main(["sweep", "--alphas", "0.3,0.9,0.6", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_sweep_empty_list_writes_header(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["sweep", "--alphas", "", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == (
        "alpha,value,gamma_alpha_plus_1,abs_error,residual_max_deviation,converged\n"
    )


def test_sweep_errors(tmp_path):
    assert main(["sweep", "--alphas", "0.5,0", "--out", str(tmp_path / "bad.csv")]) == 2
    assert not (tmp_path / "bad.csv").exists()
    assert main(["sweep", "--alphas", "0.5", "--out", str(tmp_path / "missing" / "x.csv")]) == 3


def test_verify_byparts(capsys):
    assert main(["verify", "--suite", "byparts"]) == 0
    out = capsys.readouterr().out
    assert "check byparts_canonical: PASS" in out
    assert "suite byparts: PASS" in out


def test_verify_unknown_suite():
    assert main(["verify", "--suite", "nope"]) == 2


def test_solve_weighted_energy_problem(tmp_path, capsys):
    spec = write_spec(tmp_path, "# weighted v^2 problem\nalpha = 0.5\ninterval = 0, 1\ny_a = 0\ny_b = 1\nm = 3\n")
    out = tmp_path / "result.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(out)]) == 0
    record = read_record(out)
    assert list(record)[:3] == ["alpha", "a", "b"]
    assert list(record)[-1] == "residual_constant"
    assert float(record["value"]) == pytest.approx(gamma(1.5), abs=1e-8)
    assert record["converged"] == "true"
    assert record["residual_constant"] == "true"
    assert "solved v2" in capsys.readouterr().out


def test_solve_expression_matches_registry(tmp_path):
    registry = write_spec(tmp_path, "alpha = 0.5\nm = 2\n", "registry.spec")
    expr = write_spec(tmp_path, "alpha = 0.5\nm = 2\nlagrangian = expr: v^2 + 0*u\nsolver = general\n", "expr.spec")
    assert main(["solve", "--spec", str(registry), "--out", str(tmp_path / "a.txt")]) == 0
    assert main(["solve", "--spec", str(expr), "--out", str(tmp_path / "b.txt")]) == 0
    a = float(read_record(tmp_path / "a.txt")["value"])
    b = float(read_record(tmp_path / "b.txt")["value"])
    assert b == pytest.approx(a, abs=1e-9)


def test_solve_is_deterministic(tmp_path):
    spec = write_spec(tmp_path, "alpha = 0.75\nlagrangian = quadratic\nc_vv = 1\nc_uu = 2\nm = 3\n")
    first = tmp_path / "first.txt"
    second = tmp_path / "second.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(first)]) == 0
    assert main(["solve", "--spec", str(spec), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "text",
    [
        "alpha = 0.5\nbogus = 1\n",
        "alpha = 0.5\nalpha = 0.6\n",
        "alpha 0.5\n",
        "alpha = 2\n",
        "y_a = 0\n",
        "alpha = 0.5\na = 1\nb = 0\n",
        "alpha = 0.5\nlagrangian = expr: v^\n",
        "alpha = 0.5\nsolver = magic\n",
    ],
)
def test_solve_rejects_malformed_spec(tmp_path, capsys, text):
    spec = write_spec(tmp_path, text)
    assert main(["solve", "--spec", str(spec), "--out", str(tmp_path / "out.txt")]) == 2
    assert "line" in capsys.readouterr().err


def test_solve_error_location(tmp_path, capsys):
    spec = write_spec(tmp_path, "alpha = 0.5\nlagrangian = expr: v^2 + $\n")
    assert main(["solve", "--spec", str(spec), "--out", str(tmp_path / "out.txt")]) == 2
    assert "line 2, column 26" in capsys.readouterr().err


def test_solve_missing_spec_is_io_error(tmp_path):
    assert main(["solve", "--spec", str(tmp_path / "absent.spec"), "--out", str(tmp_path / "out.txt")]) == 3


def test_solve_non_convergence_still_writes_result(tmp_path):
    spec = write_spec(tmp_path, "alpha = 0.5\nlagrangian = expr: v^2 + u^2\nsolver = general\nmax_iter = 3\n")
    out = tmp_path / "partial.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(out)]) == 4
    record = read_record(out)
    assert record["converged"] == "false"
    assert record["iterations"] == "3"


def test_solve_expression_needs_general_solver(tmp_path, capsys):
    spec = write_spec(tmp_path, "alpha = 0.5\nlagrangian = expr: v^2 + 0*u\n")
    out = tmp_path / "out.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(out)]) == 2
    assert "line 2, column 14" in capsys.readouterr().err
    assert not out.exists()


def test_solve_null_lagrangian(tmp_path):
    # c_v v integrates to c_v (y_b - y_a) for every admissible path
    spec = write_spec(tmp_path, "alpha = 0.5\nlagrangian = quadratic\nc_v = 1\n")
    out = tmp_path / "out.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(out)]) == 0
    record = read_record(out)
    assert record["coefficients"] == "0, 0, 0"
    assert float(record["value"]) == pytest.approx(1.0, rel=1e-12)


def test_solve_degenerate_problem_writes_nothing(tmp_path, capsys):
    spec = write_spec(tmp_path, "alpha = 0.5\nlagrangian = quadratic\nc_u = 1\n")
    out = tmp_path / "out.txt"
    assert main(["solve", "--spec", str(spec), "--out", str(out)]) == 4
    assert "solve failed" in capsys.readouterr().out
    assert not out.exists()


def test_solve_node_count_follows_environment(tmp_path, monkeypatch):
    spec = write_spec(tmp_path, "alpha = 0.3\nlagrangian = expr: v^2 + u^2\nsolver = general\nm = 1\n")
    assert main(["solve", "--spec", str(spec), "--out", str(tmp_path / "default.txt")]) == 0
    monkeypatch.setenv("FRACVAR_QUAD_N", "4")
    assert main(["solve", "--spec", str(spec), "--out", str(tmp_path / "coarse.txt")]) == 0
    default = read_record(tmp_path / "default.txt")
    coarse = read_record(tmp_path / "coarse.txt")
    assert coarse["coefficients"] != default["coefficients"]
    # both values are computed adaptively, and the coarse search cannot beat the minimum
    assert float(coarse["value"]) >= float(default["value"]) - 1e-8
