import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from cli import CSV_COLUMNS, FortinConfig, RunConfig, SlopeConfig, cmd_slopes, cmd_solve, compute_slope
from cli.main import run
from utils.error_handler import EXIT_FAILURE, EXIT_OK, EXIT_USAGE


def test_compute_slope_exact():
    ndof = np.array([10.0, 40.0, 160.0, 640.0])
    assert compute_slope(ndof, 3.0 * ndof**-0.5) == pytest.approx(-0.5, abs=1e-10)
    assert compute_slope(ndof, np.full(4, 2.0)) == pytest.approx(0.0, abs=1e-12)


def test_compute_slope_uses_last_window(rng):
    ndof = np.geomspace(10, 1e5, 8)
    eta = ndof**-0.25
    eta[-3:] = ndof[-3:] ** -0.5 * eta[-3] / ndof[-3] ** -0.5
    assert compute_slope(ndof, eta, window=3) == pytest.approx(-0.5, abs=1e-10)
    noisy = ndof**-0.5 * (1 + 0.01 * rng.standard_normal(8))
    assert compute_slope(ndof, noisy) == pytest.approx(-0.5, abs=0.02)


def test_compute_slope_rejects_bad_data():
    with pytest.raises(ValueError):
        compute_slope(np.array([1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        compute_slope(np.array([1.0, 2.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        compute_slope(np.array([1.0, 2.0]), np.array([1.0, 2.0, 3.0]))


def test_slopes_from_csv(tmp_path):
    path = tmp_path / "run.csv"
    ndof = np.array([100, 400, 1600, 6400])
    pd.DataFrame({"level": range(4), "ndof": ndof, "h_max": 1.0 / np.sqrt(ndof),
                  "eta": ndof**-0.75}).to_csv(path, index=False)
    assert cmd_slopes(SlopeConfig(csv=path)) == pytest.approx(-0.75, abs=1e-10)
    assert cmd_slopes(SlopeConfig(csv=path, against="h")) == pytest.approx(1.5, abs=1e-10)
    with pytest.raises(ValueError):
        cmd_slopes(SlopeConfig(csv=path, column="err_M"))

    short = tmp_path / "short.csv"
    pd.DataFrame({"ndof": [1, 2], "eta": [1.0, 0.5]}).to_csv(short, index=False)
    with pytest.raises(ValueError):
        cmd_slopes(SlopeConfig(csv=short))


def test_solve_returns_one_table_per_mode():
    tables = cmd_solve(RunConfig(problem="smooth", refine="uniform", levels=2))
    assert list(tables) == ["uniform"]
    table = tables["uniform"]
    assert list(table.columns) == CSV_COLUMNS
    assert table["level"].tolist() == [0, 1]
    assert table["ndof"].is_monotonic_increasing


def test_run_solve_writes_both_files(tmp_path):
    out = tmp_path / "results" / "zero.csv"
    assert run(["solve", "--problem", "zero", "--levels", "2", "--out", str(out)]) == EXIT_OK
    for mode in ("uniform", "adaptive"):
        table = pd.read_csv(tmp_path / "results" / f"zero_{mode}.csv")
        assert list(table.columns) == CSV_COLUMNS
        assert len(table) == 1
        assert table.loc[0, "eta"] == 0.0


def test_run_single_mode_keeps_path(tmp_path):
    out = tmp_path / "plain.csv"
    argv = ["solve", "--problem", "zero", "--scheme", "plain", "--refine", "uniform", "--out", str(out)]
    assert run(argv) == EXIT_OK
    assert out.exists()


@pytest.mark.parametrize("argv", [
    ["slopes", "does-not-exist.csv"],
    ["solve", "--problem", "singular", "--poisson", "0.3"],
    ["solve", "--levels", "0"],
    ["fortin-verify", "--inject-fault", "ggrad"],
])
def test_usage_errors_exit_with_two(argv):
    assert run(argv) == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["solve", "--scheme", "mixed"],
    ["solve", "--seed", "3"],
])
def test_bad_arguments_are_rejected_by_parser(argv):
    with pytest.raises(SystemExit) as info:
        run(argv)
    assert info.value.code == 2


@pytest.mark.parametrize("extra, code", [
    ([], EXIT_OK),
    (["--inject-fault", "ddiv"], EXIT_FAILURE),
    (["--tolerance", "1e-15"], EXIT_FAILURE),
])
def test_fortin_verify_exit_codes(extra, code, capsys):
    assert run(["fortin-verify", "--samples", "2"] + extra) == code
    assert "Fortin" in capsys.readouterr().out


def test_config_models_validate():
    with pytest.raises(ValidationError):
        RunConfig(levels=0)
    with pytest.raises(ValidationError):
        RunConfig(theta_mark=1.5)
    with pytest.raises(ValidationError):
        FortinConfig(samples=0)
    assert RunConfig(refine="both").refine_modes == ("uniform", "adaptive")
    assert RunConfig(problem="smooth", poisson=0.3).poisson == 0.3


def test_solve_is_deterministic():
    config = RunConfig(problem="smooth", refine="adaptive", levels=3)
    first = cmd_solve(config)["adaptive"].drop(columns="wall_ms")
    second = cmd_solve(config.model_copy(update={"threads": 3}))["adaptive"].drop(columns="wall_ms")
    assert first.to_csv(index=False) == second.to_csv(index=False)


@pytest.mark.slow
def test_smooth_problem_rates():
    table = cmd_solve(RunConfig(problem="smooth", refine="uniform", levels=5))["uniform"]
    for column in ("err_u", "err_theta", "err_M"):
        slope = compute_slope(table["ndof"].to_numpy(), table[column].to_numpy(), window=3)
        assert slope == pytest.approx(-0.5, abs=0.08), column


@pytest.mark.slow
@pytest.mark.parametrize("scheme, columns", [
    ("theta", {"eta": (-0.40, -0.27), "err_M": (-0.40, -0.27), "err_u": (-0.60, -0.42), "err_theta": (-0.60, -0.42)}),
    ("plain", {"eta": (-0.40, -0.27), "err_M": (-0.40, -0.27), "err_u": (-0.60, -0.42)}),
])
def test_singular_uniform_rates(scheme, columns):
    table = cmd_solve(RunConfig(problem="singular", scheme=scheme, refine="uniform", levels=6))["uniform"]
    for column, (low, high) in columns.items():
        slope = compute_slope(table["ndof"].to_numpy(), table[column].to_numpy(), window=3)
        assert low <= slope <= high, column


@pytest.mark.slow
def test_singular_adaptive_rates():
    table = cmd_solve(RunConfig(problem="singular", refine="adaptive", levels=30))["adaptive"]
    assert len(table) > 6
    for column in ("eta", "err_u", "err_theta", "err_M"):
        slope = compute_slope(table["ndof"].to_numpy(), table[column].to_numpy(), window=6)
        assert -0.60 <= slope <= -0.40, column
