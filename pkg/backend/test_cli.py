"""Command-line harness: artefacts, headers, config files and exit codes"""

import io
import logging

from click.testing import CliRunner
import numpy as np
import pandas as pd
import pytest

from app import __version__
from app.main import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def restore_root_handlers():
    # the CLI reconfigures the root logger onto the runner's stderr
    root = logging.getLogger()
    before = list(root.handlers)
    yield
    for handler in list(root.handlers):
        if handler not in before:
            root.removeHandler(handler)
    for handler in before:
        if handler not in root.handlers:
            root.addHandler(handler)


def invoke(runner, out, *args):
    return runner.invoke(cli, ["--out", str(out), *args])


def read_series(path):
    return pd.read_csv(io.StringIO(path.read_text()), comment="#")


def header_of(path):
    return [line for line in path.read_text().splitlines() if line.startswith("#")]


def test_young_levels_and_check(runner, tmp_path):
    result = invoke(runner, tmp_path, "young", "--n-max", "6")
    assert result.exit_code == 0, result.output
    check = read_series(tmp_path / "young_check.csv")
    assert list(check["check"]) == ["ok"] * 6
    assert int(check["sum_w2"].iloc[-1]) == 720
    assert (tmp_path / "young_levels.txt").read_text().count("\n\n") == 5


def test_header_carries_resolved_config(runner, tmp_path):
    invoke(runner, tmp_path, "--seed", "42", "young", "--n-max", "3")
    header = header_of(tmp_path / "young_check.csv")
    assert header[:4] == ["# command = young", f"# version = {__version__}", "# seed = 42", "# n_max = 3"]


@pytest.mark.parametrize("n_max", ["0", "51"])
def test_young_limits_exit_two(runner, tmp_path, n_max):
    result = invoke(runner, tmp_path, "young", "--n-max", n_max)
    assert result.exit_code == 2
    assert "error:" in result.output


def test_config_file_values_and_overrides(runner, tmp_path):
    config = tmp_path / "young.cfg"
    config.write_text("# level dump\nn-max = 4\n")
    result = runner.invoke(cli, ["--out", str(tmp_path), "--config", str(config), "young"])
    assert result.exit_code == 0, result.output
    assert len(read_series(tmp_path / "young_check.csv")) == 4

    runner.invoke(cli, ["--out", str(tmp_path), "--config", str(config), "young", "--n-max", "2"])
    assert len(read_series(tmp_path / "young_check.csv")) == 2


def test_unknown_config_key_exit_two(runner, tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("n_max = 3\nbogus = 1\n")
    result = runner.invoke(cli, ["--out", str(tmp_path), "--config", str(config), "young"])
    assert result.exit_code == 2


def test_malformed_config_line_exit_two(runner, tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("n_max 3\n")
    result = runner.invoke(cli, ["--out", str(tmp_path), "--config", str(config), "young"])
    assert result.exit_code == 2


def test_chain_series_columns(runner, tmp_path):
    result = invoke(runner, tmp_path, "chain", "--dim", "2", "--length", "32", "--t-max", "2", "--points", "11")
    assert result.exit_code == 0, result.output
    series = read_series(tmp_path / "chain_d2.csv")
    assert list(series.columns) == ["t", "mean_n", "leakage"]
    assert series["mean_n"].iloc[0] == 1.0
    assert "front reached" in result.output


def test_chain_fit_reports_offset_and_transit(runner, tmp_path):
    result = invoke(runner, tmp_path, "chain", "--length", "64", "--t-max", "20", "--points", "101", "--fit")
    assert result.exit_code == 0, result.output
    fit = read_series(tmp_path / "chain_d1_fit.csv")
    assert {"exponent", "t0", "transit_n", "transit_measured", "transit_ansatz"} <= set(fit.columns)
    row = fit.iloc[0]
    assert row["transit_ansatz"] == pytest.approx(row["transit_n"] - 1)


def test_chain_reruns_are_byte_identical(runner, tmp_path):
    args = ["chain", "--dim", "1", "--length", "24", "--t-max", "3", "--points", "13"]
    invoke(runner, tmp_path / "a", *args)
    invoke(runner, tmp_path / "b", *args)
    assert (tmp_path / "a" / "chain_d1.csv").read_bytes() == (tmp_path / "b" / "chain_d1.csv").read_bytes()


def test_fit_without_enough_points_exit_three(runner, tmp_path):
    result = invoke(runner, tmp_path, "chain", "--length", "16", "--t-max", "1", "--points", "5", "--fit")
    assert result.exit_code == 3
    assert (tmp_path / "chain_d1.csv").exists()


def test_bad_tolerance_exit_two(runner, tmp_path):
    result = invoke(runner, tmp_path, "chain", "--tol", "1e-3")
    assert result.exit_code == 2


def test_lindblad_with_markov_comparison(runner, tmp_path):
    result = invoke(runner, tmp_path, "lindblad", "--length", "16", "--gamma", "40", "--t-max", "5",
                    "--points", "11", "--compare-markov")
    assert result.exit_code == 0, result.output
    assert "max L1" in result.output
    assert list(read_series(tmp_path / "lindblad_d1.csv").columns) == ["t", "mean_n", "leakage", "trace_err"]


def test_markov_series(runner, tmp_path):
    result = invoke(runner, tmp_path, "markov", "--length", "32", "--gamma", "2", "--t-max", "5", "--points", "11")
    assert result.exit_code == 0, result.output
    series = read_series(tmp_path / "markov_d1.csv")
    assert list(series.columns) == ["t", "mean_n", "leakage"]


def test_markov_rejects_zero_gamma(runner, tmp_path):
    assert invoke(runner, tmp_path, "markov", "--gamma", "0").exit_code == 2


def test_oracle_couplings_table(runner, tmp_path):
    result = invoke(runner, tmp_path, "oracle", "--validate-couplings", "--grid", "8")
    assert result.exit_code == 0, result.output
    table = read_series(tmp_path / "oracle_couplings.csv")
    assert list(table["check"]) == ["ok"] * len(table)
    np.testing.assert_allclose(table["omega_sqrt_k_plus_1"], np.sqrt(table["k"] + 1))


def test_oracle_basis_dump(runner, tmp_path):
    result = invoke(runner, tmp_path, "oracle", "--dump-basis", "--grid", "6", "--max-n", "3")
    assert result.exit_code == 0, result.output
    lines = [line for line in (tmp_path / "oracle_basis.txt").read_text().splitlines() if not line.startswith("#")]
    assert len(lines) == 1 + 2 + 3
    assert lines[0] == "1" + "0" * 35 + "\t1"


def test_oracle_boundary_contact_exit_three(runner, tmp_path):
    result = invoke(runner, tmp_path, "oracle", "--validate-bijection", "--grid", "4", "--max-n", "5")
    assert result.exit_code == 3


def test_thermal_trajectory_dump(runner, tmp_path):
    result = invoke(runner, tmp_path, "--seed", "3", "thermal", "--width", "8", "--height", "8",
                    "--p", "0.1", "--t-max", "5", "--dump-trajectory")
    assert result.exit_code == 0, result.output
    path = tmp_path / "thermal_trajectory.csv"
    assert "# seed = 3" in header_of(path)
    assert list(read_series(path).columns) == ["t", "up_count"]


def test_thermal_sweep_output(runner, tmp_path):
    result = invoke(runner, tmp_path, "thermal", "--sweep", "0:0.02:0.01", "--trials", "200", "--width", "8",
                    "--height", "8", "--t-max", "5", "--workers", "1")
    assert result.exit_code == 0, result.output
    sweep = read_series(tmp_path / "thermal_sweep_false-positive.csv")
    np.testing.assert_allclose(sweep["p"], [0.0, 0.01, 0.02])
    assert sweep["rate"].iloc[0] == 0.0


def test_thermal_bad_sweep_exit_two(runner, tmp_path):
    assert invoke(runner, tmp_path, "thermal", "--sweep", "0.1:0.01").exit_code == 2


def test_thermal_boltzmann(runner, tmp_path):
    result = invoke(runner, tmp_path, "thermal", "--boltzmann", "100e9", "1.4")
    assert result.exit_code == 0, result.output
    assert "0.0314" in result.output


def test_figure2_zero_gamma_reproduces_coherent_curves(runner, tmp_path):
    config = tmp_path / "figure2.cfg"
    config.write_text("\n".join([
        "gamma = 0",
        "points = 21",
        "tol = 1e-9",
        "coherent_1d_length = 32", "coherent_1d_t_max = 4",
        "dephased_1d_length = 32", "dephased_1d_t_max = 4",
        "coherent_2d_length = 32", "coherent_2d_t_max = 2",
        "dephased_2d_length = 32", "dephased_2d_t_max = 2",
    ]) + "\n")
    result = runner.invoke(cli, ["--out", str(tmp_path / "out"), "--config", str(config), "figure2"])
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    for dim in ("1d", "2d"):
        coherent = read_series(out / f"figure2_{dim}_coherent.csv")
        dephased = read_series(out / f"figure2_{dim}_dephased.csv")
        np.testing.assert_allclose(dephased["mean_n"], coherent["mean_n"], atol=1e-6)
    summary = read_series(out / "figure2_exponents.csv")
    assert set(summary["engine"]) == {"chain", "lindblad"}
    assert len(summary) == 4
