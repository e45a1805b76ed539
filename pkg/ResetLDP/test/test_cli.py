import csv
import json

import pytest

from ..cli import Runner, join_grid_values, main
from ..core.acceptance import CheckResult
from ..core.phi import VarpiRow
from ..definitions.constants import Command, ExitCode
from ..tools.exceptions import ResetLdpNumericException


@pytest.fixture
def runner() -> Runner:
    return Runner()


def rows_of(path):
    with open(path, encoding="utf-8") as f:
        return list(csv.reader(line for line in f if not line.startswith("#")))


def test_every_command_is_registered(runner):
    assert set(runner.commands) == set(Command)
    assert all(command.help for command in runner.commands.values())
    assert runner.commands[Command.PHI].command == Command.PHI


def test_phi_table(tmp_path):
    path = tmp_path / "phi.csv"
    status = main(
        [
            "phi",
            "--functional",
            "occupation",
            "--dist",
            "exp:1",
            "--k-grid",
            "-1:1:3",
            "--output",
            str(path),
        ]
    )
    assert status == ExitCode.OK
    rows = rows_of(path)
    assert rows[0] == ["k", "phi", "regime", "residual"]
    assert [row[0] for row in rows[1:]] == ["-1", "0", "1"]
    assert float(rows[2][1]) == 0.0


def test_run_config(runner):
    config = runner.read_run_config(
        [
            "simulate",
            "--functional",
            "area",
            "--dist",
            "cubic:1",
            "--t",
            "10",
            "--bins",
            "0:1:4",
            "--k-grid",
            "0.5,1",
            "--out",
            "json",
        ]
    )
    assert config.command == Command.SIMULATE
    assert config.t == 10.0
    assert config.bins == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert config.k_grid == [0.5, 1.0]
    assert "output" not in config.to_dict()


@pytest.mark.parametrize(
    "argv",
    [
        ["nothing"],
        ["phi", "--functional", "occupation"],
        ["phi", "--functional", "volume", "--dist", "exp:1"],
        ["phi", "--functional", "area", "--dist", "exp:0"],
        ["phi", "--functional", "area", "--dist", "exp:1", "--k-grid", "1:2"],
        ["simulate", "--functional", "area", "--dist", "exp:1", "--n", "1"],
        ["scaling-check", "--functional", "occupation"],
        ["verify", "--checks", "everything"],
        ["rate", "--functional", "area", "--dist", "exp:1", "--tol-abs", "0"],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == ExitCode.USAGE


def test_missing_table_is_a_numeric_failure(tmp_path):
    argv = ["phi", "--functional", "abs-area", "--dist", "exp:1", "--k-grid", "0.5"]
    assert main(argv + ["--cache", str(tmp_path / "none.bin")]) == ExitCode.NUMERIC


def test_numeric_failure(mocker):
    mocker.patch(
        "ResetLDP.commands.phi_command.PhiSolver.solve",
        side_effect=ResetLdpNumericException("no root", {"k": 1.0}),
    )
    argv = ["phi", "--functional", "area", "--dist", "cubic:1", "--k-grid", "1"]
    assert main(argv) == ExitCode.NUMERIC


def test_varpi_violation(mocker, capsys):
    mocker.patch(
        "ResetLDP.commands.varpi_check_command.varpi_check",
        return_value=[VarpiRow(1.0, -2.0, -1.0, False)],
    )
    argv = ["varpi-check", "--functional", "area", "--dist", "cubic:1"]
    assert main(argv) == ExitCode.ACCEPTANCE
    assert "1,-2,-1,false" in capsys.readouterr().out


def test_verify(mocker, capsys):
    run = mocker.patch(
        "ResetLDP.commands.verify_command.run_acceptance",
        return_value=[
            CheckResult("cgf", True, "ok"),
            CheckResult("lln-clt", False, "variance off"),
        ],
    )
    assert main(["verify", "--quick", "--checks", "cgf,lln-clt"]) == ExitCode.ACCEPTANCE
    opts = run.call_args[0][0]
    assert opts.quick
    assert [check.id for check in opts.checks] == ["cgf", "lln-clt"]
    assert "lln-clt,false,variance off" in capsys.readouterr().out


def test_diagnose_json(tmp_path):
    path = tmp_path / "diagnose.json"
    argv = ["diagnose", "--functional", "area", "--dist", "cubic:1", "--out", "json"]
    assert main(argv + ["--output", str(path)]) == ExitCode.OK
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    assert document["classification"] == "AffineStretches"
    assert document["config"]["dist"] == "cubic:1"
    assert document["growth"]["clt"]


def test_simulate_with_trajectories(tmp_path):
    summary, trajectories = tmp_path / "summary.json", tmp_path / "traj.csv"
    argv = [
        "simulate",
        "--functional",
        "occupation",
        "--dist",
        "exp:1",
        "--t",
        "5",
        "--n",
        "100",
        "--bins",
        "0:1:2",
        "--out",
        "json",
        "--output",
        str(summary),
        "--trajectories",
        str(trajectories),
    ]
    assert main(argv) == ExitCode.OK
    with open(summary, encoding="utf-8") as f:
        document = json.load(f)
    assert document["n_samples"] == 100
    assert len(document["empirical_rate"]) == 2
    rows = rows_of(trajectories)
    assert rows[0] == ["F", "W", "N", "backlog"]
    assert len(rows) == 101


def test_abs_area_table(mocker, tmp_path, small_law):
    mocker.patch(
        "ResetLDP.commands.abs_area_table_command.AbsAreaLaw.build",
        return_value=small_law,
    )
    cache = tmp_path / "law.bin"
    argv = ["abs-area-table", "--cache", str(cache), "--out", "json"]
    assert main(argv) == ExitCode.OK
    assert cache.exists()


def test_join_grid_values():
    assert join_grid_values(["phi", "--k-grid", "-3:3:61", "--seed", "1"]) == [
        "phi",
        "--k-grid=-3:3:61",
        "--seed",
        "1",
    ]
    assert join_grid_values(["--w-grid", "0:1:5", "--dist", "exp:1"]) == [
        "--w-grid",
        "0:1:5",
        "--dist",
        "exp:1",
    ]


def test_occupation_rate_at_the_endpoint(tmp_path):
    path = tmp_path / "rate.csv"
    argv = ["rate", "--functional", "occupation", "--dist", "exp:1"]
    assert main(argv + ["--w-grid", "0:1:11", "--output", str(path)]) == ExitCode.OK
    rows = rows_of(path)
    assert rows[0] == ["w", "I", "k_star", "regime"]
    assert rows[1][:2] == ["0", "1"]
    assert rows[1][3] == "limit"
    assert float(rows[6][1]) == pytest.approx(0.0, abs=1e-9)


def test_airy_table(tmp_path):
    path = tmp_path / "airy.csv"
    assert main(["airy-table", "--count", "5", "--output", str(path)]) == ExitCode.OK
    rows = rows_of(path)
    assert len(rows) == 6
    first = rows[1]
    assert float(first[2]) == pytest.approx(0.80861, abs=5e-6)
    assert float(first[3]) == pytest.approx(1.48257, abs=5e-6)


def test_varpi_check_on_poisson_occupation(capsys):
    argv = ["varpi-check", "--functional", "occupation", "--dist", "exp:1"]
    assert main(argv + ["--k-grid", "-3:3:13"]) == ExitCode.OK
    out = capsys.readouterr().out.splitlines()
    rows = list(csv.reader(line for line in out if not line.startswith("#")))
    assert len(rows) == 14
    assert all(row[3] == "true" for row in rows[1:])


def test_scaling_check_through_the_mean(tmp_path):
    path = tmp_path / "scaling.csv"
    argv = ["scaling-check", "--functional", "area", "--r-list", "1"]
    status = main(argv + ["--w-grid", "0,0.5", "--output", str(path)])
    assert status == ExitCode.OK
    rows = rows_of(path)
    assert [row[1] for row in rows[1:]] == ["0", "0.5"]
    assert float(rows[1][2]) == 0.0


@pytest.mark.parametrize(
    "command, expected",
    [
        ("simulate", "default 0.0625; each interval gets at least 64 steps"),
        ("clt", "default 0.0625; each interval gets at least 64 steps"),
        ("abs-area-table", "grid of 2^-N on [0, 1] with a bridge correction"),
        ("abs-area-table", "N=8"),
    ],
)
def test_help_states_path_grids(capsys, command, expected):
    with pytest.raises(SystemExit) as exit_info:
        main([command, "--help"])
    assert exit_info.value.code == 0
    assert expected in " ".join(capsys.readouterr().out.split())
