"""End-to-end tests of the command-line interface, run in process."""

import csv
import json

import numpy as np
import pytest

from gamedyn import preset, save_game
from gamedyn.cli import main


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    monkeypatch.delenv("GAMEDYN_OUT", raising=False)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_games(capsys):
    code, out, _ = run_cli(capsys, "list-games")
    assert code == 0
    names = set(out.split())
    assert {"rps", "anticoord123", "matching_pennies", "two_player_rps",
            "shapley", "network_zero_sum_mp", "jordan_mp", "modified_rps_A",
            "modified_rps_Abar", "modified_jordan"} <= names


def test_classify_stdout_and_file(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "classify", "--preset", "rps",
                           "--param", "l=5", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"]["class"] == "hypo-monotone"
    assert doc["classification"]["mu"] == pytest.approx(2.0)
    on_disk = json.loads((tmp_path / "classify.json").read_text())
    assert on_disk == doc


def test_solve_frozen_value(capsys):
    code, out, _ = run_cli(capsys, "solve", "--preset", "anticoord123")
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(doc["rest_point"]["x"],
                               [0.4071970967, 0.3215972394, 0.2712056639],
                               atol=1e-6)
    assert doc["rest_point"]["status"] == "converged"


def test_env_dir_overrides_flag(tmp_path, monkeypatch, capsys):
    env_dir = tmp_path / "from_env"
    flag_dir = tmp_path / "from_flag"
    monkeypatch.setenv("GAMEDYN_OUT", str(env_dir))
    code, _, _ = run_cli(capsys, "solve", "--preset", "anticoord123",
                         "--out", str(flag_dir))
    assert code == 0
    assert (env_dir / "solve.json").exists()
    assert not flag_dir.exists()


def test_simulate_is_bitwise_deterministic(tmp_path, capsys):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        code, _, _ = run_cli(capsys, "simulate", "--preset", "rps",
                             "--param", "l=2.5", "--dt", "0.05",
                             "--t-end", "5", "--record-every", "10",
                             "--seeds", "0,1", "--out", str(d))
        assert code == 0
    for name in ("traj_seed0.csv", "traj_seed1.csv", "summary.json"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    summary = json.loads((dirs[0] / "summary.json").read_text())
    assert summary["scheme"] == "first-order"
    assert set(summary["runs"]) == {"0", "1"}
    for run in summary["runs"].values():
        assert run["csv"].startswith("traj_seed")
        assert len(run["terminal_x"]) == 3


def test_simulate_requires_output_dir(capsys):
    code, _, err = run_cli(capsys, "simulate", "--preset", "rps",
                           "--param", "l=1")
    assert code == 2
    assert "error:" in err


def test_simulate_higher_order_columns(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "simulate", "--preset", "rps",
                         "--param", "l=2.5", "--scheme", "higher-order",
                         "--dt", "0.05", "--t-end", "10",
                         "--record-every", "20", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "traj_seed0.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == (["t"] + [f"z_{i}" for i in (1, 2, 3)]
                      + [f"x_{i}" for i in (1, 2, 3)]
                      + [f"xi_{i}" for i in (1, 2, 3)] + ["V"])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["K"] == 1.0 and summary["a"] == 1.0
    assert summary["runs"]["0"]["terminal_v"] is not None


def test_simulate_emit_ternary(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "simulate", "--preset", "shapley",
                         "--dt", "0.05", "--t-end", "5",
                         "--record-every", "10", "--emit-ternary",
                         "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "traj_seed0.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header[-4:] == ["tern1_u", "tern1_v", "tern2_u", "tern2_v"]


def test_game_file_source(tmp_path, capsys):
    path = tmp_path / "game.json"
    save_game(path, preset("two_player_rps", {"l": 5.0}))
    code, out, _ = run_cli(capsys, "classify", "--game", str(path))
    assert code == 0
    assert json.loads(out)["classification"]["mu"] == pytest.approx(2.0)


def test_game_source_validation(tmp_path, capsys):
    path = tmp_path / "game.json"
    save_game(path, preset("shapley"))
    cases = [
        ("classify", "--preset", "rps", "--param", "l=1", "--game", str(path)),
        ("classify",),
        ("classify", "--preset", "rps", "--param", "l"),
        ("classify", "--preset", "rps", "--param", "l=abc"),
        ("classify", "--game", str(path), "--param", "l=1"),
        ("classify", "--game", str(tmp_path / "missing.json")),
        ("classify", "--preset", "nonsense"),
    ]
    for argv in cases:
        code, _, err = run_cli(capsys, *argv)
        assert code == 2, argv
        assert "error:" in err


def test_unknown_scheme_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--preset", "rps", "--param", "l=1",
              "--scheme", "runge"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_malformed_seeds(tmp_path, capsys):
    code, _, err = run_cli(capsys, "simulate", "--preset", "rps",
                           "--param", "l=1", "--seeds", "a,b",
                           "--out", str(tmp_path))
    assert code == 2
    assert "seeds" in err


def test_discrete_scheme(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "simulate", "--preset", "anticoord123",
                         "--scheme", "discrete", "--alpha", "0.1",
                         "--steps", "300", "--record-every", "10",
                         "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["alpha"] == 0.1 and summary["steps"] == 300
    run = summary["runs"]["0"]
    assert run["csv"] == "discrete_seed0.csv"
    assert run["status"] == "converged"
    np.testing.assert_allclose(run["terminal_x"],
                               [0.4071970967, 0.3215972394, 0.2712056639],
                               atol=1e-6)


def test_stochastic_scheme(tmp_path, capsys):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        code, _, _ = run_cli(capsys, "simulate", "--preset", "rps",
                             "--param", "l=1", "--scheme", "stochastic",
                             "--mode", "bandit", "--steps", "200",
                             "--record-every", "20", "--out", str(d))
        assert code == 0
    assert ((dirs[0] / "stoch_seed0.csv").read_bytes()
            == (dirs[1] / "stoch_seed0.csv").read_bytes())
    summary = json.loads((dirs[0] / "summary.json").read_text())
    assert summary["mode"] == "bandit"
    assert summary["runs"]["0"]["status"] == "recorded"
    with open(dirs[0] / "stoch_seed0.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header[-3:] == ["action_own", "action_opp", "payoff"]


def test_bifurcation_cli(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "bifurcation", "--preset", "rps",
                           "--param", "l=8", "--eps-range", "0.5,3.0",
                           "--tol", "1e-4", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["bifurcation"]["status"] == "found"
    assert doc["bifurcation"]["eps_star"] == pytest.approx(7.0 / 6.0, abs=2e-3)
    assert (tmp_path / "bifurcation.json").exists()


def test_bifurcation_usage_errors(capsys):
    base = ("bifurcation", "--preset", "rps", "--param", "l=8")
    for extra in (("--eps-range", "1"), ("--eps-range", "lo,hi"),
                  ("--scheme", "discrete")):
        code, _, err = run_cli(capsys, *base, *extra)
        assert code == 2
        assert "error:" in err


def test_reproduce_passing_example(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "reproduce", "4-l1", "--out", str(tmp_path))
    assert code == 0
    assert "1/1 examples passed" in out
    doc = json.loads((tmp_path / "reproduce.json").read_text())
    assert doc["4-l1"]["passed"] is True
    assert doc["4-l1"]["rows"]


def test_reproduce_failing_example(capsys):
    code, out, _ = run_cli(capsys, "reproduce", "2")
    assert code == 1
    assert "failing: 2" in out


def test_reproduce_unknown_id(capsys):
    code, _, err = run_cli(capsys, "reproduce", "bogus")
    assert code == 2
    assert "error:" in err


def test_reproduce_registry():
    from gamedyn.reproduce import EXAMPLE_IDS

    assert len(EXAMPLE_IDS) == len(set(EXAMPLE_IDS)) == 19
    for example_id in ("1-l1", "1-l8", "2", "3", "4-l5-eps0.5", "5-eps0.1",
                       "7", "8-Abar-eps0.1", "9"):
        assert example_id in EXAMPLE_IDS
