"""Command-line front end.

Verbs: classify, solve, simulate, bifurcation, reproduce, list-games.
Games come from --preset NAME (with repeatable --param k=v) or from a JSON
file via --game.  The output directory is --out, overridden by the
GAMEDYN_OUT environment variable when set.  Exit codes: 0 success, 1 failed
reproduce checks, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .analysis import (bifurcation_epsilon, classify, composite_lyapunov_trace,
                       convergence_report, lyapunov_trace, rest_point,
                       storage_matrix)
from .dynamics import (FeedbackBlock, IntegrationDivergedError, LearningParams,
                       Trajectory, harmonic_schedule, run_discrete,
                       run_stochastic, seeded_initial_scores,
                       simulate_first_order, simulate_higher_order,
                       write_stochastic_csv, write_trajectory_csv)
from .errors import ConfigurationError, DomainError, UsageError
from .games import GameSpec, load_game
from .presets import available_presets, preset
from .reproduce import EXAMPLE_IDS, format_report, run_example

SCHEMES = ("first-order", "higher-order", "discrete", "stochastic")


def _add_game_options(sub):
    sub.add_argument("--preset", help="preset game name (see list-games)")
    sub.add_argument("--param", action="append", default=[], metavar="K=V",
                     help="preset parameter, repeatable")
    sub.add_argument("--game", help="path to a JSON game file")


def _add_out_option(sub):
    sub.add_argument("--out", help="output directory (env GAMEDYN_OUT overrides)")


def _build_game(args) -> GameSpec:
    if bool(args.preset) == bool(args.game):
        raise UsageError("specify exactly one of --preset or --game")
    if args.game:
        if args.param:
            raise UsageError("--param only applies to --preset games")
        return load_game(args.game)
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"malformed --param {item!r}, expected k=v")
        try:
            params[key] = float(value)
        except ValueError:
            raise UsageError(f"parameter {key!r} has non-numeric value {value!r}")
    return preset(args.preset, params)


def _out_dir(args) -> str | None:
    env = os.environ.get("GAMEDYN_OUT")
    path = env if env else args.out
    if path:
        os.makedirs(path, exist_ok=True)
    return path or None


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise UsageError(f"malformed --seeds {text!r}, expected comma-separated integers")
    if not seeds:
        raise UsageError("at least one seed is required")
    return seeds


def _emit_json(doc: dict, out_dir: str | None, filename: str) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if out_dir is not None:
        with open(os.path.join(out_dir, filename), "w") as fh:
            fh.write(text + "\n")


def _game_doc(game: GameSpec) -> dict:
    return {"name": game.name or "unnamed",
            "players": game.player_count,
            "action_counts": list(game.action_counts)}


def _cmd_list_games(args) -> int:
    for name in available_presets():
        print(name)
    return 0


def _cmd_classify(args) -> int:
    game = _build_game(args)
    report = classify(game)
    doc = {"game": _game_doc(game), "classification": report.to_dict()}
    _emit_json(doc, _out_dir(args), "classify.json")
    return 0


def _cmd_solve(args) -> int:
    game = _build_game(args)
    result = rest_point(game, args.eps)
    doc = {"game": _game_doc(game), "rest_point": result.to_dict()}
    _emit_json(doc, _out_dir(args), "solve.json")
    return 0


def _cmd_bifurcation(args) -> int:
    game = _build_game(args)
    if args.scheme not in ("first-order", "higher-order"):
        raise UsageError("bifurcation supports first-order or higher-order schemes")
    block = None
    if args.scheme == "higher-order":
        block = FeedbackBlock.high_pass(args.K, args.a, game.action_counts)
    parts = args.eps_range.split(",")
    if len(parts) != 2:
        raise UsageError(f"malformed --eps-range {args.eps_range!r}, expected LO,HI")
    try:
        eps_range = (float(parts[0]), float(parts[1]))
    except ValueError:
        raise UsageError(f"malformed --eps-range {args.eps_range!r}")
    result = bifurcation_epsilon(game, LearningParams(args.gamma, 1.0),
                                 block=block, eps_range=eps_range, tol=args.tol)
    doc = {"game": _game_doc(game), "scheme": args.scheme,
           "bifurcation": result.to_dict()}
    _emit_json(doc, _out_dir(args), "bifurcation.json")
    return 0


def _verdict(traj, x_star) -> str:
    # too few recorded samples for the tail-window analysis is not a usage
    # error at this level; the trajectory files are still written
    try:
        return convergence_report(traj, x_star=x_star).status
    except UsageError:
        return "recorded"


def _ode_run(game, args, seed, block):
    params = LearningParams(gamma=args.gamma, eps=args.eps)
    z0 = seeded_initial_scores(game.total_actions, seed)
    if block is not None:
        return simulate_higher_order(game, params, block, z0, dt=args.dt,
                                     t_end=args.t_end,
                                     record_every=args.record_every)
    return simulate_first_order(game, params, z0, dt=args.dt, t_end=args.t_end,
                                record_every=args.record_every)


def _cmd_simulate(args) -> int:
    game = _build_game(args)
    out_dir = _out_dir(args)
    if out_dir is None:
        raise UsageError("simulate needs an output directory (--out or GAMEDYN_OUT)")
    if args.scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {args.scheme!r}; choose from {SCHEMES}")
    seeds = _parse_seeds(args.seeds)
    params = LearningParams(gamma=args.gamma, eps=args.eps)

    solved = rest_point(game, args.eps)
    x_star = solved.x_star if solved.converged else None
    block = None
    p_mat = None
    xi_star = None
    if args.scheme == "higher-order":
        block = FeedbackBlock.high_pass(args.K, args.a, game.action_counts)
        p_mat = storage_matrix(block)
        if x_star is not None:
            xi_star = block.equilibrium_filter_state(x_star)

    summary = {"game": _game_doc(game), "scheme": args.scheme,
               "eps": args.eps, "gamma": args.gamma, "seeds": seeds,
               "rest_point": solved.to_dict() if solved.converged else None,
               "runs": {}}
    if args.scheme in ("first-order", "higher-order"):
        summary.update({"dt": args.dt, "t_end": args.t_end,
                        "record_every": args.record_every})
    if args.scheme == "higher-order":
        summary.update({"K": args.K, "a": args.a})
    if args.scheme == "discrete":
        summary.update({"alpha": args.alpha, "steps": args.steps})
    if args.scheme == "stochastic":
        summary.update({"mode": args.mode, "steps": args.steps})

    for seed in seeds:
        run: dict = {}
        csv_name = f"traj_seed{seed}.csv"
        if args.scheme in ("first-order", "higher-order"):
            try:
                traj = _ode_run(game, args, seed, block)
            except IntegrationDivergedError as err:
                run = {"status": "diverged",
                       "last_good_time": err.last_good_time,
                       "terminal_x": None, "terminal_v": None}
                summary["runs"][str(seed)] = run
                continue
            if solved.converged:
                if block is None:
                    values, _ = lyapunov_trace(traj, solved.z_star, args.eps,
                                               game.action_counts)
                else:
                    values, _ = composite_lyapunov_trace(
                        traj, solved.z_star, xi_star, args.eps, block,
                        game.action_counts, gamma=args.gamma, p_mat=p_mat)
                traj = Trajectory(traj.times, traj.states, traj.strategies,
                                  lyapunov=values)
            write_trajectory_csv(os.path.join(out_dir, csv_name), traj,
                                 game.action_counts, ternary=args.emit_ternary)
            run = {"status": _verdict(traj, x_star),
                   "terminal_x": [float(v) for v in traj.strategies[-1]],
                   "terminal_v": (float(traj.lyapunov[-1])
                                  if traj.lyapunov is not None else None),
                   "csv": csv_name}
        elif args.scheme == "discrete":
            ks, zs, xs = run_discrete(game, params,
                                      seeded_initial_scores(game.total_actions, seed),
                                      alpha=args.alpha, steps=args.steps,
                                      record_every=args.record_every)
            csv_name = f"discrete_seed{seed}.csv"
            traj = Trajectory(np.asarray(ks, dtype=float), zs, xs)
            write_trajectory_csv(os.path.join(out_dir, csv_name), traj,
                                 game.action_counts, ternary=args.emit_ternary)
            run = {"status": _verdict(traj, x_star),
                   "terminal_x": [float(v) for v in xs[-1]],
                   "terminal_v": None, "csv": csv_name}
        else:
            record = run_stochastic(game, params,
                                    seeded_initial_scores(game.total_actions, seed),
                                    steps=args.steps,
                                    rng=np.random.default_rng(seed),
                                    mode=args.mode,
                                    alpha_schedule=harmonic_schedule,
                                    record_every=args.record_every)
            csv_name = f"stoch_seed{seed}.csv"
            write_stochastic_csv(os.path.join(out_dir, csv_name), record,
                                 game.action_counts, matching=game.matching)
            run = {"status": "recorded",
                   "terminal_x": [float(v) for v in record["x"][-1]],
                   "terminal_v": None, "csv": csv_name}
        summary["runs"][str(seed)] = run

    _emit_json(summary, out_dir, "summary.json")
    return 0


def _cmd_reproduce(args) -> int:
    ids = list(EXAMPLE_IDS) if args.example == "all" else [args.example]
    out_dir = _out_dir(args)
    reports = [run_example(example_id, out_dir=out_dir) for example_id in ids]
    for report in reports:
        print(format_report(report))
        print()
    failed = [r.example_id for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} examples passed"
          + (f"; failing: {', '.join(failed)}" if failed else ""))
    if out_dir is not None:
        doc = {r.example_id: {"passed": r.passed,
                              "rows": [vars(row) for row in r.rows]}
               for r in reports}
        with open(os.path.join(out_dir, "reproduce.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamedyn",
        description="Score-based learning dynamics in finite games: "
                    "classification, rest points, simulation, bifurcations.")
    subs = parser.add_subparsers(dest="verb", required=True)

    subs.add_parser("list-games", help="list preset games")

    sub = subs.add_parser("classify", help="monotonicity classification")
    _add_game_options(sub)
    _add_out_option(sub)

    sub = subs.add_parser("solve", help="solve for the rest point")
    _add_game_options(sub)
    _add_out_option(sub)
    sub.add_argument("--eps", type=float, default=1.0, help="temperature")

    sub = subs.add_parser("simulate", help="integrate learning dynamics")
    _add_game_options(sub)
    _add_out_option(sub)
    sub.add_argument("--scheme", default="first-order", choices=SCHEMES)
    sub.add_argument("--eps", type=float, default=1.0)
    sub.add_argument("--gamma", type=float, default=1.0)
    sub.add_argument("--K", type=float, default=1.0, help="filter gain")
    sub.add_argument("--a", type=float, default=1.0, help="filter cutoff")
    sub.add_argument("--dt", type=float, default=0.01)
    sub.add_argument("--t-end", type=float, default=500.0)
    sub.add_argument("--record-every", type=int, default=10)
    sub.add_argument("--seeds", default="0", help="comma-separated seed list")
    sub.add_argument("--alpha", type=float, default=0.05,
                     help="discrete-scheme step size")
    sub.add_argument("--steps", type=int, default=10000,
                     help="discrete/stochastic iteration count")
    sub.add_argument("--mode", default="full-info",
                     choices=("full-info", "bandit"),
                     help="stochastic payoff estimator")
    sub.add_argument("--emit-ternary", action="store_true",
                     help="add 2-simplex projection columns for 3-action players")

    sub = subs.add_parser("bifurcation", help="locate the stability threshold in eps")
    _add_game_options(sub)
    _add_out_option(sub)
    sub.add_argument("--scheme", default="first-order")
    sub.add_argument("--gamma", type=float, default=1.0)
    sub.add_argument("--K", type=float, default=1.0)
    sub.add_argument("--a", type=float, default=1.0)
    sub.add_argument("--eps-range", default="0.05,5.0")
    sub.add_argument("--tol", type=float, default=1e-4)

    sub = subs.add_parser("reproduce", help="run built-in scenario checks")
    sub.add_argument("example", help=f"scenario id or 'all'; ids: {', '.join(EXAMPLE_IDS)}")
    _add_out_option(sub)

    return parser


_COMMANDS = {
    "list-games": _cmd_list_games,
    "classify": _cmd_classify,
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "bifurcation": _cmd_bifurcation,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except (UsageError, DomainError, ConfigurationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
