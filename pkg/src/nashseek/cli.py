"""Command-line front end: ``run``, ``check``, ``solve-ne`` and ``stats``.

Exit codes: 0 ok, 1 config or input error, 2 numerical failure,
3 gain condition not satisfied (``check`` only).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, config as cfg
from .conditions import check_corollary1, check_theorem1, check_theorem2, check_theorem3, governing_check
from .engine import read_events_csv, run, write_events_csv, write_trajectory_csv
from .errors import (ConfigError, DimensionMismatch, DisconnectedGraph, InvalidGraph, MonotonicityViolated,
                     NonConvexDetected, NoConvergence, NumericalBlowup, TriggerInvariantError)
from .game import best_response_ne, ne_residuals, solve_ne
from .graph import constants as graph_constants
from .scheduler import event_stats, format_stats

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CONDITION = 0, 1, 2, 3

INPUT_ERRORS = (ConfigError, DisconnectedGraph, InvalidGraph, DimensionMismatch, NonConvexDetected,
                MonotonicityViolated)
NUMERIC_ERRORS = (NumericalBlowup, NoConvergence, TriggerInvariantError)

STATS_BEGIN = "--- event statistics ---"
STATS_END = "--- end event statistics ---"

DEFAULT_OUTPUTS = {"trajectory_path": "trajectory.csv", "events_path": "events.csv", "report_path": "report.txt"}


def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{a:.8f}" for a in np.asarray(v).reshape(-1)) + "]"


def _source(args) -> str:
    src = args.config or args.preset
    if src is None:
        raise ConfigError("give a config path or --preset")
    if args.config and args.preset:
        raise ConfigError("give either a config path or --preset, not both")
    return src


def _scheme_line(scheme) -> str:
    v = scheme.variant.value
    if v == "periodic":
        return f"periodic (delta={scheme.delta:g})"
    if v == "event":
        return f"event (b={scheme.b:g}, rho={scheme.rho:g})"
    return v


def _solve(setup, max_iter=None):
    o = setup.oracle
    return solve_ne(setup.game, setup.x0, step=o.get("step", 0.1), tol=o.get("tol", 1e-10),
                    max_iter=max_iter or o.get("max_iter", 100_000))


def cmd_run(args) -> int:
    doc = cfg.load(_source(args), args.scheme)
    setup = cfg.setup(doc)
    out_dir = Path(args.out_dir)
    outputs = {**DEFAULT_OUTPUTS, **setup.outputs}
    paths = {k: out_dir / v for k, v in outputs.items()}
    # everything that can reject the input happens before any file is touched
    gc = graph_constants(setup.graph, setup.game.dim)
    reg = cfg.regularity_from(setup.regularity_spec, setup.game, setup.x0)
    report = governing_check(setup.scheme.variant.value, setup.params, gc, reg)
    x_star = _solve(setup)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = run(setup.sim, setup.game, setup.graph, setup.x0, x_star, v0=setup.v0, estimates=setup.estimates)

    stats_block = format_stats(event_stats(traj.events))
    lines = [
        f"nashseek {__version__} run report",
        f"scheme: {_scheme_line(setup.scheme)}",
        f"gains: k={setup.params.k:g}, alpha={setup.params.alpha:g}",
        f"integration: {setup.sim.integrator}, dt={setup.sim.dt:g}, t_end={setup.sim.t_end:g}",
        f"x* (fixed-point oracle): {_fmt_vec(x_star)}",
        f"x(T): {_fmt_vec(traj.final_x)}",
        f"final NE error ||x(T)-x*||: {traj.err_ne[-1]:.6e}",
        f"final consensus error: {traj.err_consensus[-1]:.6e}",
        f"final Lyapunov V: {traj.V[-1]:.6e}",
        f"first time ||x-x*|| <= 0.5: {traj.first_time_below(0.5)}",
        STATS_BEGIN,
        stats_block,
        STATS_END,
        f"regularity: {reg.describe()}",
        report.format(),
    ]
    if not report.satisfied:
        lines.append("note: the governing gain condition fails; convergence is not guaranteed")
    if traj.zeno_D is not None:
        lines.append("trajectory-estimated D per agent: " + _fmt_vec(traj.zeno_D))
    text = "\n".join(lines) + "\n"

    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, paths["trajectory_path"])
    write_events_csv(traj.events, paths["events_path"])
    paths["report_path"].write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_check(args) -> int:
    doc = cfg.load(_source(args), args.scheme)
    setup = cfg.setup(doc)
    gc = graph_constants(setup.graph, setup.game.dim)
    reg = cfg.regularity_from(setup.regularity_spec, setup.game, setup.x0)
    print(f"regularity: {reg.describe()}")
    print(f"graph: lambda2={gc.lambda2:.6f}, ||L||={gc.lap_norm:.6f}, ||RL||={gc.rl_norm:.6f}, "
          f"||S^T S L||={gc.stsl_norm:.6f}, directed={gc.directed}")
    first = check_corollary1(setup.params, gc, reg) if gc.directed else check_theorem1(setup.params, gc, reg)
    for rep in (first, check_theorem2(setup.params, gc, reg), check_theorem3(setup.params, gc, reg)):
        print(rep.format())
    gov = governing_check(setup.scheme.variant.value, setup.params, gc, reg)
    print(f"governing theorem for scheme '{setup.scheme.variant.value}': {gov.theorem.value} "
          f"({'satisfied' if gov.satisfied else 'not satisfied'})")
    return EXIT_OK if gov.satisfied else EXIT_CONDITION


def cmd_solve_ne(args) -> int:
    doc = cfg.load(_source(args))
    setup = cfg.setup(doc)
    game = setup.game
    x_fp = _solve(setup, args.max_iter)
    x_br = best_response_ne(game, setup.x0, max_sweeps=args.max_iter or 10_000)
    gap = float(np.linalg.norm(x_fp - x_br))
    print(f"x* (fixed-point):   {_fmt_vec(x_fp)}")
    print(f"x* (best-response): {_fmt_vec(x_br)}")
    print(f"residuals (fixed-point):   {_fmt_vec(ne_residuals(game, x_fp))}")
    print(f"residuals (best-response): {_fmt_vec(ne_residuals(game, x_br))}")
    print(f"agreement gap: {gap:.3e}")
    return EXIT_OK if gap <= 1e-5 else EXIT_NUMERIC


def cmd_stats(args) -> int:
    try:
        log = read_events_csv(args.events)
    except FileNotFoundError:
        raise ConfigError(f"events file not found: {args.events}") from None
    except ValueError as exc:
        raise ConfigError(f"malformed events file: {exc}") from None
    print(format_stats(event_stats(log, n_agents=args.n_agents)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nashseek", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, scheme=True):
        sp.add_argument("config", nargs="?", help="JSON config file or preset name")
        sp.add_argument("--preset", choices=sorted(cfg.PRESETS))
        if scheme:
            sp.add_argument("--scheme", choices=["continuous", "periodic", "event"],
                            help="override the configured communication scheme")

    sp = sub.add_parser("run", help="simulate and write trajectory/events CSV plus a report")
    with_config(sp)
    sp.add_argument("--out-dir", default=".")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="evaluate the gain conditions")
    with_config(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("solve-ne", help="compute the equilibrium with both oracles")
    with_config(sp, scheme=False)
    sp.add_argument("--max-iter", type=int, default=None, help="iteration cap for both oracles")
    sp.set_defaults(func=cmd_solve_ne)

    sp = sub.add_parser("stats", help="per-agent event statistics from an events CSV")
    sp.add_argument("events")
    sp.add_argument("--n-agents", type=int, default=None, help="include agents with no events")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
