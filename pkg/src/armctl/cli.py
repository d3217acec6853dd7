"""Command-line interface: kinematics queries, gain-table precomputation,
simulation, and controller latency benchmarking.

Exit codes: 0 success; 2 usage or config errors; 3 unreachable IK target;
4 gain-table node failure; 5 table digest mismatch; 6 simulation aborted
mid-run (out of table bounds, solver failure, degenerate inertia).
All angles are radians; results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ArmConfig, load_config
from .errors import (
    ArmError,
    ConfigError,
    DegenerateInertia,
    DigestMismatch,
    NodeFailure,
    NotStabilizable,
    OutOfBounds,
    SingularYaw,
    Unreachable,
)
from .gain_table import load_file, precompute, refine, save_file, table_digest
from .kinematics import JointAngles, fk_spatial, ik
from .simulator import ControllerMode, simulate, bench_controller

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREACHABLE = 3
EXIT_NODE_FAILURE = 4
EXIT_DIGEST = 5
EXIT_ABORTED = 6


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _point(p) -> str:
    return "(" + ", ".join(_fmt(c) for c in p) + ")"


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _grid_center(config: ArmConfig) -> np.ndarray:
    lo = np.asarray(config.grid.lo)
    hi = np.asarray(config.grid.hi)
    return 0.5 * (lo + hi)


def cmd_fk(config: ArmConfig, args) -> int:
    angles = JointAngles(*args.angles)
    points = fk_spatial(config.geometry, angles)
    for i, p in enumerate(points, start=1):
        print(f"P{i} = {_point(p)}")
    return EXIT_OK


def cmd_ik(config: ArmConfig, args) -> int:
    angles = ik(config.geometry, (args.x, args.y, args.z), pitch=args.pitch)
    print(f"theta = {_point(tuple(angles))}")
    return EXIT_OK


def cmd_precompute(config: ArmConfig, args) -> int:
    if args.refine is not None:
        table = refine(
            config.geometry,
            config.masses,
            config.weights,
            (config.grid.lo, config.grid.hi),
            args.refine,
            args.max_depth,
        )
        leaves = table.leaves()
        flagged = table.flagged_leaves()
        save_file(table, args.out)
        print(f"leaves: {len(leaves)}")
        print(f"flagged: {len(flagged)}")
        for cell in flagged:
            print(f"  unrefinable cell lo={cell.lo} hi={cell.hi}", file=sys.stderr)
    else:
        table = precompute(
            config.geometry, config.masses, config.weights, config.grid,
            workers=args.workers,
        )
        save_file(table, args.out)
        print(f"nodes: {table.grid.n_nodes}")
    return EXIT_OK


def _parse_state(config: ArmConfig, args):
    if args.x0 is not None:
        x0 = np.asarray(args.x0, dtype=float)
    else:
        x0 = np.concatenate([_grid_center(config), np.zeros(4)])
    if args.ref is not None:
        x_ref = np.concatenate([np.asarray(args.ref, dtype=float), np.zeros(4)])
    else:
        x_ref = np.concatenate([x0[:4], np.zeros(4)])
    return x0, x_ref


def cmd_simulate(config: ArmConfig, args) -> int:
    mode = ControllerMode(args.mode)
    table = None
    if mode is ControllerMode.TABLE_LQR:
        if args.table is None:
            print("error: --table is required for table mode", file=sys.stderr)
            return EXIT_USAGE
        expected = table_digest(config.geometry, config.masses, config.weights)
        table = load_file(args.table, expect_digest=expected)
    x0, x_ref = _parse_state(config, args)

    try:
        trajectory = simulate(
            config.geometry, config.masses, config.sim, mode, x0, x_ref,
            weights=config.weights, table=table,
        )
    except (OutOfBounds, NotStabilizable, DegenerateInertia) as exc:
        with open(args.out, "w", encoding="utf-8") as f:
            exc.partial.to_csv(f)
            f.write(f"# aborted: {exc}\n")
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    with open(args.out, "w", encoding="utf-8") as f:
        trajectory.to_csv(f)
    print(f"samples: {trajectory.times.size}")
    return EXIT_OK


def cmd_bench(config: ArmConfig, args) -> int:
    expected = table_digest(config.geometry, config.masses, config.weights)
    table = load_file(args.table, expect_digest=expected)
    report = bench_controller(
        config.geometry, config.masses, table, args.iters, weights=config.weights,
    )
    print(f"online_median_us: {report.online_median_us:.3f}")
    print(f"online_p95_us: {report.online_p95_us:.3f}")
    print(f"lookup_median_us: {report.lookup_median_us:.3f}")
    print(f"lookup_p95_us: {report.lookup_p95_us:.3f}")
    print(f"speedup: {report.speedup:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armctl",
        description="Four-axis arm control: kinematics, LQR gain tables, simulation.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON arm config")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", help="forward kinematics: print world joint positions")
    p.add_argument("angles", nargs=4, type=float, metavar="THETA",
                   help="joint angles theta1..theta4 (rad)")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("ik", help="inverse kinematics for a world target")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    p.add_argument("z", type=float)
    p.add_argument("--pitch", type=float, default=0.0,
                   help="tool pitch theta2+theta3+theta4 in the joint plane (rad)")
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("precompute", help="build and save a gain table")
    p.add_argument("--out", required=True, help="output table file")
    p.add_argument("--refine", type=float, default=None, metavar="TOL",
                   help="build an error-driven refined table with this tolerance")
    p.add_argument("--max-depth", type=int, default=6, dest="max_depth")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("simulate", help="run a simulation and write a CSV trajectory")
    p.add_argument("--mode", required=True, choices=[m.value for m in ControllerMode])
    p.add_argument("--table", default=None, help="gain table file (table mode)")
    p.add_argument("--out", required=True, help="output CSV file")
    p.add_argument("--x0", nargs=8, type=float, default=None, metavar="V",
                   help="initial state theta1..4 w1..4 (default: grid center, at rest)")
    p.add_argument("--ref", nargs=4, type=float, default=None, metavar="THETA",
                   help="reference angles (default: the x0 angles)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="latency: online LQR step vs table lookup")
    p.add_argument("--table", required=True)
    p.add_argument("--iters", type=_positive_int, default=1000)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(config, args)
    except (Unreachable, SingularYaw) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except NodeFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NODE_FAILURE
    except DigestMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIGEST
    except ArmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
