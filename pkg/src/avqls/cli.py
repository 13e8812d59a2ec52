"""Command-line interface: solve, sweep, schedule and verify subcommands.

Exit codes: 0 success, 1 configuration error, 2 solver error, 3 partial
sweep failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy.io

from .config import load_config
from .errors import ConfigError
from .runner import (
    _cell_config,
    aggregate_rows,
    build_system,
    emit_schedule,
    run_single,
    run_sweep,
    summary_row,
    trace_payload,
    write_aggregate,
    write_summary,
    write_trace,
)
from .verify import run_battery

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avqls",
        description="Adiabatic variational linear-system solver (classical emulation)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="per-step logging")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a single configured problem")
    solve.add_argument("config", help="path to a JSON run configuration")
    solve.add_argument("--out", help="output directory (overrides config)")
    solve.add_argument("--seed", type=int, help="master seed (overrides config)")
    solve.add_argument(
        "--dump-system",
        action="store_true",
        help="also write the assembled matrix, rhs and conductivity",
    )

    sweep = sub.add_parser("sweep", help="run the sweep section of a config")
    sweep.add_argument("config", help="path to a JSON run configuration")
    sweep.add_argument("--out", help="output directory (overrides config)")
    sweep.add_argument("--seed", type=int, help="master seed (overrides config)")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")

    sched = sub.add_parser("schedule", help="print a step schedule")
    sched.add_argument("--kappa", type=float, required=True)
    sched.add_argument("--steps", type=int, default=50, metavar="T")
    sched.add_argument("--format", choices=("csv", "json"), default="csv")
    sched.add_argument("--out", help="write to a file instead of stdout")

    sub.add_parser("verify", help="run the built-in invariant battery")
    return parser


def _apply_overrides(config, args):
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "out", None):
        config = replace(config, output=replace(config.output, dir=args.out))
    return config


def _cmd_solve(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out_dir = Path(config.output.dir)
    try:
        result = run_single(config)
    except Exception as exc:
        log.error("solver failed: %s", exc)
        return 2
    if "json" in config.output.formats:
        write_trace(out_dir / "trace.json", trace_payload(config, result))
    if "csv" in config.output.formats:
        write_summary(out_dir / "summary.csv", [summary_row(config, result, config.seed)])
    if args.dump_system:
        _dump_system(config, out_dir)
    print(
        f"t={result.trace.t}/{result.trace.T} kappa={result.system.kappa:.4g} "
        f"cost={result.trace.final_cost:.3e} infidelity={result.report.infidelity:.3e} "
        f"accuracy={result.report.accuracy:.6f}"
    )
    return 0


def _dump_system(config, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    system = build_system(config)
    scipy.io.mmwrite(str(out_dir / "matrix.mtx"), scipy.sparse.csr_matrix(system.a_matrix))
    np.savetxt(out_dir / "rhs.txt", system.b_vector)


def _cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if config.sweep is None:
        raise ConfigError("sweep: section missing from config")
    out_dir = Path(config.output.dir)
    sweep = run_sweep(config, jobs=args.jobs)
    rows = []
    for cell in sweep.cells:
        result = sweep.results.get(cell)
        error = sweep.errors.get(cell, "")
        cell_cfg = _cell_config(config, cell)
        rows.append(summary_row(cell_cfg, result, cell.seed, error=error))
        if result is not None and "json" in config.output.formats:
            payload = trace_payload(cell_cfg, result, seed=config.seed + cell.seed)
            write_trace(out_dir / f"trace_{cell.tag()}.json", payload)
    if "csv" in config.output.formats:
        write_summary(out_dir / "sweep_details.csv", rows)
        write_aggregate(out_dir / "sweep_summary.csv", aggregate_rows(sweep))
    done = len(sweep.results)
    print(f"sweep finished: {done}/{len(sweep.cells)} cells ok")
    return 3 if sweep.any_failed else 0


def _cmd_schedule(args) -> int:
    text = emit_schedule(args.kappa, args.steps, fmt=args.format)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s %(message)s",
    )
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "schedule":
            return _cmd_schedule(args)
        if args.command == "verify":
            return 0 if run_battery() else 2
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
