"""Command line entry point: ``lloydlab <experiment> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, parse_config
from .dos import InsufficientDecay, QuadratureError
from .experiments import PIPELINES
from .lattice import NoValidPartition, SiteBudgetError
from .results import PLOT_KINDS, ResultTable, emit_plot_data, write_table
from .spectra import ConvergenceError

log = logging.getLogger("lloydlab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

NUMERIC_ERRORS = (ConvergenceError, QuadratureError, InsufficientDecay,
                  np.linalg.LinAlgError, FloatingPointError)


def run_experiment(config: ExperimentConfig | dict, write: bool = True) -> ResultTable:
    """Run one experiment and (by default) persist it under ``config.output.dir``."""
    cfg = config if isinstance(config, ExperimentConfig) else parse_config(config)
    table = PIPELINES[cfg.experiment](cfg)
    if write:
        out = Path(cfg.output.dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc}") from None
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        table.provenance["workers"] = cfg.mc.workers
        write_table(table, out)
    return table


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    data = cfg.model_dump(by_alias=True)
    if args.seed is not None:
        data["mc"]["seed"] = args.seed
    if args.random_seed:
        data["mc"]["seed"] = secrets.randbits(63)
    if args.workers is not None:
        data["mc"]["workers"] = args.workers
    if args.out is not None:
        data["output"]["dir"] = args.out
    return parse_config(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lloydlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=int, default=None, help="master seed (u64)")
        p.add_argument("--random-seed", action="store_true",
                       help="draw a fresh seed from the OS; it is recorded in provenance")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--plot", choices=sorted(PLOT_KINDS), default=None,
                       help="also emit plot-ready columns of this kind")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(f"config declares experiment {cfg.experiment!r} "
                              f"but subcommand is {args.command!r}")
        cfg = _apply_overrides(cfg, args)
        table = run_experiment(cfg)
        if args.plot:
            emit_plot_data(table, args.plot, Path(cfg.output.dir) / f"{table.name}.{args.plot}.dat")
    except (ConfigError, SiteBudgetError, NoValidPartition) as exc:
        print(f"lloydlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"lloydlab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("wrote %s rows to %s", len(table.rows), cfg.output.dir)
    return EXIT_OK
