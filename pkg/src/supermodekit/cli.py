"""Command-line front end.

Subcommands ``kernel``, ``transverse`` and ``cluster`` run one TOML config;
``figures`` runs every shipped figure config into ``<out>/<name>/``.
Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import runs
from .config import ConfigError, GridOptions, RunConfig, load_config, parse_config
from .numerics import InvalidArgument
from .transverse import SingularSystem

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMMAND_EXPERIMENTS = {
    "kernel": ("modulated-kernel", "spopo"),
    "transverse": ("transverse-sweep",),
    "cluster": ("cluster-synthesis", "ghz"),
}

RUNNERS = {
    "modulated-kernel": runs.run_kernel,
    "spopo": runs.run_kernel,
    "transverse-sweep": runs.run_transverse,
    "cluster-synthesis": runs.run_cluster,
    "ghz": runs.run_cluster,
}

FIGURE_CONFIGS = ("fig1a", "fig1c", "fig2-1ps", "fig2-100fs", "fig3", "fig4", "ring4", "complete5", "ghz5")

log = logging.getLogger("supermodekit")


def shipped_config(name: str) -> str:
    return resources.files("supermodekit").joinpath("configs", f"{name}.toml").read_text()


def _with_grid(cfg: RunConfig, grid_n: int | None) -> RunConfig:
    if grid_n is None:
        return cfg
    if grid_n < 2:
        raise ConfigError("--grid-n must be at least 2")
    return cfg.model_copy(update={"grid": GridOptions(n=grid_n, x_max=cfg.grid.x_max)})


def execute(cfg: RunConfig, out: Path) -> list[Path]:
    """Run one validated config; returns the files written."""
    with np.errstate(all="ignore"):
        return RUNNERS[cfg.experiment](cfg, out)


def _run_one(command: str, args) -> int:
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = _with_grid(load_config(args.config), args.grid_n)
    if cfg.experiment not in COMMAND_EXPERIMENTS[command]:
        allowed = ", ".join(COMMAND_EXPERIMENTS[command])
        raise ConfigError(f"{args.config}: experiment {cfg.experiment!r} does not belong to '{command}' (expected {allowed})")
    out = Path(args.out or cfg.out or ".")
    for path in execute(cfg, out):
        log.info("wrote %s", path)
    return EXIT_OK


def _run_figures(args) -> int:
    out = Path(args.out or "figures")
    for name in FIGURE_CONFIGS:
        cfg = _with_grid(parse_config(shipped_config(name), f"<shipped {name}>"), args.grid_n)
        log.info("running %s (%s)", name, cfg.experiment)
        for path in execute(cfg, out / name):
            log.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supermodekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("kernel", "build a kernel, solve for supermodes, compare with closed forms"),
        ("transverse", "sweep pump spot size for Laguerre-Gauss families"),
        ("cluster", "synthesize a pump for a coupling matrix and report GHZ diagnostics"),
        ("figures", "run every shipped figure config"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="TOML run configuration" if name != "figures" else argparse.SUPPRESS)
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--grid-n", type=int, metavar="INT", help="override the number of grid points")
        p.add_argument("--seedless", action="store_true", help="accepted for compatibility; every algorithm is deterministic")
        p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "figures":
            return _run_figures(args)
        return _run_one(args.command, args)
    except (ConfigError, InvalidArgument) as exc:
        # domain validation of values that passed the schema is still a config problem
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (runs.NumericalError, SingularSystem, ZeroDivisionError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
