"""Helpers for reading and validating run configuration"""
import argparse
import configparser
import os
import stat
from pathlib import Path
from typing import Optional, Sequence, Tuple

from ..milp.constants import DEFAULT_BACKEND, DEFAULT_MIP_GAP, DEFAULT_NODE_LIMIT
from ..milp.solvers import SOLVERS, SolverOptions
from ..reports.constants import DEFAULT_FLOAT_FORMAT, DEFAULT_OUT_DIR, DEFAULT_SEED, STRATEGIES
from .exceptions import ConfigurationError
from .logging_utils import get_logger

logger = get_logger(__name__)

COMMANDS = ("run", "day-ahead", "roll", "validate", "plot-data")


def load_config(config_path: str) -> Optional[configparser.ConfigParser]:

    config = configparser.ConfigParser(interpolation=None)
    try:
        config_file = Path(config_path)
        if config_file.exists():
            mode = config_file.stat().st_mode
            if mode & stat.S_IROTH:
                logger.warning(
                    f"Configuration file {config_path} is world-readable. "
                    f"Consider setting permissions to 600: chmod 600 {config_path}"
                )
            elif mode & stat.S_IRGRP:
                logger.warning(
                    f"Configuration file {config_path} is group-readable. "
                    f"Consider setting permissions to 600: chmod 600 {config_path}"
                )

        with open(config_path, "r") as f:
            config.read_file(f)
        logger.info(f"Configuration loaded from {config_path}")
        return config
    except Exception as e:
        logger.error(f"Error loading configuration: {e}")
        return None


def build_parser() -> argparse.ArgumentParser:

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=str, help="Scenario JSON file (default: bundled baseline)")
    common.add_argument("--seed", type=int, help="Seed for the renewable realization")
    common.add_argument("--no-dr", action="store_true", help="Disable demand response (scenario 1 only)")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--config", type=str, help="Path to runtime configuration file (INI format)")
    common.add_argument("--strategy", choices=STRATEGIES, help="Which execution strategies to run")
    common.add_argument("--window-steps", type=int, help="Rolling window length in intra-day steps")

    parser = argparse.ArgumentParser(prog="menroll", description="Two-stage micro-energy network scheduling")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    sub.add_parser("run", parents=[common], help="Full experiment matrix with reports and plot data")
    sub.add_parser("day-ahead", parents=[common], help="Day-ahead schedule only")
    sub.add_parser("roll", parents=[common], help="Day-ahead schedule followed by rolling execution")
    sub.add_parser("validate", parents=[common], help="Lint a scenario file without solving")
    sub.add_parser("plot-data", parents=[common], help="Experiment matrix, plot data only")
    return parser


def _read_number(config_obj: configparser.ConfigParser, section: str, key: str, kind: type, config_file: Optional[str]):
    """INI value as ``int`` or ``float``; a malformed value is a configuration error"""

    getter = config_obj.getint if kind is int else config_obj.getfloat
    try:
        return getter(section, key)
    except ValueError as e:
        raise ConfigurationError(
            f"Setting is not a valid {kind.__name__}",
            details=str(e),
            config_file=config_file,
            setting=f"{section}.{key}",
        ) from e


def apply_config(args: argparse.Namespace, config_obj: Optional[configparser.ConfigParser]) -> argparse.Namespace:
    """Fill unset arguments from the INI file, then defaults, then the environment"""

    args.backend = None
    args.time_limit = None
    args.mip_gap = None
    args.node_limit = None
    args.execute_steps = None
    args.float_format = None

    if config_obj:
        if config_obj.has_section("solver"):
            section = config_obj["solver"]
            if "backend" in section:
                args.backend = section["backend"].strip()
            if "time_limit" in section:
                args.time_limit = _read_number(config_obj, "solver", "time_limit", float, args.config)
            if "mip_gap" in section:
                args.mip_gap = _read_number(config_obj, "solver", "mip_gap", float, args.config)
            if "node_limit" in section:
                args.node_limit = _read_number(config_obj, "solver", "node_limit", int, args.config)
        if config_obj.has_section("rolling"):
            if args.window_steps is None and "window_steps" in config_obj["rolling"]:
                args.window_steps = _read_number(config_obj, "rolling", "window_steps", int, args.config)
            if "execute_steps" in config_obj["rolling"]:
                args.execute_steps = _read_number(config_obj, "rolling", "execute_steps", int, args.config)
        if config_obj.has_section("output"):
            if "float_format" in config_obj["output"]:
                args.float_format = config_obj.get("output", "float_format")
            if not args.out and "dir" in config_obj["output"]:
                args.out = config_obj["output"]["dir"]
        if config_obj.has_section("run"):
            if args.seed is None and "seed" in config_obj["run"]:
                args.seed = _read_number(config_obj, "run", "seed", int, args.config)
            if not args.scenario and "scenario" in config_obj["run"]:
                args.scenario = config_obj["run"]["scenario"]

    # Set defaults
    if args.seed is None:
        args.seed = DEFAULT_SEED
    if not args.out:
        args.out = DEFAULT_OUT_DIR
    if not args.strategy:
        args.strategy = "both"
    if not args.backend:
        args.backend = DEFAULT_BACKEND
    if args.mip_gap is None:
        args.mip_gap = DEFAULT_MIP_GAP
    if args.node_limit is None:
        args.node_limit = DEFAULT_NODE_LIMIT
    if not args.float_format:
        args.float_format = DEFAULT_FLOAT_FORMAT

    # Apply environment overrides
    env_solver = os.getenv("MENROLL_SOLVER")
    if env_solver:
        args.backend = env_solver.strip()

    return args


def parse_args(argv: Optional[Sequence[str]] = None) -> Tuple[argparse.Namespace, Optional[configparser.ConfigParser]]:

    args = build_parser().parse_args(argv)
    config_obj = None
    if args.config:
        config_obj = load_config(args.config)
        if config_obj is None:
            raise ConfigurationError("Configuration file could not be read", config_file=args.config)
    return apply_config(args, config_obj), config_obj


def validate_run_config(args: argparse.Namespace, config_obj: Optional[configparser.ConfigParser] = None) -> None:
    """Validate the run configuration arguments"""

    if args.command not in COMMANDS:
        raise ConfigurationError(f"Unknown command '{args.command}'")
    if args.backend not in SOLVERS:
        raise ConfigurationError(
            f"Solver backend must be one of {', '.join(sorted(SOLVERS))}",
            config_file=args.config,
            setting="solver.backend",
        )
    if args.time_limit is not None and args.time_limit <= 0:
        raise ConfigurationError("Time limit must be positive", config_file=args.config, setting="solver.time_limit")
    if not 0 <= args.mip_gap < 1:
        raise ConfigurationError("MIP gap must lie in [0, 1)", config_file=args.config, setting="solver.mip_gap")
    if args.node_limit <= 0:
        raise ConfigurationError("Node limit must be positive", config_file=args.config, setting="solver.node_limit")
    if args.seed < 0:
        raise ConfigurationError("Seed must be nonnegative", setting="seed")
    if args.window_steps is not None and args.window_steps <= 0:
        raise ConfigurationError("Window length must be positive", setting="rolling.window_steps")
    if args.window_steps is not None and args.execute_steps is not None and args.execute_steps > args.window_steps:
        raise ConfigurationError("Window must be at least as long as the executed part", setting="rolling.execute_steps")
    try:
        args.float_format % 1.0
    except (TypeError, ValueError):
        raise ConfigurationError(
            "Float format must contain exactly one numeric conversion",
            config_file=args.config,
            setting="output.float_format",
        ) from None

    if config_obj:
        for section in ("solver", "output"):
            if not config_obj.has_section(section):
                logger.warning(f"Configuration file does not contain [{section}] section. Using default values.")


def solver_options_from_args(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        backend=args.backend,
        time_limit=args.time_limit,
        mip_gap=args.mip_gap,
        node_limit=args.node_limit,
    )

