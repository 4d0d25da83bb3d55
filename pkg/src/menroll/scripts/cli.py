#!/usr/bin/env python3
"""
Entry point for the menroll command-line tool
"""
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from menroll.core.config import parse_args, solver_options_from_args, validate_run_config
from menroll.core.exceptions import (
    AlignmentError,
    ConfigurationError,
    InfeasibleError,
    MenrollError,
    ValidationError,
)
from menroll.core.logging_utils import get_logger, sanitize_for_logging
from menroll.dispatch.day_ahead import solve_with_repair
from menroll.reports.constants import (
    ERROR_FILE,
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_INTERNAL,
    EXIT_OK,
    MANIFEST_FILE,
)
from menroll.reports.experiment import RunManifest, run_experiment, scenario_label
from menroll.reports.plot_data import emit_plot_data
from menroll.reports.writer import OutputWriter
from menroll.scenario.scenario_config import ScenarioConfig, lint_scenario, load_baseline, load_scenario

logger = get_logger("menroll")


def _load(path: Optional[str]) -> ScenarioConfig:
    return load_scenario(path) if path else load_baseline()


def _validate(args) -> int:
    if not args.scenario:
        _load(None)
        print("baseline: ok")
        return EXIT_OK
    try:
        raw = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError("Cannot read scenario", details=str(e), config_file=args.scenario) from e
    issues = lint_scenario(raw)
    for issue in issues:
        print(f"{args.scenario}: {issue}")
    if issues:
        logger.error(f"Scenario has {len(issues)} issue(s)")
        return EXIT_CONFIG
    print(f"{args.scenario}: ok")
    return EXIT_OK


async def async_main(argv: Optional[Sequence[str]] = None) -> int:

    args, config_obj = parse_args(argv)
    validate_run_config(args, config_obj)

    if args.command == "validate":
        return _validate(args)

    cfg = _load(args.scenario)
    options = solver_options_from_args(args)
    strategy = "rolling-only" if args.command == "roll" else args.strategy
    manifest = RunManifest.create(
        scenario_path=args.scenario or "baseline",
        cfg=cfg,
        seed=args.seed,
        no_dr=args.no_dr,
        strategy=strategy,
        window_steps=args.window_steps,
        backend=args.backend,
        out_dir=args.out,
    )
    writer = OutputWriter(args.out, manifest.run_id, args.float_format)

    if args.command == "day-ahead":
        writer.write_json(MANIFEST_FILE, manifest.to_dict())
        seeded = cfg.with_seed(manifest.seed)
        costs = {}
        for dr in manifest.dr_settings:
            repair = await asyncio.to_thread(solve_with_repair, seeded, dr, options)
            label = scenario_label(dr)
            writer.write_csv(f"{label}_day_ahead.csv", repair.plan.to_frame())
            costs[label] = {"costs": repair.plan.costs.to_dict(), "decomposable_rate": repair.decomposable_rate}
        writer.write_json("day_ahead.json", costs)
        return EXIT_OK

    report = await run_experiment(
        manifest,
        cfg,
        options,
        rolling={"execute_steps": args.execute_steps},
        writer=None if args.command == "plot-data" else writer,
    )
    if args.command in ("run", "plot-data"):
        emit_plot_data(report, writer)
    for name, row in report.deviation_table().items():
        print(f"{name}: deviation cost wt {row['wt']:.2f}, pv {row['pv']:.2f}")
    return EXIT_OK


def _exit_code(error: BaseException) -> int:
    if isinstance(error, (ConfigurationError, ValidationError, AlignmentError)):
        return EXIT_CONFIG
    if isinstance(error, InfeasibleError):
        return EXIT_INFEASIBLE
    return EXIT_INTERNAL


def _write_error(argv: Optional[Sequence[str]], error: BaseException, code: int) -> None:
    """Structured error record in the output directory, best effort"""
    out = None
    tokens = list(sys.argv[1:] if argv is None else argv)
    for i, token in enumerate(tokens):
        if token == "--out" and i + 1 < len(tokens):
            out = tokens[i + 1]
        elif token.startswith("--out="):
            out = token.split("=", 1)[1]
    if out is None:
        return
    record = {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": code,
    }
    if isinstance(error, MenrollError):
        record["details"] = None if error.details is None else str(error.details)
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / ERROR_FILE).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        logger.error(f"Could not write error record: {e}")


def main(argv: Optional[Sequence[str]] = None) -> int:

    try:
        return asyncio.run(async_main(argv))
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return EXIT_INTERNAL
    except MenrollError as e:
        code = _exit_code(e)
        logger.error(f"{type(e).__name__}: {sanitize_for_logging(str(e))}")
        _write_error(argv, e, code)
        return code
    except Exception as e:
        logger.exception("Fatal error: %s", e)
        _write_error(argv, e, EXIT_INTERNAL)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
