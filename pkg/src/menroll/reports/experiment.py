"""Experiment matrix: scenario 1/2 (demand response off/on) x strategy 1/2

Strategy 1 runs the day-ahead plan verbatim against the realized renewable
output; strategy 2 adjusts it with the rolling intra-day controller.  Day-ahead
solves and strategy runs are independent and execute on worker threads.
"""
import asyncio
import hashlib
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from ..core.logging_utils import get_logger, log_stage, sanitize_for_logging
from ..dispatch.day_ahead import RepairResult, solve_with_repair
from ..dispatch.intraday import (
    DeviationReport,
    ExecutionTrace,
    RollingConfig,
    assess_deviation,
    execute_verbatim,
    roll,
    sample_realizations,
)
from ..dispatch.plan import DispatchPlan, peak_valley_metric
from ..milp.solvers import SolverOptions
from ..scenario.scenario_config import ScenarioConfig, scenario_hash
from ..scenario.timegrid import Profile
from .constants import MANIFEST_FILE, REPORT_FILE, RUN_ID_LENGTH
from .writer import OutputWriter, canonical_json

logger = get_logger(__name__)

STRATEGY_NAMES = {"day-ahead": "strategy1", "rolling": "strategy2"}


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines the outputs of one experiment

    The output directory is recorded but not hashed, so the same experiment
    written to two places produces identical files.
    """

    scenario_path: str
    scenario_hash: str
    seed: int
    dr_settings: Tuple[bool, ...]
    strategy: str
    window_steps: Optional[int]
    backend: str
    out_dir: str
    tool_version: str = __version__

    @classmethod
    def create(cls, scenario_path: str, cfg: ScenarioConfig, seed: int, no_dr: bool, strategy: str,
               window_steps: Optional[int], backend: str, out_dir: str) -> "RunManifest":
        return cls(
            scenario_path=scenario_path,
            scenario_hash=scenario_hash(cfg),
            seed=int(seed),
            dr_settings=(False,) if no_dr else (False, True),
            strategy=strategy,
            window_steps=window_steps,
            backend=backend,
            out_dir=out_dir,
        )

    @property
    def config_hash(self) -> str:
        data = asdict(self)
        data.pop("out_dir")
        data.pop("scenario_path")
        return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()

    @property
    def run_id(self) -> str:
        return self.config_hash[:RUN_ID_LENGTH]

    @property
    def strategies(self) -> Tuple[str, ...]:
        return {
            "both": ("day-ahead", "rolling"),
            "day-ahead-only": ("day-ahead",),
            "rolling-only": ("rolling",),
        }[self.strategy]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dr_settings"] = list(self.dr_settings)
        data["config_hash"] = self.config_hash
        return data


def scenario_label(dr_enabled: bool) -> str:
    return "scenario2" if dr_enabled else "scenario1"


def _relative_drop(base: float, value: float) -> float:
    return (base - value) / base if base > 0 else 0.0


@dataclass
class RunResult:
    name: str
    scenario: str
    strategy: str
    dr_enabled: bool
    trace: ExecutionTrace
    deviation: DeviationReport
    adjustment: Dict[str, float]

    def summary(self, dt: float) -> Dict[str, Any]:
        executed = self.trace.executed
        realized = self.trace.realization
        used = {"pv": executed.p_pv_used, "wt": executed.p_wt_used}
        curtailed = sum(float(np.sum(np.maximum(realized[t] - used[t], 0.0))) for t in used) * dt
        return {
            "name": self.name,
            "scenario": self.scenario,
            "strategy": self.strategy,
            "dr_enabled": self.dr_enabled,
            "executed_costs": executed.costs.to_dict(),
            "adjustment_costs": self.adjustment,
            "deviation": self.deviation.to_dict(),
            "emergency_cost": self.trace.emergency_cost(),
            "emergency_events": len(self.trace.ledger),
            "curtailment_kwh": curtailed,
            "renewable_kwh": float(np.sum(used["pv"] + used["wt"]) * dt),
        }


@dataclass
class ComparisonReport:
    """Recomputed metrics of every run in the matrix"""

    manifest: RunManifest
    cfg: ScenarioConfig
    plans: Dict[str, DispatchPlan]
    repairs: Dict[str, RepairResult]
    realization: Dict[str, Profile]
    runs: List[RunResult] = field(default_factory=list)

    def run(self, name: str) -> RunResult:
        for r in self.runs:
            if r.name == name:
                return r
        raise KeyError(name)

    def peak_valley(self) -> Dict[str, Dict[str, float]]:
        """Peak, valley and their difference of the post-DR load and of the grid exchange"""
        out: Dict[str, Dict[str, float]] = {}
        for label, plan in self.plans.items():
            row = {}
            for kind, profile in (("load", plan.load_e), ("exchange", plan.grid_exchange)):
                peak, valley, diff = peak_valley_metric(profile)
                row.update({f"{kind}_peak": peak, f"{kind}_valley": valley, f"{kind}_peak_valley": diff})
            out[label] = row
        if "scenario1" in out and "scenario2" in out:
            out["reduction"] = {
                kind: _relative_drop(out["scenario1"][f"{kind}_peak_valley"], out["scenario2"][f"{kind}_peak_valley"])
                for kind in ("load", "exchange")
            }
        return out

    def deviation_table(self) -> Dict[str, Dict[str, float]]:
        """Deviation cost per strategy and source, per scenario"""
        table: Dict[str, Dict[str, float]] = {}
        for r in self.runs:
            key = f"{r.scenario}-{STRATEGY_NAMES[r.strategy]}"
            table[key] = {"wt": r.deviation.cost("wt"), "pv": r.deviation.cost("pv"), "total": r.deviation.total_cost}
        return table

    def to_dict(self) -> Dict[str, Any]:
        dt = self.cfg.intra_day_grid.dt_hours
        return {
            "manifest": self.manifest.to_dict(),
            "scenario": self.cfg.name,
            "day_ahead": {
                label: {
                    "costs": plan.costs.to_dict(),
                    "objective": plan.objective,
                    "decomposable_rate": self.repairs[label].decomposable_rate,
                    "repair_iterations": self.repairs[label].iterations,
                    "pinned_stations": list(self.repairs[label].pinned),
                    "curtailment_kwh": float(np.sum(plan.p_curtailed) * plan.grid.dt_hours),
                    "renewable_kwh": float(np.sum(plan.p_pv_used + plan.p_wt_used) * plan.grid.dt_hours),
                }
                for label, plan in self.plans.items()
            },
            "peak_valley": self.peak_valley(),
            "deviation": self.deviation_table(),
            "runs": [r.summary(dt) for r in self.runs],
        }


def _strategy_run(cfg: ScenarioConfig, plan: DispatchPlan, dr_enabled: bool, strategy: str,
                  realization: Dict[str, Profile], rc: RollingConfig,
                  options: Optional[SolverOptions]) -> RunResult:
    if strategy == "rolling":
        trace = roll(cfg, plan, rc, options, realization)
    else:
        trace = execute_verbatim(cfg, plan, realization, rc)
    deviation = assess_deviation(trace, realization, cfg.penalty_rate)
    name = f"{scenario_label(dr_enabled)}-{strategy}"
    result = RunResult(name, scenario_label(dr_enabled), strategy, dr_enabled, trace, deviation,
                       trace.adjustment_costs(rc))
    logger.info(
        f"{name}: deviation cost {deviation.total_cost:.4f}, "
        f"adjustment cost {result.adjustment['c_total']:.4f}"
    )
    return result


async def run_experiment(
    manifest: RunManifest,
    cfg: ScenarioConfig,
    options: Optional[SolverOptions] = None,
    rolling: Optional[Dict[str, Any]] = None,
    writer: Optional[OutputWriter] = None,
) -> ComparisonReport:
    """Solve, execute and compare every run the manifest asks for

    The manifest is written before any solve; with a ``writer`` the
    day-ahead plans, executed traces, emergency ledgers and the report are
    written as well.
    """
    if writer is not None:
        writer.write_json(MANIFEST_FILE, manifest.to_dict())
    cfg = cfg.with_seed(manifest.seed)
    rc = RollingConfig.for_scenario(cfg, window_steps=manifest.window_steps, **(rolling or {}))
    logger.info(
        f"Experiment {manifest.run_id}: scenario '{sanitize_for_logging(cfg.name)}', seed {manifest.seed}, "
        f"DR settings {list(manifest.dr_settings)}, strategies {list(manifest.strategies)}"
    )

    with log_stage(logger, f"Experiment {manifest.run_id}: day-ahead"):
        repairs_list = await asyncio.gather(
            *(asyncio.to_thread(solve_with_repair, cfg, dr, options) for dr in manifest.dr_settings)
        )
    repairs = {scenario_label(dr): r for dr, r in zip(manifest.dr_settings, repairs_list)}
    plans = {label: r.plan for label, r in repairs.items()}
    realization = sample_realizations(cfg, cfg.intra_day_grid)

    jobs = [(dr, strategy) for dr in manifest.dr_settings for strategy in manifest.strategies]
    with log_stage(logger, f"Experiment {manifest.run_id}: {len(jobs)} executions"):
        runs = await asyncio.gather(
            *(
                asyncio.to_thread(_strategy_run, cfg, plans[scenario_label(dr)], dr, strategy, realization, rc, options)
                for dr, strategy in jobs
            )
        )
    report = ComparisonReport(manifest, cfg, plans, repairs, realization, list(runs))

    if writer is not None:
        write_artifacts(report, writer)
    return report


def write_artifacts(report: ComparisonReport, writer: OutputWriter) -> None:
    for label, plan in report.plans.items():
        writer.write_csv(f"{label}_day_ahead.csv", plan.to_frame())
    for r in report.runs:
        writer.write_csv(f"{r.name}_trace.csv", r.trace.executed.to_frame())
        writer.write_json(f"{r.name}_ledger.json", {"events": r.trace.ledger,
                                                    "windows": [asdict(w) for w in r.trace.windows]})
    writer.write_json(REPORT_FILE, report.to_dict())
    logger.info(f"Wrote {len(writer.written)} files to {sanitize_for_logging(str(writer.out_dir))}")


def run_names(manifest: RunManifest) -> Sequence[str]:
    return [f"{scenario_label(dr)}-{s}" for dr in manifest.dr_settings for s in manifest.strategies]
