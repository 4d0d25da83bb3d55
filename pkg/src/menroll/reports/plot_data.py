"""Plot-ready CSV files for every result figure, plus a README of their columns"""
from typing import Dict, List

import numpy as np
import pandas as pd

from ..core.logging_utils import get_logger
from ..dispatch.plan import DispatchPlan
from ..scenario.timegrid import resample
from .experiment import ComparisonReport, STRATEGY_NAMES
from .writer import OutputWriter

logger = get_logger(__name__)

PLOT_README = """\
# Plot data

Every file carries a leading `run_id` column (the experiment's manifest
hash prefix) followed by `step` (index on the file's grid) and `hour` (hour of
day at the start of the step).  Powers are kW, energies kWh.

| file | content | columns |
|------|---------|---------|
| `forecasts.csv` | renewable output per 15 minutes | `pv_day_ahead`, `pv_intra_day`, `pv_actual`, same for `wt`; `intra_day` is the forecast issued one step earlier |
| `envelopes_day_ahead.csv` | per-station dispatchable potential, hourly | `station_id`, `p_ch_max`, `p_dis_max`, `s_min`, `s_max`, `delta_s` |
| `envelopes_intra_day.csv` | the same rebuilt on the 15-minute grid | as above |
| `electric_balance_<plan>.csv` | electric supply and demand stack | `supply_*` and `demand_*` columns; their difference is `residual` |
| `heat_balance_<plan>.csv` | thermal supply and demand stack | `supply_*`, `demand_*`, `residual` |
| `dr_actions.csv` | demand response of each scenario | `scenario`, `shift_in`, `shift_out`, `curtail_e`, `curtail_h` |
| `plan_vs_output.csv` | day-ahead reference against rolling execution | `run`, then `<device>_plan` and `<device>_output` for `gt`, `ess`, `grid`, `hp`, `hs`, `pv`, `wt` (net discharge positive for storage) |
| `deviation.csv` | delivered minus committed renewable output | `run`, `strategy`, `pv`, `wt`; negative values are shortages |

`<plan>` is `scenario1` / `scenario2` for the hourly day-ahead plans and the
run name (e.g. `scenario2-rolling`) for executed traces.
"""


def _frame(grid, **columns) -> pd.DataFrame:
    data = {"step": np.arange(grid.n_steps), "hour": grid.hours()}
    data.update(columns)
    return pd.DataFrame(data)


def balance_frames(plan: DispatchPlan) -> Dict[str, pd.DataFrame]:
    supply_e = {f"supply_{k}": v for k, v in plan.electric_supply().items()}
    demand_e = {f"demand_{k}": v for k, v in plan.electric_demand().items()}
    supply_h = {f"supply_{k}": v for k, v in plan.thermal_supply().items()}
    demand_h = {f"demand_{k}": v for k, v in plan.thermal_demand().items()}
    return {
        "electric": _frame(plan.grid, **supply_e, **demand_e, residual=plan.electric_residual()),
        "heat": _frame(plan.grid, **supply_h, **demand_h, residual=plan.thermal_residual()),
    }


def _forecasts(report: ComparisonReport) -> pd.DataFrame:
    grid = report.cfg.intra_day_grid
    rolling = [r for r in report.runs if r.strategy == "rolling"]
    columns = {}
    for tech in ("pv", "wt"):
        day_ahead = resample(report.cfg.renewable_forecast(tech).forecast, grid).values
        columns[f"{tech}_day_ahead"] = day_ahead
        columns[f"{tech}_intra_day"] = rolling[0].trace.forecasts[tech] if rolling else day_ahead
        columns[f"{tech}_actual"] = report.realization[tech].values
    return _frame(grid, **columns)


def _envelopes(report: ComparisonReport, grid) -> pd.DataFrame:
    rows: List[dict] = []
    for env in report.cfg.envelopes(grid):
        rows.extend(env.to_rows())
    return pd.DataFrame(rows)


def _plan_vs_output(report: ComparisonReport) -> pd.DataFrame:
    frames = []
    for r in report.runs:
        if r.strategy != "rolling":
            continue
        ref, out = r.trace.reference, r.trace.executed
        pairs = {
            "gt": (ref.p_gt, out.p_gt),
            "ess": (ref.p_ess_dis - ref.p_ess_ch, out.p_ess_dis - out.p_ess_ch),
            "grid": (ref.p_buy - ref.p_sell, out.grid_exchange),
            "hp": (ref.q_hp, out.q_hp),
            "hs": (ref.h_hs_dis - ref.h_hs_ch, out.h_hs_dis - out.h_hs_ch),
            "pv": (ref.p_pv_used, out.p_pv_used),
            "wt": (ref.p_wt_used, out.p_wt_used),
        }
        columns = {}
        for name, (planned, executed) in pairs.items():
            columns[f"{name}_plan"] = planned
            columns[f"{name}_output"] = executed
        frame = _frame(out.grid, **columns)
        frame.insert(2, "run", r.name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["step", "hour", "run"])


def _deviation(report: ComparisonReport) -> pd.DataFrame:
    frames = []
    for r in report.runs:
        dev = r.deviation
        frame = _frame(dev.grid, **{tech: dev.deliverable[tech] - dev.committed[tech] for tech in ("pv", "wt")})
        frame.insert(2, "run", r.name)
        frame.insert(3, "strategy", STRATEGY_NAMES[r.strategy])
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["step", "hour", "run", "strategy"])


def _dr_actions(report: ComparisonReport) -> pd.DataFrame:
    frames = []
    for label, plan in report.plans.items():
        d = plan.dr
        frame = _frame(plan.grid, shift_in=d.shift_in.values, shift_out=d.shift_out.values,
                       curtail_e=d.curtail_e.values, curtail_h=d.curtail_h.values)
        frame.insert(2, "scenario", label)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def emit_plot_data(report: ComparisonReport, writer: OutputWriter) -> List[str]:
    """Write one CSV per figure and the column README; returns the file names

    Raises:
        ReportError: if the output directory is not writable
    """
    names: List[str] = []

    def put(name: str, frame: pd.DataFrame) -> None:
        writer.write_csv(name, frame)
        names.append(name)

    put("forecasts.csv", _forecasts(report))
    put("envelopes_day_ahead.csv", _envelopes(report, report.cfg.day_ahead_grid))
    put("envelopes_intra_day.csv", _envelopes(report, report.cfg.intra_day_grid))
    for label, plan in report.plans.items():
        frames = balance_frames(plan)
        put(f"electric_balance_{label}.csv", frames["electric"])
        put(f"heat_balance_{label}.csv", frames["heat"])
    for r in report.runs:
        if r.strategy == "rolling":
            frames = balance_frames(r.trace.executed)
            put(f"electric_balance_{r.name}.csv", frames["electric"])
            put(f"heat_balance_{r.name}.csv", frames["heat"])
    put("dr_actions.csv", _dr_actions(report))
    put("plan_vs_output.csv", _plan_vs_output(report))
    put("deviation.csv", _deviation(report))
    writer.write_text("README.md", PLOT_README)
    names.append("README.md")
    logger.info(f"Plot data: {len(names)} files")
    return names
