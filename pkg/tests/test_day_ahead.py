import numpy as np
import pytest

from menroll.core.exceptions import AlignmentError, InfeasibleError, ModelingError
from menroll.dispatch.constants import MAX_REPAIR_ITERATIONS
from menroll.dispatch.day_ahead import build_day_ahead, reserve_requirement, solve_day_ahead, solve_with_repair
from menroll.dispatch.plan import peak_valley_metric
from menroll.scenario.scenario_config import parse_scenario


def _solve(cfg, dr_enabled=False):
    return solve_day_ahead(build_day_ahead(cfg, cfg.envelopes(), dr_enabled=dr_enabled))


def test_reserve_with_flat_sigma(small_data):
    n = 24
    small_data["devices"]["pv"]["unit_sigma"] = [0.0] * n
    # four turbines at 2.5 kW each: 10 kW for the installation
    small_data["devices"]["wt"]["unit_sigma"] = [2.5] * n
    cfg = parse_scenario(small_data)

    reserve = reserve_requirement(cfg)
    assert reserve == pytest.approx(np.full(n, 16.44854), abs=1e-4)

    plan = _solve(cfg)
    assert plan.reserve == pytest.approx(reserve)
    assert np.all(plan.supply_margin() >= reserve - 1e-4)


def test_plan_meets_balances(small_plan):
    assert np.abs(small_plan.electric_residual()).max() <= 1e-6
    assert np.abs(small_plan.thermal_residual()).max() <= 1e-6


def test_plan_is_cyclic(small_cfg, small_plan):
    dev = small_cfg.devices
    assert small_plan.ess_soc[-1] == pytest.approx(dev.battery.energy_start, abs=1e-6)
    assert small_plan.hs_soc[-1] == pytest.approx(dev.heat.hs_energy_start, abs=1e-6)
    for env in small_cfg.envelopes():
        soc = small_plan.stations[env.station_id].soc.values
        assert soc[-1] == pytest.approx(env.terminal_withdrawal, abs=1e-6)
        assert np.all(soc >= env.s_min.values - 1e-6)
        assert np.all(soc <= env.s_max.values + 1e-6)


def test_plan_respects_exclusivity_and_ramps(small_cfg, small_plan):
    p = small_plan
    assert np.minimum(p.p_buy, p.p_sell).max() <= 1e-4
    assert np.minimum(p.p_ess_ch, p.p_ess_dis).max() <= 1e-4
    assert np.minimum(p.h_hs_ch, p.h_hs_dis).max() <= 1e-4
    for sch in p.stations.values():
        assert np.minimum(sch.p_ch.values, sch.p_dis.values).max() <= 1e-4

    g = small_cfg.devices.gas_turbine
    steps = np.diff(np.concatenate([[g.initial_p], p.p_gt]))
    assert steps.max() <= g.ramp_up + 1e-6
    assert steps.min() >= -g.ramp_down - 1e-6
    on = p.gt_on > 0.5
    assert np.all(p.p_gt[~on] <= 1e-4)
    assert np.all(p.p_gt[on] >= g.p_min - 1e-6)


def test_recomputed_costs_match_objective(small_plan):
    assert small_plan.costs.total == pytest.approx(small_plan.objective, rel=1e-4)
    assert small_plan.costs.c_dr == 0.0


def test_demand_response_flattens_load(small_cfg, small_plan):
    with_dr = _solve(small_cfg, dr_enabled=True)

    assert with_dr.objective <= small_plan.objective + 1e-5 * abs(small_plan.objective)
    assert with_dr.dr.shift_in.values.sum() == pytest.approx(with_dr.dr.shift_out.values.sum(), abs=1e-5)

    _, _, before = peak_valley_metric(small_plan.load_e)
    _, _, after = peak_valley_metric(with_dr.load_e)
    assert (before - after) / before >= 0.10

    _, _, before = peak_valley_metric(small_plan.grid_exchange)
    _, _, after = peak_valley_metric(with_dr.grid_exchange)
    assert (before - after) / before >= 0.10


def test_unmeetable_load_names_step(small_data):
    small_data["loads"]["electric"]["values"][19] = 5000.0
    cfg = parse_scenario(small_data)
    with pytest.raises(InfeasibleError) as excinfo:
        _solve(cfg)
    assert excinfo.value.step == 19
    assert excinfo.value.balance == "electric"


def test_envelopes_must_be_on_day_ahead_grid(small_cfg):
    with pytest.raises(AlignmentError):
        build_day_ahead(small_cfg, small_cfg.envelopes(small_cfg.intra_day_grid))


def test_heat_load_needs_heat_system(small_data):
    del small_data["devices"]["heat"]
    cfg = parse_scenario(small_data)
    with pytest.raises(ModelingError):
        build_day_ahead(cfg, cfg.envelopes())


@pytest.mark.parametrize("max_iterations", [MAX_REPAIR_ITERATIONS, 0])
def test_repair_returns_splittable_schedule(small_data, max_iterations):
    small_data["stations"][0]["fleet"]["n_evs"] = 10
    cfg = parse_scenario(small_data, "repair")
    result = solve_with_repair(cfg, dr_enabled=False, max_iterations=max_iterations)

    assert result.decomposable_rate == 1.0
    assert result.iterations <= max_iterations
    assert set(result.decomposition) == {env.station_id for env in cfg.envelopes()}
    for env in result.envelopes:
        soc = result.plan.stations[env.station_id].soc.values
        assert np.all(soc <= env.s_max.values + 1e-6)
    for sid, split in result.decomposition.items():
        assert split.decomposable, split.reason
        station = result.plan.stations[sid]
        total_ch = sum(s.p_ch for s in split.schedules.values())
        total_dis = sum(s.p_dis for s in split.schedules.values())
        assert np.allclose(total_ch, station.p_ch.values, atol=1e-5)
        assert np.allclose(total_dis, station.p_dis.values, atol=1e-5)


def test_fixed_station_follows_schedule(small_cfg, small_plan):
    envelopes = small_cfg.envelopes()
    fixed = {env.station_id: small_plan.stations[env.station_id] for env in envelopes}
    plan = solve_day_ahead(build_day_ahead(small_cfg, envelopes, dr_enabled=False, fixed_stations=fixed))

    for sid, schedule in fixed.items():
        np.testing.assert_allclose(plan.stations[sid].p_ch.values, schedule.p_ch.values, atol=1e-6)
        np.testing.assert_allclose(plan.stations[sid].p_dis.values, schedule.p_dis.values, atol=1e-6)
    assert plan.objective == pytest.approx(small_plan.objective, rel=1e-4)
