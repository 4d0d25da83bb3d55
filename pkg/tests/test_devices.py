import numpy as np
import pytest

from menroll.core.exceptions import ValidationError
from menroll.devices.constraints import add_battery, add_gas_turbine, add_grid_tie, add_heat, add_station
from menroll.devices.models import battery_power_caps, fuel_rate, gt_fuel_pwl
from menroll.devices.params import BatteryParams, GasTurbineParams, GridTieParams, HeatParams
from menroll.fleet.aggregation import aggregate
from menroll.fleet.sessions import EvSession
from menroll.milp.model import MilpModel, Sense, SolveStatus, lin_sum
from menroll.milp.solvers import solve
from menroll.scenario.timegrid import Profile, TimeGrid, Unit

GT = dict(p_min=10.0, p_max=100.0, fuel_coeffs=(0.0, 0.001, 0.5, 5.0), cost_up=20.0, ramp_up=30.0, ramp_down=30.0, pwl_segments=4)


def test_battery_power_caps():
    b = BatteryParams(capacity=100.0, p_rated=50.0, soc_min=0.1, soc_max=0.9)
    assert battery_power_caps(b, 0.9) == pytest.approx((0.0, 50.0))
    ch, dis = battery_power_caps(b, 0.85)
    assert ch == pytest.approx(5.0 / 0.95)
    assert dis == 50.0
    assert battery_power_caps(b, 0.1)[1] == 0.0
    with pytest.raises(ValidationError):
        battery_power_caps(b, 1.2)


@pytest.mark.parametrize("kwargs", [
    {"p_min": 50.0, "p_max": 40.0},
    {"ramp_up": 5.0},
    {"fuel_coeffs": (1.0, 2.0)},
    {"initial_p": 30.0},
])
def test_invalid_gas_turbine(kwargs):
    with pytest.raises(ValidationError):
        GasTurbineParams(**{**GT, **kwargs})


def test_fuel_curve_refines():
    errors = []
    for segments in (2, 4, 8, 16):
        g = GasTurbineParams(**{**GT, "fuel_coeffs": (1e-5, 0.002, 0.4, 3.0), "pwl_segments": segments})
        curve = gt_fuel_pwl(g)
        assert len(curve.breakpoints) == segments + 1
        assert np.allclose(curve.ys, fuel_rate(g, curve.xs))
        errors.append(curve.max_error)
    assert all(later <= earlier + 1e-12 for earlier, later in zip(errors, errors[1:]))
    assert fuel_rate(GasTurbineParams(**GT), 10.0) == pytest.approx(0.1 + 5.0 + 5.0)


def test_gas_turbine_follows_demand_within_ramps():
    g = GasTurbineParams(**GT)
    demand = [0.0, 25.0, 55.0, 85.0, 40.0]
    m = MilpModel("gt")
    gt = add_gas_turbine(m, g, range(len(demand)))
    for t, d in enumerate(demand):
        m.add_constraint(gt.p[t], Sense.GE, d, f"demand[{t}]")
    m.add_objective(lin_sum(gt.fuel) + lin_sum(g.cost_up * su for su in gt.start_up))
    sol = solve(m)
    assert sol.is_optimal
    p = sol.array(gt.p)
    on = sol.array(gt.on)
    assert np.all(np.abs(np.diff(np.concatenate(([0.0], p)))) <= 30.0 + 1e-6)
    assert np.all(p >= np.array(demand) - 1e-6)
    assert np.allclose(on[p > 1e-6], 1.0)
    curve = gt_fuel_pwl(g)
    for t in range(len(demand)):
        expected = curve(p[t]) if on[t] > 0.5 else 0.0
        assert sol[gt.fuel[t]] == pytest.approx(expected, abs=1e-5)
    assert sum(sol.array(gt.start_up)) == pytest.approx(1.0)



def test_fixed_output_turbine():
    g = GasTurbineParams(**{**GT, "p_min": 30.0, "p_max": 30.0})
    curve = gt_fuel_pwl(g)
    assert len(curve.breakpoints) == 1
    assert curve.xs[0] == 30.0
    assert curve(30.0) == pytest.approx(float(fuel_rate(g, 30.0)))
    assert curve.max_error == 0.0

    m = MilpModel("gt")
    gt = add_gas_turbine(m, g, range(3))
    m.add_constraint(gt.p[1], Sense.GE, 10.0)
    m.add_objective(lin_sum(gt.fuel))
    sol = solve(m)
    assert sol.is_optimal
    assert sol.array(gt.p) == pytest.approx([0.0, 30.0, 0.0], abs=1e-6)
    assert sol[gt.fuel[1]] == pytest.approx(float(fuel_rate(g, 30.0)))


def test_gas_turbine_ramp_makes_jump_infeasible():
    m = MilpModel("gt")
    gt = add_gas_turbine(m, GasTurbineParams(**GT), [0])
    m.add_constraint(gt.p[0], Sense.GE, 40.0)
    assert solve(m).status is SolveStatus.INFEASIBLE


def test_fixed_commitment_bounds_output():
    m = MilpModel("gt")
    gt = add_gas_turbine(m, GasTurbineParams(**GT), range(3), commitment=[0.0, 1.0, 1.0])
    assert m.bounds(gt.p[0]) == (0.0, 0.0)
    assert m.bounds(gt.p[1]) == (10.0, 100.0)
    assert gt.fuel == []
    assert m.n_binaries == 0


def test_battery_arbitrage_is_exclusive_and_balanced():
    b = BatteryParams(capacity=100.0, p_rated=40.0, soc_min=0.1, soc_max=0.9, soc_start=0.5, eta_ch=0.9, eta_dis=0.9)
    prices = [0.2, 0.2, 1.0, 1.0, 0.2, 1.0]
    m = MilpModel("ess")
    ess = add_battery(m, b, range(len(prices)), dt=1.0, terminal=b.energy_start)
    m.add_objective(lin_sum(p * (c - d) for p, c, d in zip(prices, ess.ch, ess.dis)))
    sol = solve(m)
    ch, dis, energy = sol.array(ess.ch), sol.array(ess.dis), sol.array(ess.energy)
    assert np.all(ch * dis <= 1e-6)
    prev = np.concatenate(([b.energy_start], energy[:-1]))
    assert np.allclose(energy, prev + 0.9 * ch - dis / 0.9, atol=1e-6)
    assert energy[-1] == pytest.approx(50.0)
    assert sol.objective < 0


def test_station_charges_in_cheap_steps():
    grid = TimeGrid(0.0, 60, 4)
    s = EvSession("A", "CS", 0, 3, 10.0, 30.0, 0.0, 50.0, 10.0, 0.0, eta_ch=1.0, eta_dis=1.0)
    env = aggregate([s], grid)
    m = MilpModel("station")
    st = add_station(m, env, range(4), terminal=env.terminal_withdrawal)
    prices = [4.0, 3.0, 1.0, 2.0]
    m.add_objective(lin_sum(p * (c - d) for p, c, d in zip(prices, st.ch, st.dis)))
    sol = solve(m)
    assert sol.objective == pytest.approx(30.0)
    assert sol.array(st.ch) == pytest.approx([0.0, 0.0, 10.0, 10.0])
    assert sol.array(st.soc)[-1] == pytest.approx(30.0)


def test_heat_storage_minimum_charge():
    h = HeatParams(hp_q_max=50.0, hs_ch_min=5.0, hs_ch_max=20.0, hs_dis_min=5.0, hs_dis_max=20.0, hs_capacity=100.0)
    m = MilpModel("heat")
    heat = add_heat(m, h, range(3), dt=1.0, terminal=h.hs_energy_start)
    demand = [10.0, 12.0, 2.0]
    for t, d in enumerate(demand):
        m.add_constraint(heat.q_hp[t] + heat.hs_dis[t] - heat.hs_ch[t], Sense.EQ, d, f"heat[{t}]")
    m.add_objective(lin_sum([5.0 * heat.p_hp[0], 1.0 * heat.p_hp[1], 9.0 * heat.p_hp[2]]))
    sol = solve(m)
    ch, dis = sol.array(heat.hs_ch), sol.array(heat.hs_dis)
    for value in np.concatenate((ch, dis)):
        assert value <= 1e-6 or value >= 5.0 - 1e-6
    assert np.all(ch * dis <= 1e-6)
    assert sol.array(heat.p_hp) == pytest.approx(sol.array(heat.q_hp) / h.hp_cop)


def test_grid_tie_never_buys_and_sells():
    grid = TimeGrid.day_ahead()
    tie = GridTieParams(-50.0, 80.0, Profile.constant(grid, 1.0, Unit.PRICE), Profile.constant(grid, 0.5, Unit.PRICE))
    m = MilpModel("tie")
    g = add_grid_tie(m, tie, range(2))
    # selling pays, buying costs less than selling earns: only exclusivity stops a loop
    m.add_objective(lin_sum([0.1 * g.buy[0], -1.0 * g.sell[0], 0.1 * g.buy[1], -1.0 * g.sell[1]]))
    for t in range(2):
        m.add_constraint(g.net(t), Sense.EQ, 0.0, f"balance[{t}]")
    sol = solve(m)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert sol[g.buy[0]] * sol[g.sell[0]] == pytest.approx(0.0, abs=1e-9)


def test_sell_price_above_buy_rejected():
    grid = TimeGrid.day_ahead()
    with pytest.raises(ValidationError):
        GridTieParams(-10.0, 10.0, Profile.constant(grid, 0.5, Unit.PRICE), Profile.constant(grid, 1.0, Unit.PRICE))
