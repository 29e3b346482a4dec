import numpy as np
import pytest

from chpuc.costs import (fuel_cost, fuel_cost_chp, fuel_cost_heat_only, fuel_cost_thermal, total_cost,
                         transition_costs)
from chpuc.dispatch import derive_demand_from_dispatch, read_dispatch_csv, table_from_solution
from chpuc.io import DEMAND_RESOLUTION
from chpuc.model import (InfeasiblePointError, InvariantError, KindMismatchError, ParkingLot, ScheduleSolution,
                         SOLVER_TOLERANCES, Tolerances)
from chpuc.pev import per_vehicle_power
from chpuc.validation import net_pev_power, validate_schedule

from conftest import DATA_PKG
from factories import boiler, chp, demand, lot, system, thermal

BIG_CHP = dict(verts=((98.8, 0), (247, 0), (215, 180), (81, 105)))


def test_thermal_cost_examples():
    assert fuel_cost_thermal(thermal(a=0, b=0, c=0), 100) == 0
    u = thermal(a=1000, b=16.19, c=0.00048, p_min=150, p_max=455)
    assert fuel_cost_thermal(u, 455) == pytest.approx(8465.822, abs=1e-9)
    assert fuel_cost_thermal(u, 0) == 1000


def test_chp_cost_examples():
    u = chp(a=2650, b=14.5, c=0.0345, d=4.2, e=0.030, f=0.031, **BIG_CHP)
    assert fuel_cost_chp(u, 100, 40) == pytest.approx(4785.0, abs=1e-9)
    assert fuel_cost_chp(u, 0, 0) == 2650


def test_chp_without_heat_terms_equals_thermal():
    c = chp(a=1000, b=16.19, c=0.00048, d=0, e=0, f=0, **BIG_CHP)
    t = thermal(a=1000, b=16.19, c=0.00048, p_min=81, p_max=247)
    for p in np.linspace(98.8, 247, 17):
        assert fuel_cost_chp(c, p, 0) == fuel_cost_thermal(t, p)


def test_cost_kind_checks():
    with pytest.raises(KindMismatchError):
        fuel_cost_thermal(chp(), 10)
    with pytest.raises(KindMismatchError):
        fuel_cost_chp(thermal(), 10, 0)
    with pytest.raises(KindMismatchError):
        fuel_cost_heat_only(thermal(), 10)
    with pytest.raises(InfeasiblePointError):
        fuel_cost_chp(chp(), 500, 0)


def test_transition_examples():
    u = thermal(st=4500, sh=0)
    assert transition_costs(u, 0, 1) == (4500, 0)
    assert transition_costs(thermal(st=4500, sh=300), 1, 0) == (0, 300)
    assert transition_costs(u, 1, 1) == (0, 0)


def test_transition_never_both():
    u = thermal(st=7, sh=3)
    for a in (0, 1):
        for b in (0, 1):
            su, sd = transition_costs(u, a, b)
            assert su * sd == 0


def _empty(N, M, T):
    z = np.zeros((N, T))
    return ScheduleSolution(x=z.astype(int), p=z, h=z, n_dsch=np.zeros((M, T)), n_ch=np.zeros((M, T)))


def test_total_cost_trivial():
    s = system([thermal(st=500), chp()], [lot(T=2)])
    assert total_cost(s, _empty(2, 1, 2))[0] == 0
    s1 = system([thermal(a=100, b=20, c=0.01, st=500)])
    sol = ScheduleSolution(x=[[1]], p=[[40.0]], h=[[0.0]], n_dsch=np.zeros((0, 1)), n_ch=np.zeros((0, 1)))
    assert total_cost(s1, sol)[0] == pytest.approx(100 + 800 + 16 + 500)


def test_total_cost_two_by_two_by_hand():
    g = thermal(a=100, b=20, c=0.01, st=500, sh=50, init=-1)
    c = chp(a=150, b=15, c=0.02, d=2, e=0.02, f=0.01, init=1)
    l = lot(fleet=10, pv=1000, delta=0.5, eta=0.9, pi=2.0, T=2)
    s = system([g, c], [l])
    x = [[1, 0], [1, 1]]
    p = [[50, 0], [60, 40]]
    h = [[0, 0], [30, 20]]
    sol = ScheduleSolution(x=x, p=p, h=h, n_dsch=[[3, 7]], n_ch=[[0, 0]])
    hour1 = (100 + 20 * 50 + 0.01 * 2500) + 500 + (150 + 15 * 60 + 0.02 * 3600 + 2 * 30 + 0.02 * 900 + 0.01 * 1800) \
        + 3 * 0.45 * 2.0
    hour2 = 50 + (150 + 15 * 40 + 0.02 * 1600 + 2 * 20 + 0.02 * 400 + 0.01 * 800) + 7 * 0.45 * 2.0
    tot, hourly = total_cost(s, sol)
    assert hourly == pytest.approx([hour1, hour2], rel=1e-12)
    assert tot == pytest.approx(hour1 + hour2, rel=1e-12)
    assert sol.total_cost == tot


def test_total_cost_dimension_mismatch():
    s = system([thermal()])
    with pytest.raises(ValueError):
        total_cost(s, _empty(2, 0, 1))


def test_cost_additivity_randomized():
    rng = np.random.default_rng(3)
    units = [thermal("G1", st=300, sh=20), thermal("G2", a=80, b=25, c=0.02, p_min=5, p_max=60, st=100),
             chp("C1"), boiler("B1")]
    l = lot(T=5)
    s = system(units, [l])
    for _ in range(50):
        T = 5
        x = rng.integers(0, 2, (4, T))
        p = np.zeros((4, T)); h = np.zeros((4, T))
        p[0] = rng.uniform(10, 100, T); p[1] = rng.uniform(5, 60, T)
        p[2] = rng.uniform(30, 60, T); h[2] = rng.uniform(5, 30, T)
        h[3] = rng.uniform(0, 60, T)
        p *= x; h *= x
        nd = rng.integers(0, 5, (1, T))
        sol = ScheduleSolution(x=x, p=p, h=h, n_dsch=nd, n_ch=np.zeros((1, T)))
        tot, _ = total_cost(s, sol)
        ref = 0.0
        for i, u in enumerate(units):
            prev = int(u.initially_on)
            for t in range(T):
                if x[i, t]:
                    ref += fuel_cost(u, p[i, t], h[i, t])
                ref += sum(transition_costs(u, prev, x[i, t]))
                prev = x[i, t]
        ref += nd.sum() * per_vehicle_power(l) * l.pi
        assert tot == pytest.approx(ref, rel=1e-9)


def test_invariants():
    with pytest.raises(InvariantError) as e:
        thermal(p_min=200, p_max=100)
    assert e.value.field == "p_min"
    with pytest.raises(InvariantError):
        thermal(a=-1)
    with pytest.raises(InvariantError):
        thermal(up=0)
    with pytest.raises(InvariantError):
        thermal(init=0)
    with pytest.raises(InvariantError):
        ParkingLot(id="L", fleet_size=10, pv=0, delta=0.5, eta=0.9)
    with pytest.raises(InvariantError):
        ParkingLot(id="L", fleet_size=10, pv=10, delta=0.5, eta=0.9, n_dsch_max=np.full(2, 11.0))
    with pytest.raises(InvariantError):
        demand([1, -1])


def test_p_limit_violation_residual():
    g = thermal(p_min=10, p_max=100)
    s = system([g])
    sol = ScheduleSolution(x=[[1]], p=[[130.0]], h=[[0.0]], n_dsch=np.zeros((0, 1)), n_ch=np.zeros((0, 1)))
    rep = validate_schedule(s, demand([130.0]), sol, Tolerances(reserve=1e9))
    lim = rep.by_tag("p-limit")
    assert len(lim) == 1 and lim[0].residual == pytest.approx(30.0)
    assert len(rep) == 1


def test_table4_replay_is_balanced(reference_system):
    tab = read_dispatch_csv(DATA_PKG / "table4.csv")
    dem = derive_demand_from_dispatch(tab)
    resid = tab.p.sum(axis=1) + tab.pv2g.sum(axis=0) - dem.pd
    assert np.all(np.abs(resid) <= 0.15)


def test_table5_hourly_discharge_below_cap():
    tab = read_dispatch_csv(DATA_PKG / "table5.csv")
    assert tab.n_dsch.max() <= 10000


def test_derive_demand_examples():
    tab = read_dispatch_csv(DATA_PKG / "table4.csv")
    dem = derive_demand_from_dispatch(tab, resolution=DEMAND_RESOLUTION)
    assert dem.pd[0] == pytest.approx(700)
    assert dem.pd[11] == pytest.approx(1500)
    assert dem.rd[0] == 70
    tab.p[:] = 0; tab.h[:] = 0; tab.pv2g[:] = 0
    dem = derive_demand_from_dispatch(tab)
    assert not dem.pd.any() and not dem.hd.any()


def _rand_schedule(rng, T):
    units = [thermal("G1", p_min=10, p_max=100), thermal("G2", a=80, b=25, c=0.02, p_min=5, p_max=60, up=2, down=2),
             chp("C1"), boiler("B1")]
    l = lot(fleet=10, T=T, cap=4, grid=True)
    s = system(units, [l])
    x = rng.integers(0, 2, (4, T))
    p = np.zeros((4, T)); h = np.zeros((4, T))
    p[0] = rng.uniform(0, 110, T); p[1] = rng.uniform(0, 70, T)
    p[2] = rng.uniform(10, 95, T); h[2] = rng.uniform(-5, 65, T)
    h[3] = rng.uniform(-5, 70, T)
    sol = ScheduleSolution(x=x, p=p * x, h=h * x, n_dsch=rng.integers(0, 6, (1, T)), n_ch=rng.integers(0, 6, (1, T)))
    pd = rng.uniform(50, 250, T)
    hd = rng.uniform(0, 100, T)
    dem = demand(pd, hd, np.round(0.1 * pd))
    # half the time, make balances hold so both branches of each check are exercised
    if rng.random() < 0.5:
        dem = demand(np.maximum(0, sol.p.sum(axis=0) + net_pev_power(s, sol.n_dsch, sol.n_ch)),
                     np.maximum(0, sol.h.sum(axis=0)), dem.rd)
    return s, dem, sol


def test_validate_sound_and_complete_randomized():
    rng = np.random.default_rng(11)
    tol = Tolerances(balance=1e-3, heat=1e-3, bounds=1e-3, reserve=1e-3)
    seen = set()
    for _ in range(1000):
        T = 3
        s, dem, sol = _rand_schedule(rng, T)
        rep = validate_schedule(s, dem, sol, tol)
        pev = net_pev_power(s, sol.n_dsch, sol.n_ch)
        for t in range(T):
            bal = abs(sol.p[:, t].sum() + pev[t] - dem.pd[t]) > tol.balance
            heat = abs(sol.h[:, t].sum() - dem.hd[t]) > tol.heat
            cap = sum(s.units[i].p_max for i in (0, 1) if sol.x[i, t])
            hc = sol.h[2, t]
            if sol.x[2, t] and 0 <= hc <= 60:
                cap += 90 - 0.25 * hc          # right edge of the C1 polygon
            res = dem.pd[t] + dem.rd[t] - cap - pev[t]
            lim0 = sol.x[0, t] and not (10 - 1e-3 <= sol.p[0, t] <= 100 + 1e-3)
            got = {v.tag for v in rep if v.hour == t + 1}
            assert ("power-balance" in got) == bal
            assert ("heat-balance" in got) == heat
            assert ("reserve" in got) == (res > tol.reserve)
            assert any(v.tag == "p-limit" and v.ident == "G1" and v.hour == t + 1 for v in rep) == bool(lim0)
            seen |= got
        total_bad = sol.n_dsch.sum() != 10
        assert bool([v for v in rep if v.tag == "fleet-total-dsch"]) == total_bad
        over = sol.n_dsch[0] > 4
        assert {v.hour for v in rep if v.tag == "fleet-hourly-dsch"} == {t + 1 for t in np.flatnonzero(over)}
    assert {"power-balance", "heat-balance", "reserve", "p-limit"} <= seen


def test_min_up_down_seeded_by_initial_status():
    g = thermal(up=3, down=2, init=1)
    s = system([g])
    z = np.zeros((0, 4))
    viol = validate_schedule(s, demand([0, 0, 0, 0]),
                             ScheduleSolution(x=[[1, 0, 0, 0]], p=[[0, 0, 0, 0]], h=[[0, 0, 0, 0]], n_dsch=z, n_ch=z),
                             Tolerances(balance=1e9, reserve=1e9, bounds=1e9))
    assert [v.tag for v in viol] == ["min-up"]
    g = thermal(up=1, down=3, init=-2)
    viol = validate_schedule(system([g]), demand([0, 0, 0, 0]),
                             ScheduleSolution(x=[[1, 1, 1, 1]], p=np.full((1, 4), 50.0), h=np.zeros((1, 4)),
                                              n_dsch=z, n_ch=z),
                             Tolerances(balance=1e9, reserve=1e9))
    assert [v.tag for v in viol] == ["min-down"]


def test_round_trip_derive_then_validate():
    rng = np.random.default_rng(5)
    for _ in range(20):
        s, _, sol = _rand_schedule(rng, 4)
        sol.n_dsch[:] = [[3, 3, 2, 2]]
        sol.n_ch[:] = [[2, 3, 3, 2]]
        sol.p[0] = np.clip(sol.p[0], 10, 100) * sol.x[0]
        sol.h = np.abs(sol.h)
        tab = table_from_solution(s, sol)
        if np.any(tab.p.sum(axis=1) + tab.pv2g.sum(axis=0) - tab.pg2v.sum(axis=0) < 0):
            continue
        dem = derive_demand_from_dispatch(tab)
        rep = validate_schedule(s, dem, sol, SOLVER_TOLERANCES)
        assert not rep.by_tag("power-balance") and not rep.by_tag("heat-balance")
