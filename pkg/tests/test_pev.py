import numpy as np
import pytest
from hypothesis import given, strategies as st

from chpuc.dispatch import read_dispatch_csv
from chpuc.io import load_reference_system
from chpuc.model import PAPER_REPLAY_TOLERANCES, SOLVER_TOLERANCES, ParkingLot, PowerSystem
from chpuc.pev import check_fleet_constraints, fleet_power, load_min_discharge_profile, per_vehicle_power
from chpuc.scenario import ScenarioConfig, configure_lots

from conftest import DATA_PKG


def _lot(pv=15.0, delta=0.5, eta=0.85, fleet=50000, **kw):
    return ParkingLot(id="PL", fleet_size=fleet, pv=pv, delta=delta, eta=eta, pi=2.0, **kw)


def test_per_vehicle_power_examples():
    assert per_vehicle_power(_lot()) == pytest.approx(0.006375, abs=1e-15)
    assert per_vehicle_power(_lot(delta=0)) == 0
    assert per_vehicle_power(_lot(pv=25, delta=1, eta=1)) == pytest.approx(0.025, abs=1e-15)


def test_fleet_power_examples():
    lot = _lot()
    assert round(fleet_power(lot, 1291), 2) == 8.23
    assert fleet_power(lot, 3400) == pytest.approx(21.675, abs=1e-9)
    assert fleet_power(lot, 0) == 0
    with pytest.raises(ValueError):
        fleet_power(lot, -1)
    with pytest.raises(ValueError):
        fleet_power(lot, 50001)


@given(st.integers(0, 25000), st.integers(0, 25000))
def test_fleet_power_linear(a, b):
    lot = _lot()
    assert fleet_power(lot, a) + fleet_power(lot, b) == pytest.approx(fleet_power(lot, a + b), rel=1e-12, abs=1e-12)


@given(st.floats(0.1, 100), st.floats(0, 1), st.floats(0.01, 1))
def test_per_vehicle_power_range(pv, delta, eta):
    v = per_vehicle_power(_lot(pv=pv, delta=delta, eta=eta))
    assert 0 <= v <= pv / 1000


def test_table5_totals():
    tab = read_dispatch_csv(DATA_PKG / "table5.csv")
    assert tab.n_dsch.sum() == 49987
    assert tab.n_ch.sum() == 49991
    lot = configure_lots_for(3)
    assert check_fleet_constraints([lot], tab.n_dsch, tab.n_ch, PAPER_REPLAY_TOLERANCES) == []
    exact = check_fleet_constraints([lot], tab.n_dsch, tab.n_ch, SOLVER_TOLERANCES)
    assert {v.tag for v in exact} == {"fleet-total-dsch", "fleet-total-ch"}


def configure_lots_for(scenario, T=24):
    s = load_reference_system()
    return configure_lots(PowerSystem(units=s.units, lots=s.lots), ScenarioConfig(scenario), T)[0]


def _fill_to_total(nd, prof, total=50000, cap=5000):
    """Top up the hours without a minimum until the daily total is met."""
    short = total - nd.sum()
    for t in range(nd.size):
        if prof[t] == 0:
            add = min(cap - nd[t], short)
            nd[t] += add
            short -= add
    assert short == 0
    return nd


def test_scenario2_has_no_charging_checks():
    lot = configure_lots_for(2)
    prof = load_min_discharge_profile()
    nd = _fill_to_total(prof.copy(), prof)
    assert check_fleet_constraints([lot], nd[None], np.zeros((1, 24))) == []


def test_table3_minimum_breach():
    lot = configure_lots_for(2)
    prof = load_min_discharge_profile()
    assert prof[9] == 3400 and prof.size == 24
    nd = prof.copy()
    nd[9] = 3399
    nd = _fill_to_total(nd, prof)
    viol = check_fleet_constraints([lot], nd[None], np.zeros((1, 24)))
    assert len(viol) == 1
    v = viol[0]
    assert v.tag == "fleet-hourly-dsch" and v.hour == 10 and v.residual == pytest.approx(1)


def test_scenario_caps():
    assert configure_lots_for(2).n_dsch_max[0] == 5000
    l3 = configure_lots_for(3)
    assert l3.n_dsch_max[0] == 10000 and l3.n_ch_max[0] == 10000 and l3.grid_charging


def test_matches_direct_inequalities():
    rng = np.random.default_rng(2)
    T, fleet = 4, 12
    lot = ParkingLot(id="L", fleet_size=fleet, pv=10, delta=0.5, eta=0.9, n_dsch_min=[0, 1, 0, 2],
                     n_dsch_max=[5, 5, 4, 5], n_ch_min=[0, 0, 0, 0], n_ch_max=[6, 6, 6, 6], grid_charging=True)
    for _ in range(1000):
        nd = rng.integers(0, 7, (1, T)).astype(float)
        nc = rng.integers(0, 8, (1, T)).astype(float)
        if rng.random() < 0.3:
            nd[0, -1] += fleet - nd.sum()
        got = check_fleet_constraints([lot], nd, nc)
        want = set()
        if nd.sum() != fleet:
            want.add(("fleet-total-dsch", 0))
        if nc.sum() != fleet:
            want.add(("fleet-total-ch", 0))
        for t in range(T):
            if nd[0, t] < lot.n_dsch_min[t] or nd[0, t] > lot.n_dsch_max[t]:
                want.add(("fleet-hourly-dsch", t + 1))
            if nc[0, t] > lot.n_ch_max[t]:
                want.add(("fleet-hourly-ch", t + 1))
        assert {(v.tag, v.hour) for v in got} == want
