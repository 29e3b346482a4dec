import numpy as np
import pytest

from chpuc.dispatch import (SchemaError, check_pev_power_columns, read_dispatch_csv, solution_from_table,
                            table_from_solution, write_dispatch_csv)
from chpuc.io import ParseError, emit_system, load_system, parse_system
from chpuc.model import InvariantError, PAPER_REPLAY_TOLERANCES, ScheduleSolution, UnitKind
from chpuc.scenario import ScenarioConfig, scenario_system, validate_dispatch

from conftest import DATA_PKG

TABLE4_HEADER = ("hour,P_U1,P_U2,P_U3,P_U4,P_U5,P_U6,P_U7,P_U8,P_U9,P_U10,H_U9,H_U10,H_Boiler,"
                 "N_dsch,Pv2g,hourly_cost")
TABLE5_HEADER = ("hour,P_U1,P_U2,P_U3,P_U4,P_U5,P_U6,P_U7,P_U8,P_U9,P_U10,H_U9,H_U10,H_Boiler,"
                 "N_dsch,Pv2g,N_ch,Pg2v,hourly_cost")

SMALL = """\
# two units and a lot
[units]
id, kind, a, b, c, d, e, f, p_min, p_max, h_min, h_max, t_up_min, t_down_min, startup_cost, shutdown_cost, initial_status
G1, thermal, 100, 20, 0.01, 0, 0, 0, 10, 100, , , 2, 1, 300, 0, -1
C1, chp, 150, 15, 0.02, 2, 0.02, 0.01, , , , , 1, 1, 0, 0, 3

[for C1]
p, h
20, 0
90, 0
75, 60
15, 40

[lots]
id, fleet_size, pv, delta, eta, pi, grid_charging
L1, 10, 1000, 0.5, 0.9, 2, false

[demand]
hour, pd, hd, rd
1, 80, 20, 8
2, 120, 30, 12
"""


def test_reference_dataset(reference_system):
    kinds = [u.kind for u in reference_system.units]
    assert kinds.count(UnitKind.THERMAL) == 8
    assert kinds.count(UnitKind.CHP) == 2
    assert kinds.count(UnitKind.HEAT_ONLY) == 1
    assert len(reference_system.lots) == 1 and reference_system.lots[0].fleet_size == 50000
    assert reference_system.demand.horizon == 24


def test_parse_small():
    s = parse_system(SMALL)
    assert [u.id for u in s.units] == ["G1", "C1"]
    assert s.units[1].for_polygon.vertices[0] == (20, 0)
    assert s.demand.pd.tolist() == [80, 120]


def test_empty_file_parse_error(tmp_path):
    f = tmp_path / "empty.txt"
    f.write_text("")
    with pytest.raises(ParseError) as e:
        load_system(f)
    assert e.value.line == 1


def test_bad_number_reports_position():
    bad = SMALL.replace("G1, thermal, 100,", "G1, thermal, x1,")
    with pytest.raises(ParseError) as e:
        parse_system(bad)
    assert e.value.line == 4 and e.value.column > 1


def test_ragged_row():
    bad = SMALL.replace("L1, 10, 1000, 0.5, 0.9, 2, false", "L1, 10, 1000, 0.5")
    with pytest.raises(ParseError):
        parse_system(bad)


def test_pmin_above_pmax_names_unit():
    bad = SMALL.replace("10, 100, , , 2, 1", "150, 100, , , 2, 1")
    with pytest.raises(InvariantError) as e:
        parse_system(bad)
    assert "G1" in str(e.value) and e.value.field == "p_min"


def test_emit_round_trip(reference_system, tmp_path):
    s2 = parse_system(emit_system(reference_system))
    assert s2 == reference_system
    s = parse_system(SMALL)
    f = tmp_path / "sys.txt"
    f.write_text(emit_system(s))
    assert load_system(f) == s


def test_golden_headers(reference_system):
    sol = _random_solution(reference_system, 2)
    for scen, header in ((2, TABLE4_HEADER), (3, TABLE5_HEADER)):
        ss = scenario_system(reference_system, ScenarioConfig(scen))
        text = write_dispatch_csv(table_from_solution(ss, sol))
        assert text.splitlines()[0] == header
    assert (DATA_PKG / "table4.csv").read_text().splitlines()[0] == TABLE4_HEADER
    assert (DATA_PKG / "table5.csv").read_text().splitlines()[0] == TABLE5_HEADER


def _random_solution(system, scen, seed=0):
    rng = np.random.default_rng(seed)
    N, T = system.n_units, 24
    x = rng.integers(0, 2, (N, T))
    p = rng.uniform(0, 100, (N, T)).round(3) * x
    h = rng.uniform(0, 50, (N, T)).round(3) * x
    for i, u in enumerate(system.units):
        if u.kind is UnitKind.THERMAL:
            h[i] = 0
        if u.kind is UnitKind.HEAT_ONLY:
            p[i] = 0
    nd = rng.integers(0, 3000, (1, T)).astype(float)
    nc = rng.integers(0, 3000, (1, T)).astype(float)
    return ScheduleSolution(x=x, p=p, h=h, n_dsch=nd, n_ch=nc, hourly_cost=rng.uniform(1e4, 4e4, T).round(2))


def test_dispatch_round_trip(reference_system):
    ss = scenario_system(reference_system, ScenarioConfig(3))
    sol = _random_solution(ss, 3)
    tab = table_from_solution(ss, sol)
    text = write_dispatch_csv(tab)
    back = read_dispatch_csv(text)
    assert back.columns() == tab.columns()
    np.testing.assert_allclose(back.p, tab.p, atol=1e-9)
    np.testing.assert_allclose(back.h, tab.h, atol=1e-9)
    np.testing.assert_allclose(back.pg2v, tab.pg2v, atol=1e-9)
    assert write_dispatch_csv(back) == text
    sol2 = solution_from_table(ss, back)
    on = (sol.p != 0) | (sol.h != 0)
    assert np.array_equal(sol2.x, on.astype(int))


def test_dispatch_schema_errors():
    with pytest.raises(SchemaError, match="empty"):
        read_dispatch_csv("\n")
    with pytest.raises(SchemaError, match="no hourly rows"):
        read_dispatch_csv("hour,P_A,hourly_cost\n")
    with pytest.raises(SchemaError):
        read_dispatch_csv("hour,P_A,hourly_cost\n1,2\n")
    with pytest.raises(SchemaError):
        read_dispatch_csv("hour,P_A,Foo,hourly_cost\n1,2,3,4\n")
    with pytest.raises(SchemaError):
        read_dispatch_csv("hour,P_A,hourly_cost\n2,2,3\n")


def test_table4_pev_columns_consistent(reference_system):
    ss = scenario_system(reference_system, ScenarioConfig(2))
    tab = read_dispatch_csv(DATA_PKG / "table4.csv")
    assert check_pev_power_columns(ss, tab, PAPER_REPLAY_TOLERANCES) == []


def test_table4_replay_profiles(reference_system):
    assert validate_dispatch(reference_system, DATA_PKG / "table4.csv", "paper-replay").feasible
    assert not validate_dispatch(reference_system, DATA_PKG / "table4.csv", "solver").feasible


def test_table5_known_anomalies(reference_system):
    rep = validate_dispatch(reference_system, DATA_PKG / "table5.csv", "paper-replay")
    # hour 2's printed Pg2v is off by 0.09 MW, inside the 0.1 MW allowance
    assert not [v for v in rep if v.hour == 2]
    assert {v.tag for v in rep} <= {"power-balance", "pev-power"}
