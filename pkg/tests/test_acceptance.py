"""Acceptance checks. Each test prints one PASS/FAIL line for its criterion."""
import time

import numpy as np
import pytest

from chpuc.benders import solve_chpuc_pev
from chpuc.cli import main
from chpuc.dispatch import read_dispatch_csv
from chpuc.kernels import GE, LE, LinearProgram, Status, dual_objective, solve_lp, solve_milp, solve_qp
from chpuc.io import load_reference_system
from chpuc.model import Tolerances
from chpuc.oracle import make_tiny_instance
from chpuc.pev import per_vehicle_power
from chpuc.scenario import ScenarioConfig, benders_options, scenario_system
from chpuc.validation import validate_schedule

from conftest import DATA_PKG
from factories import lot
from test_kernels import _enumerate_mixed, kkt_residuals, lp_feasibility, random_lp, random_qp

REF = DATA_PKG / "reference_system.txt"


@pytest.fixture
def verdict(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return say


def _timed_validate(name):
    t0 = time.perf_counter()
    code = main(["validate", "--system", str(REF), "--dispatch", str(DATA_PKG / name), "--profile", "paper-replay"])
    return code, time.perf_counter() - t0


def test_criterion_1_table4_replay(verdict):
    code, dt = _timed_validate("table4.csv")
    tab = read_dispatch_csv(DATA_PKG / "table4.csv")
    mins_ok = bool(np.all(tab.n_dsch[9:13] >= 3400))
    verdict(1, code == 0 and dt < 1.0 and mins_ok,
            f"table4.csv paper-replay exit {code}, {dt:.3f} s, hours 10-13 discharge >= 3400: {mins_ok}")


def test_criterion_2_table5_replay(verdict):
    code, dt = _timed_validate("table5.csv")
    tab = read_dispatch_csv(DATA_PKG / "table5.csv")
    totals = (int(tab.n_dsch.sum()), int(tab.n_ch.sum()))
    verdict(2, code == 0 and dt < 1.0,
            f"table5.csv paper-replay exit {code}, {dt:.3f} s, daily totals {totals[0]} / {totals[1]}")


def test_criterion_3_per_vehicle_power(verdict):
    p = per_vehicle_power(lot(pv=15, delta=0.5, eta=0.85))
    verdict(3, abs(p - 0.006375) <= 1e-15, f"per-vehicle power {p * 1000:.6f} kW")


@pytest.fixture(scope="module")
def corpus_runs(oracle_corpus):
    runs = []
    t0 = time.perf_counter()
    for rec in oracle_corpus:
        s = make_tiny_instance(rec["seed"])
        sol, trace = solve_chpuc_pev(s)
        runs.append((rec, s, sol, trace))
    return runs, time.perf_counter() - t0


def test_criterion_4_oracle_equivalence(corpus_runs, verdict):
    runs, dt = corpus_runs
    rel = [abs(sol.total_cost - rec["cost"]) / max(1.0, abs(rec["cost"])) for rec, _, sol, _ in runs]
    verdict(4, len(runs) == 20 and max(rel) <= 1e-4 and dt < 60.0,
            f"{len(runs)} instances, worst relative cost gap {max(rel):.2e}, {dt:.1f} s")


def test_criterion_6_benders_health(corpus_runs, verdict):
    runs, _ = corpus_runs
    worst_drop, worst_anchor = 0.0, 0.0
    for _, _, _, trace in runs:
        lbs = np.asarray(trace.lower_bounds)
        if len(lbs) > 1:
            worst_drop = max(worst_drop, float(-np.diff(lbs).min()))
        for _, const, rf in trace.anchors:
            worst_anchor = max(worst_anchor, abs(const - rf) / max(1.0, abs(rf)))
    verdict(6, worst_drop <= 1e-9 and worst_anchor <= 1e-6,
            f"largest lower-bound drop {worst_drop:.1e}, worst anchor residual {worst_anchor:.1e}")


def test_criterion_7_kernel_suites(verdict):
    rng = np.random.default_rng(0)
    duality = 0.0
    for _ in range(100):
        lp = random_lp(rng)
        out = solve_lp(lp)
        assert out.status is Status.OPTIMAL
        duality = max(duality, abs(out.objective - dual_objective(lp, out)) / (1 + abs(out.objective)),
                      lp_feasibility(lp, out.x))
    rng = np.random.default_rng(0)
    kkt = 0.0
    for _ in range(100):
        qp = random_qp(rng)
        out = solve_qp(qp)
        assert out.status is Status.OPTIMAL
        kkt = max(kkt, *kkt_residuals(qp, out))
    rng = np.random.default_rng(7)
    mismatch, count = 0, 0
    for _ in range(30):
        n_int = int(rng.integers(2, 15))
        n_cont = int(rng.integers(0, 3)) if n_int <= 10 else 0
        n, m = n_int + n_cont, int(rng.integers(2, 6))
        A = rng.integers(-5, 10, (m, n)).astype(float)
        x0 = np.concatenate([rng.integers(0, 2, n_int), rng.uniform(0, 3, n_cont)])
        b = A @ x0 + np.array([rng.uniform(0, 4)] * (m - 1) + [-rng.uniform(0, 4)])
        lp = LinearProgram(c=rng.normal(size=n), A=A, senses=[LE] * (m - 1) + [GE], b=b,
                           upper=np.concatenate([np.ones(n_int), np.full(n_cont, 3.0)]))
        ints = list(range(n_int))
        out = solve_milp(lp, ints)
        ref = _enumerate_mixed(lp, ints)
        count += 1
        mismatch += not (out.status is Status.OPTIMAL and abs(out.objective - ref) <= 1e-7 * max(1.0, abs(ref)))
    verdict(7, duality <= 1e-8 and kkt <= 1e-8 and mismatch == 0,
            f"LP duality/feasibility {duality:.1e}, QP KKT {kkt:.1e}, MILP mismatches {mismatch}/{count}")


@pytest.fixture(scope="module")
def reference_runs():
    ref = load_reference_system()
    out = {}
    for sc in (1, 2, 3):
        cfg = ScenarioConfig(sc)
        ss = scenario_system(ref, cfg)
        t0 = time.perf_counter()
        sol, trace = solve_chpuc_pev(ss, options=benders_options(cfg))
        out[sc] = (ss, sol, trace, time.perf_counter() - t0)
    return out


def test_criterion_5_scenario_ordering(reference_runs, verdict):
    cost = {sc: r[1].total_cost for sc, r in reference_runs.items()}
    ok_conv = all(r[2].converged and len(r[2].records) <= 200 and r[2].records[-1].gap <= 1e-4
                  and r[3] < 600.0 for r in reference_runs.values())
    detail = ", ".join(f"S{sc} {cost[sc]:,.2f} ({len(r[2].records)} it, {r[3]:.0f} s, gap {r[2].records[-1].gap:.1e})"
                       for sc, r in reference_runs.items())
    verdict(5, cost[2] <= cost[3] <= cost[1] and ok_conv, detail)


def test_criterion_8_final_feasibility(corpus_runs, reference_runs, verdict):
    tol = Tolerances()
    bad = []
    for rec, s, sol, _ in corpus_runs[0]:
        if len(validate_schedule(s, s.demand, sol, tol)):
            bad.append(f"seed {rec['seed']}")
    for sc, (ss, sol, _, _) in reference_runs.items():
        if len(validate_schedule(ss, ss.demand, sol, tol)):
            bad.append(f"scenario {sc}")
    n = len(corpus_runs[0]) + len(reference_runs)
    verdict(8, not bad, f"{n - len(bad)}/{n} solver schedules with empty reports at 1e-6" +
            (f"; violating: {', '.join(bad)}" if bad else ""))
