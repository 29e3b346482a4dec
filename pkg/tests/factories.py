"""Small hand-built systems for unit tests."""
import numpy as np

from chpuc.geometry import ForPolygon
from chpuc.model import DemandProfile, GeneratingUnit, ParkingLot, PowerSystem, UnitKind


def thermal(uid="G", a=100.0, b=20.0, c=0.01, p_min=10.0, p_max=100.0, up=1, down=1, st=0.0, sh=0.0, init=-1):
    return GeneratingUnit(id=uid, kind=UnitKind.THERMAL, a=a, b=b, c=c, p_min=p_min, p_max=p_max,
                          t_up_min=up, t_down_min=down, startup_cost=st, shutdown_cost=sh, initial_status=init)


def chp(uid="C", verts=((20, 0), (90, 0), (75, 60), (15, 40)), a=150.0, b=15.0, c=0.02, d=2.0, e=0.02, f=0.01,
        init=1):
    return GeneratingUnit(id=uid, kind=UnitKind.CHP, a=a, b=b, c=c, d=d, e=e, f=f,
                          for_polygon=ForPolygon.from_points(verts), initial_status=init)


def boiler(uid="B", d=4.0, e=0.03, h_max=60.0):
    return GeneratingUnit(id=uid, kind=UnitKind.HEAT_ONLY, d=d, e=e, h_min=0.0, h_max=h_max, initial_status=1)


def lot(uid="L", fleet=10, pv=1000.0, delta=0.5, eta=0.9, pi=2.0, T=2, cap=None, grid=False):
    cap = fleet if cap is None else cap
    return ParkingLot(id=uid, fleet_size=fleet, pv=pv, delta=delta, eta=eta, pi=pi,
                      n_dsch_min=np.zeros(T), n_dsch_max=np.full(T, float(cap)),
                      n_ch_min=np.zeros(T) if grid else None, n_ch_max=np.full(T, float(cap)) if grid else None,
                      grid_charging=grid)


def demand(pd, hd=None, rd=None):
    pd = np.asarray(pd, float)
    hd = np.zeros_like(pd) if hd is None else np.asarray(hd, float)
    rd = np.zeros_like(pd) if rd is None else np.asarray(rd, float)
    return DemandProfile(pd=pd, hd=hd, rd=rd)


def system(units, lots=(), dem=None):
    return PowerSystem(units=list(units), lots=list(lots), demand=dem)
