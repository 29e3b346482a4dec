"""Plain-text system files: bracketed sections of comma-separated tables.

Sections::

    [units]            id, kind, a, b, c, d, e, f, p_min, p_max, h_min, h_max,
                       t_up_min, t_down_min, startup_cost, shutdown_cost, initial_status
    [for <unit-id>]    p, h          (one vertex per row, either orientation)
    [lots]             id, fleet_size, pv, delta, eta, pi, grid_charging
    [bounds <lot-id>]  hour, n_dsch_min, n_dsch_max, n_ch_min, n_ch_max   (optional)
    [demand]           hour, pd, hd, rd      or a single line  derive-from: <dispatch csv>

Empty cells mean "absent". ``#`` starts a comment. Relative ``derive-from``
paths resolve against the system file's directory.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import ForPolygon
from .model import DemandProfile, GeneratingUnit, InvariantError, ParkingLot, PowerSystem, UnitKind

UNIT_COLS = ["id", "kind", "a", "b", "c", "d", "e", "f", "p_min", "p_max", "h_min", "h_max",
             "t_up_min", "t_down_min", "startup_cost", "shutdown_cost", "initial_status"]
LOT_COLS = ["id", "fleet_size", "pv", "delta", "eta", "pi", "grid_charging"]
BOUND_COLS = ["hour", "n_dsch_min", "n_dsch_max", "n_ch_min", "n_ch_max"]
DEMAND_COLS = ["hour", "pd", "hd", "rd"]
DEMAND_RESOLUTION = 0.05


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class _Section:
    def __init__(self, name: str, arg: str, line: int):
        self.name, self.arg, self.line = name, arg, line
        self.rows: list[tuple[int, list[tuple[int, str]]]] = []


def _split(text: str, lineno: int) -> list[tuple[int, str]]:
    cells, col = [], 1
    for part in text.split(","):
        lead = len(part) - len(part.lstrip())
        cells.append((col + lead, part.strip()))
        col += len(part) + 1
    return cells


def _sections(text: str) -> list[_Section]:
    out: list[_Section] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        s = line.strip()
        if s.startswith("["):
            if not s.endswith("]"):
                raise ParseError("unterminated section header", lineno, len(line))
            head = s[1:-1].split(None, 1)
            if not head:
                raise ParseError("empty section header", lineno, 1)
            out.append(_Section(head[0].lower(), head[1].strip() if len(head) > 1 else "", lineno))
            continue
        if not out:
            raise ParseError("content before the first section header", lineno, 1)
        out[-1].rows.append((lineno, _split(line, lineno)))
    if not out:
        raise ParseError("no sections found (empty file)", 1, 1)
    return out


def _table(sec: _Section, expected: list[str], required: Optional[list[str]] = None) -> list[dict]:
    if not sec.rows:
        raise ParseError(f"section [{sec.name}] has no header row", sec.line, 1)
    hline, hcells = sec.rows[0]
    names = [c for _, c in hcells]
    for (col, name) in hcells:
        if name not in expected:
            raise ParseError(f"unknown column {name!r} in [{sec.name}]", hline, col)
    for name in required or expected:
        if name not in names:
            raise ParseError(f"missing column {name!r} in [{sec.name}]", hline, 1)
    recs = []
    for lineno, cells in sec.rows[1:]:
        if len(cells) != len(names):
            raise ParseError(f"expected {len(names)} cells, found {len(cells)}", lineno,
                             cells[min(len(cells), len(names)) - 1][0])
        recs.append({n: (lineno, col, v) for n, (col, v) in zip(names, cells)})
    return recs


def _num(rec, key, kind=float, optional=False):
    if key not in rec:
        if optional:
            return None
        raise KeyError(key)
    lineno, col, v = rec[key]
    if v == "":
        if optional:
            return None
        raise ParseError(f"value for {key!r} is required", lineno, col)
    try:
        if kind is int:
            fv = float(v)
            if fv != int(fv):
                raise ValueError
            return int(fv)
        return float(v)
    except ValueError:
        raise ParseError(f"cannot read {v!r} as {kind.__name__} for {key!r}", lineno, col) from None


def _bool(rec, key):
    lineno, col, v = rec[key]
    if v.lower() in ("true", "yes", "1"):
        return True
    if v.lower() in ("false", "no", "0", ""):
        return False
    raise ParseError(f"cannot read {v!r} as a flag", lineno, col)


def parse_system(text: str, base_dir: Path | None = None) -> PowerSystem:
    secs = _sections(text)
    fors: dict[str, ForPolygon] = {}
    bounds: dict[str, dict] = {}
    units_sec = lots_sec = demand_sec = None
    for sec in secs:
        if sec.name == "units":
            units_sec = sec
        elif sec.name == "lots":
            lots_sec = sec
        elif sec.name == "demand":
            demand_sec = sec
        elif sec.name == "for":
            if not sec.arg:
                raise ParseError("[for] needs a unit id", sec.line, 1)
            pts = [(_num(r, "p"), _num(r, "h")) for r in _table(sec, ["p", "h"])]
            try:
                fors[sec.arg] = ForPolygon.from_points(pts)
            except ValueError as exc:
                raise InvariantError(f"unit {sec.arg}", "for_polygon", str(exc)) from None
        elif sec.name == "bounds":
            recs = _table(sec, BOUND_COLS, ["hour"])
            recs.sort(key=lambda r: _num(r, "hour", int))
            bounds[sec.arg] = {k: [_num(r, k, optional=True) for r in recs] for k in BOUND_COLS[1:]}
        else:
            raise ParseError(f"unknown section [{sec.name}]", sec.line, 2)
    if units_sec is None:
        raise ParseError("missing [units] section", 1, 1)

    units = []
    for r in _table(units_sec, UNIT_COLS, ["id", "kind"]):
        uid = r["id"][2]
        lineno, col, kind = r["kind"]
        try:
            kind = UnitKind(kind)
        except ValueError:
            raise ParseError(f"unknown unit kind {kind!r}", lineno, col) from None
        kw = {k: _num(r, k, optional=True) for k in ("a", "b", "c", "d", "e", "f", "startup_cost", "shutdown_cost")}
        kw = {k: v for k, v in kw.items() if v is not None}
        for k in ("p_min", "p_max", "h_min", "h_max"):
            kw[k] = _num(r, k, optional=True)
        for k in ("t_up_min", "t_down_min", "initial_status"):
            v = _num(r, k, int, optional=True)
            if v is not None:
                kw[k] = v
        units.append(GeneratingUnit(id=uid, kind=kind, for_polygon=fors.pop(uid, None), **kw))
    if fors:
        raise InvariantError(f"unit {next(iter(fors))}", "for_polygon", "belongs to no unit")

    lots = []
    if lots_sec is not None:
        for r in _table(lots_sec, LOT_COLS, ["id", "fleet_size", "pv", "delta", "eta"]):
            lid = r["id"][2]
            kw = {}
            if lid in bounds:
                b = bounds.pop(lid)
                for k, vals in b.items():
                    if any(v is not None for v in vals):
                        kw[k] = np.array([np.nan if v is None else v for v in vals])
            lots.append(ParkingLot(id=lid, fleet_size=_num(r, "fleet_size", int), pv=_num(r, "pv"),
                                   delta=_num(r, "delta"), eta=_num(r, "eta"),
                                   pi=_num(r, "pi", optional=True) or 0.0,
                                   grid_charging=_bool(r, "grid_charging") if "grid_charging" in r else False,
                                   **_fill_bounds(kw, _num(r, "fleet_size", int))))
    if bounds:
        raise InvariantError(f"lot {next(iter(bounds))}", "bounds", "belongs to no lot")

    demand = None
    if demand_sec is not None:
        demand = _parse_demand(demand_sec, base_dir)
    return PowerSystem(units=units, lots=lots, demand=demand)


def _fill_bounds(kw, fleet):
    for k, v in list(kw.items()):
        fill = 0.0 if k.endswith("_min") else float(fleet)
        kw[k] = np.where(np.isnan(v), fill, v)
    return kw


def _parse_demand(sec: _Section, base_dir: Path | None) -> DemandProfile:
    if len(sec.rows) == 1 and sec.rows[0][1][0][1].lower().startswith("derive-from:"):
        lineno, cells = sec.rows[0]
        ref = ",".join(c for _, c in cells).split(":", 1)[1].strip()
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.exists():
            raise ParseError(f"derive-from file {ref!r} not found", lineno, cells[0][0])
        from .dispatch import derive_demand_from_dispatch, read_dispatch_csv
        return derive_demand_from_dispatch(read_dispatch_csv(path), resolution=DEMAND_RESOLUTION)
    recs = _table(sec, DEMAND_COLS)
    recs.sort(key=lambda r: _num(r, "hour", int))
    hours = [_num(r, "hour", int) for r in recs]
    if hours != list(range(1, len(recs) + 1)):
        raise ParseError("demand hours must cover 1..T exactly once", sec.line, 1)
    return DemandProfile(pd=[_num(r, "pd") for r in recs], hd=[_num(r, "hd") for r in recs],
                         rd=[_num(r, "rd") for r in recs])


def load_system(path: str | Path) -> PowerSystem:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read system file {path}: {exc}") from None
    return parse_system(text, base_dir=path.parent)


def reference_system_path() -> Path:
    return Path(str(resources.files("chpuc.data").joinpath("reference_system.txt")))


def load_reference_system() -> PowerSystem:
    return load_system(reference_system_path())


def _r(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    fv = float(v)
    return str(int(fv)) if fv.is_integer() and abs(fv) < 1e15 else repr(fv)


def emit_system(system: PowerSystem) -> str:
    """Text form of a system; ``parse_system`` of the result gives an equal model."""
    out = ["[units]", ", ".join(UNIT_COLS)]
    for u in system.units:
        out.append(", ".join([u.id, u.kind.value] + [_r(getattr(u, k)) for k in UNIT_COLS[2:]]))
    for u in system.units:
        if u.for_polygon is not None:
            out += ["", f"[for {u.id}]", "p, h"]
            out += [f"{_r(p)}, {_r(h)}" for p, h in u.for_polygon.vertices]
    if system.lots:
        out += ["", "[lots]", ", ".join(LOT_COLS)]
        for l in system.lots:
            out.append(", ".join([l.id] + [_r(getattr(l, k)) for k in LOT_COLS[1:]]))
        for l in system.lots:
            vecs = {k: getattr(l, k) for k in BOUND_COLS[1:]}
            if all(v is None for v in vecs.values()):
                continue
            T = next(len(v) for v in vecs.values() if v is not None)
            out += ["", f"[bounds {l.id}]", ", ".join(BOUND_COLS)]
            for t in range(T):
                out.append(", ".join([str(t + 1)] + [_r(None if v is None else v[t]) for v in vecs.values()]))
    if system.demand is not None:
        d = system.demand
        out += ["", "[demand]", ", ".join(DEMAND_COLS)]
        for t in range(d.horizon):
            out.append(f"{t + 1}, {_r(d.pd[t])}, {_r(d.hd[t])}, {_r(d.rd[t])}")
    return "\n".join(out) + "\n"


def save_system(system: PowerSystem, path: str | Path) -> None:
    Path(path).write_text(emit_system(system), encoding="utf-8")
