"""Canonical JSON files for scenarios, glued scenarios and chains.

Rationals are written as ``"p/q"`` strings (integers as ``"p"``), matrices
row-major, cells indexed from 0. Glued scenarios and chains refer to their
scenario files by paths relative to their own location.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

from .exactlin import Matrix, parse_scalar
from .invariant import CrossTrajectory, GluedScenario
from .localsys import Cell3, CwModel, Face, HomChain, ModelError, Representation
from .morse import ABSOLUTE, CriticalPoint, MorseData, Trajectory
from .scenario import Boundary, Scenario

FORMAT_VERSION = 1


class InputError(ValueError):
    """Unreadable or malformed input file."""


# ---------------------------------------------------------------- writing


def _steps(steps) -> list[list[int]]:
    return [[e, d] for e, d in steps]


def scenario_to_dict(sc: Scenario) -> dict:
    m, md = sc.model, sc.morse
    return {
        "format": FORMAT_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "fiber_dim": sc.rep.fiber_dim,
        "model": {
            "vertices": m.n_vertices,
            "edges": [[a, b] for a, b in m.edges],
            "faces": [{"base": f.base, "word": _steps(f.word)} for f in m.faces],
            "cells3": [
                {"base": c.base, "boundary": [{"face": f, "coeff": k, "path": _steps(p)} for f, k, p in c.boundary]}
                for c in m.cells3
            ],
        },
        "holonomy": [g.to_json() for g in sc.rep.holonomy],
        "morse": {
            "kind": md.kind,
            "critical_points": [{"name": p.name, "index": p.index, "vertex": p.vertex} for p in md.critical_points],
            "trajectories": [
                {"source": t.source, "target": t.target, "sign": t.sign, "path": _steps(t.steps)}
                for t in md.trajectories
            ],
            "c_f": None if md.c_f is None else list(md.c_f),
        },
        "boundary": (
            None
            if sc.boundary is None
            else {
                "vertices": list(sc.boundary.vertices),
                "edges": list(sc.boundary.edges),
                "faces": list(sc.boundary.faces),
            }
        ),
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix="." + path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_scenario(sc: Scenario, path: str | os.PathLike) -> None:
    write_atomic(path, dumps(scenario_to_dict(sc)))


def _relative(target: str | os.PathLike, start_file: str | os.PathLike) -> str:
    return os.path.relpath(os.fspath(target), os.path.dirname(os.path.abspath(start_file)) or ".")


def glued_to_dict(gs: GluedScenario, a_path: str, b_path: str) -> dict:
    return {
        "format": FORMAT_VERSION,
        "name": gs.name,
        "a": a_path,
        "b": b_path,
        "vertex_pairs": [list(p) for p in gs.vertex_pairs],
        "edge_pairs": [list(p) for p in gs.edge_pairs],
        "face_pairs": [list(p) for p in gs.face_pairs],
        "cross": [
            {"source": c.source, "target": c.target, "sign": c.sign, "path": [[p, e, d] for p, e, d in c.steps]}
            for c in gs.cross
        ],
    }


def save_glued(
    gs: GluedScenario, path: str | os.PathLike, a_path: str | os.PathLike, b_path: str | os.PathLike
) -> None:
    """Write the glued file; the part scenarios are written to ``a_path`` and ``b_path``."""
    save_scenario(gs.a, a_path)
    save_scenario(gs.b, b_path)
    write_atomic(path, dumps(glued_to_dict(gs, _relative(a_path, path), _relative(b_path, path))))


def chain_to_dict(chain: HomChain, scenario_ref: Optional[str] = None) -> dict:
    return {
        "format": FORMAT_VERSION,
        "scenario": scenario_ref,
        "fiber_dim": chain.fiber_dim,
        "coefficients": [c.to_json() for c in chain.coefficients],
    }


def save_chain(chain: HomChain, path: str | os.PathLike, scenario_path: Optional[str | os.PathLike] = None) -> None:
    ref = None if scenario_path is None else _relative(scenario_path, path)
    write_atomic(path, dumps(chain_to_dict(chain, ref)))


# ---------------------------------------------------------------- reading


class _Reader:
    """Typed field access that reports the JSON location of any problem."""

    def __init__(self, source: str):
        self.source = source

    def fail(self, where: str, msg: str):
        raise InputError(f"{self.source}: {where}: {msg}")

    def get(self, obj, key, where, kind=None, optional=False):
        if not isinstance(obj, dict):
            self.fail(where, "expected an object")
        if key not in obj:
            if optional:
                return None
            self.fail(where, f"missing field {key!r}")
        value = obj[key]
        if value is None and optional:
            return None
        if kind is not None:
            self.expect(value, kind, f"{where}.{key}")
        return value

    def expect(self, value, kind, where):
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            self.fail(where, f"expected an integer, got {value!r}")
        if kind is not int and not isinstance(value, kind):
            self.fail(where, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
        return value

    def ints(self, value, where) -> list[int]:
        self.expect(value, list, where)
        return [self.expect(v, int, f"{where}[{i}]") for i, v in enumerate(value)]

    def steps(self, value, where) -> tuple[tuple[int, int], ...]:
        self.expect(value, list, where)
        out = []
        for i, s in enumerate(value):
            pair = self.ints(s, f"{where}[{i}]")
            if len(pair) != 2:
                self.fail(f"{where}[{i}]", "a step is [edge, direction]")
            out.append((pair[0], pair[1]))
        return tuple(out)

    def matrix(self, value, n, where) -> Matrix:
        self.expect(value, list, where)
        if len(value) != n:
            self.fail(where, f"expected {n} rows")
        rows = []
        for i, r in enumerate(value):
            self.expect(r, list, f"{where}[{i}]")
            if len(r) != n:
                self.fail(f"{where}[{i}]", f"expected {n} entries")
            row = []
            for j, x in enumerate(r):
                try:
                    row.append(parse_scalar(x))
                except (TypeError, ValueError, ZeroDivisionError):
                    self.fail(f"{where}[{i}][{j}]", f"not an exact rational: {x!r}")
            rows.append(row)
        return Matrix.from_rows(rows, n)


def _load_json(path: str | os.PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def scenario_from_dict(data: Any, source: str = "<scenario>") -> Scenario:
    r = _Reader(source)
    n = r.get(data, "fiber_dim", "$", int)
    if n < 1:
        r.fail("$.fiber_dim", "must be positive")
    mj = r.get(data, "model", "$", dict)
    nv = r.get(mj, "vertices", "$.model", int)
    edges = []
    for k, e in enumerate(r.get(mj, "edges", "$.model", list)):
        pair = r.ints(e, f"$.model.edges[{k}]")
        if len(pair) != 2:
            r.fail(f"$.model.edges[{k}]", "an edge is [init, term]")
        edges.append(tuple(pair))
    faces = []
    for k, f in enumerate(r.get(mj, "faces", "$.model", list, optional=True) or []):
        w = f"$.model.faces[{k}]"
        faces.append(Face(r.get(f, "base", w, int), r.steps(r.get(f, "word", w, list), w + ".word")))
    cells = []
    for k, c in enumerate(r.get(mj, "cells3", "$.model", list, optional=True) or []):
        w = f"$.model.cells3[{k}]"
        terms = []
        for j, t in enumerate(r.get(c, "boundary", w, list)):
            wt = f"{w}.boundary[{j}]"
            terms.append(
                (
                    r.get(t, "face", wt, int),
                    r.get(t, "coeff", wt, int),
                    r.steps(r.get(t, "path", wt, list), wt + ".path"),
                )
            )
        cells.append(Cell3(r.get(c, "base", w, int), tuple(terms)))
    hol_raw = r.get(data, "holonomy", "$", list)
    if len(hol_raw) != len(edges):
        r.fail("$.holonomy", f"expected one matrix per edge ({len(edges)}), got {len(hol_raw)}")
    hol = [r.matrix(h, n, f"$.holonomy[{k}]") for k, h in enumerate(hol_raw)]
    try:
        model = CwModel(nv, tuple(edges), tuple(faces), tuple(cells))
        rep = Representation(n, tuple(hol))
    except ModelError as exc:
        raise InputError(f"{source}: {exc}") from None

    mdj = r.get(data, "morse", "$", dict)
    pts = []
    for k, p in enumerate(r.get(mdj, "critical_points", "$.morse", list)):
        w = f"$.morse.critical_points[{k}]"
        pts.append(CriticalPoint(r.get(p, "name", w, str), r.get(p, "index", w, int), r.get(p, "vertex", w, int)))
    trajs = []
    for k, t in enumerate(r.get(mdj, "trajectories", "$.morse", list)):
        w = f"$.morse.trajectories[{k}]"
        sign = r.get(t, "sign", w, int)
        if sign not in (1, -1):
            r.fail(w + ".sign", "must be 1 or -1")
        trajs.append(
            Trajectory(
                r.get(t, "source", w, str),
                r.get(t, "target", w, str),
                sign,
                r.steps(r.get(t, "path", w, list), w + ".path"),
            )
        )
    cf = r.get(mdj, "c_f", "$.morse", list, optional=True)
    c_f = None if cf is None else r.ints(cf, "$.morse.c_f")
    kind = r.get(mdj, "kind", "$.morse", str, optional=True) or ABSOLUTE
    try:
        md = MorseData(tuple(pts), tuple(trajs), c_f, kind)
    except ModelError as exc:
        raise InputError(f"{source}: {exc}") from None

    bj = r.get(data, "boundary", "$", dict, optional=True)
    boundary = None
    if bj is not None:
        boundary = Boundary(
            r.ints(r.get(bj, "vertices", "$.boundary", list), "$.boundary.vertices"),
            r.ints(r.get(bj, "edges", "$.boundary", list), "$.boundary.edges"),
            r.ints(r.get(bj, "faces", "$.boundary", list), "$.boundary.faces"),
        )
    name = r.get(data, "name", "$", str, optional=True) or ""
    seed = r.get(data, "seed", "$", int, optional=True)
    return Scenario(model, rep, md, boundary, name, seed)


def load_scenario(path: str | os.PathLike) -> Scenario:
    """Parse a scenario file. Semantic checks are left to ``Scenario.validate``."""
    return scenario_from_dict(_load_json(path), os.fspath(path))


def _resolve(ref: str, relative_to: str | os.PathLike) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(relative_to)), ref)


def load_glued(path: str | os.PathLike) -> GluedScenario:
    data = _load_json(path)
    r = _Reader(os.fspath(path))
    a = load_scenario(_resolve(r.get(data, "a", "$", str), path))
    b = load_scenario(_resolve(r.get(data, "b", "$", str), path))

    def pairs(key):
        out = []
        for k, p in enumerate(r.get(data, key, "$", list, optional=True) or []):
            pair = r.ints(p, f"$.{key}[{k}]")
            if len(pair) != 2:
                r.fail(f"$.{key}[{k}]", "a pairing is [a_cell, b_cell]")
            out.append(tuple(pair))
        return tuple(out)

    cross = []
    for k, c in enumerate(r.get(data, "cross", "$", list, optional=True) or []):
        w = f"$.cross[{k}]"
        steps = []
        for j, s in enumerate(r.get(c, "path", w, list)):
            ws = f"{w}.path[{j}]"
            r.expect(s, list, ws)
            if len(s) != 3 or s[0] not in ("a", "b"):
                r.fail(ws, 'a cross step is ["a" or "b", edge, direction]')
            steps.append((s[0], r.expect(s[1], int, ws), r.expect(s[2], int, ws)))
        sign = r.get(c, "sign", w, int)
        if sign not in (1, -1):
            r.fail(w + ".sign", "must be 1 or -1")
        cross.append(CrossTrajectory(r.get(c, "source", w, str), r.get(c, "target", w, str), sign, tuple(steps)))
    name = r.get(data, "name", "$", str, optional=True) or "glued"
    return GluedScenario(a, b, pairs("vertex_pairs"), pairs("edge_pairs"), pairs("face_pairs"), tuple(cross), name)


def load_chain(path: str | os.PathLike, scenario: Optional[Scenario] = None) -> tuple[HomChain, Scenario]:
    """Read a chain file; its scenario comes from ``scenario`` or the file's own reference."""
    data = _load_json(path)
    r = _Reader(os.fspath(path))
    if scenario is None:
        ref = r.get(data, "scenario", "$", str, optional=True)
        if ref is None:
            r.fail("$.scenario", "chain file names no scenario and none was given")
        scenario = load_scenario(_resolve(ref, path))
    n = r.get(data, "fiber_dim", "$", int)
    if n != scenario.rep.fiber_dim:
        r.fail("$.fiber_dim", f"scenario has fiber dimension {scenario.rep.fiber_dim}")
    coeffs = r.get(data, "coefficients", "$", list)
    if len(coeffs) != len(scenario.model.edges):
        r.fail("$.coefficients", f"expected one matrix per edge ({len(scenario.model.edges)})")
    mats = tuple(r.matrix(c, n, f"$.coefficients[{k}]") for k, c in enumerate(coeffs))
    return HomChain(scenario.model, n, mats), scenario


__all__ = [
    "InputError",
    "scenario_to_dict",
    "scenario_from_dict",
    "save_scenario",
    "load_scenario",
    "glued_to_dict",
    "save_glued",
    "load_glued",
    "chain_to_dict",
    "save_chain",
    "load_chain",
    "write_atomic",
    "dumps",
]
