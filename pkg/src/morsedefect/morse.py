"""Combinatorial Morse data and the twisted Morse-Smale complex built from it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactlin import Matrix, lattice_membership
from .localsys import (
    ComplexError,
    CwModel,
    ModelError,
    PathWord,
    Representation,
    TwistedComplex,
    flatness_defects,
    path_holonomy,
)
from .report import Report

TOP_INDEX = 3
ABSOLUTE = "absolute"
RELATIVE = "relative"


@dataclass(frozen=True)
class CriticalPoint:
    name: str
    index: int
    vertex: int


@dataclass(frozen=True)
class Trajectory:
    """A flow line ``source -> target`` recorded as an edge path and a sign."""

    source: str
    target: str
    sign: int
    steps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ModelError(f"trajectory sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "steps", tuple((int(e), int(d)) for e, d in self.steps))


@dataclass(frozen=True)
class MorseData:
    """Critical points, trajectories and (optionally) the bounding chain ``c_f``.

    ``kind`` records which homology the Morse complex computes: ``"absolute"``
    for closed manifolds or functions decreasing towards the boundary,
    ``"relative"`` for functions increasing into the interior from the
    boundary.
    """

    critical_points: tuple[CriticalPoint, ...] = ()
    trajectories: tuple[Trajectory, ...] = ()
    c_f: Optional[tuple[int, ...]] = None
    kind: str = ABSOLUTE
    _by_name: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        cps = tuple(self.critical_points)
        object.__setattr__(self, "critical_points", cps)
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if self.c_f is not None:
            object.__setattr__(self, "c_f", tuple(int(c) for c in self.c_f))
        if self.kind not in (ABSOLUTE, RELATIVE):
            raise ModelError(f"unknown Morse data kind {self.kind!r}")
        names = {}
        for p in cps:
            if p.name in names:
                raise ModelError(f"duplicate critical point name {p.name!r}")
            names[p.name] = p
        object.__setattr__(self, "_by_name", names)

    def point(self, name: str) -> CriticalPoint:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown critical point {name!r}") from None

    def of_index(self, i: int) -> list[CriticalPoint]:
        return [p for p in self.critical_points if p.index == i]

    def position(self, name: str) -> int:
        """Position of a point among the points of its index (declaration order)."""
        p = self.point(name)
        return [q.name for q in self.of_index(p.index)].index(name)

    def path(self, t: Trajectory) -> PathWord:
        return PathWord(self.point(t.source).vertex, t.steps)

    def signed_points(self, n_vertices: int) -> list[int]:
        """The 0-chain sum of (-1)^ind(p) p."""
        out = [0] * n_vertices
        for p in self.critical_points:
            out[p.vertex] += (-1) ** p.index
        return out

    def with_c_f(self, c_f: Optional[Sequence[int]]) -> "MorseData":
        return MorseData(self.critical_points, self.trajectories, None if c_f is None else tuple(c_f), self.kind)


@dataclass(frozen=True)
class MorseComplex:
    complex: TwistedComplex
    labels: tuple[tuple[str, ...], ...]
    fiber_dim: int

    def block(self, G: Matrix, row_name: str, col_name: str, md: MorseData) -> Matrix:
        """The ``n x n`` block of a map between Morse chain groups."""
        n = self.fiber_dim
        r, c = md.position(row_name) * n, md.position(col_name) * n
        return G.submatrix(range(r, r + n), range(c, c + n))


def _structural_problems(model: CwModel, md: MorseData) -> list[tuple[str, str]]:
    out = []
    for p in md.critical_points:
        if not 0 <= p.index <= TOP_INDEX:
            out.append(("index_range", f"{p.name} has index {p.index}"))
        if not 0 <= p.vertex < model.n_vertices:
            out.append(("vertex_range", f"{p.name} sits at missing vertex {p.vertex}"))
    for k, t in enumerate(md.trajectories):
        try:
            src, dst = md.point(t.source), md.point(t.target)
        except ModelError as exc:
            out.append(("trajectory_endpoints", f"trajectory {k}: {exc}"))
            continue
        if src.index != dst.index + 1:
            out.append(("index_adjacency", f"trajectory {k} runs from index {src.index} to index {dst.index}"))
        try:
            end = model.path_end(md.path(t))
        except ModelError as exc:
            out.append(("path_endpoints", f"trajectory {k}: {exc}"))
            continue
        if end != dst.vertex:
            out.append(("path_endpoints", f"trajectory {k} ends at vertex {end}, {dst.name} sits at {dst.vertex}"))
    return out


def morse_complex(model: CwModel, rep: Representation, md: MorseData) -> MorseComplex:
    """Blocks ``d_{q,p} = sum of sign * holonomy`` over trajectories ``p -> q``."""
    problems = _structural_problems(model, md)
    if problems:
        raise ModelError("; ".join(msg for _, msg in problems))
    n = rep.fiber_dim
    labels = tuple(tuple(p.name for p in md.of_index(i)) for i in range(TOP_INDEX + 1))
    dims = [len(l) * n for l in labels]
    blocks = [[[0] * dims[i] for _ in range(dims[i - 1] if i else 0)] for i in range(TOP_INDEX + 1)]
    for t in md.trajectories:
        i = md.point(t.source).index
        col0 = md.position(t.source) * n
        row0 = md.position(t.target) * n
        h = path_holonomy(rep, md.path(t))
        for r in range(n):
            for c in range(n):
                blocks[i][row0 + r][col0 + c] += t.sign * h[r, c]
    bounds = [Matrix.from_rows(blocks[i], dims[i]) if i else Matrix.zeros(0, dims[0]) for i in range(TOP_INDEX + 1)]
    cx = TwistedComplex(tuple(dims), tuple(bounds))
    bad = cx.square_defects()
    if bad:
        raise ComplexError(f"Morse boundary does not square to zero: d_{bad[0] - 1} d_{bad[0]} != 0")
    return MorseComplex(cx, labels, n)


def validate(model: CwModel, rep: Representation, md: MorseData) -> Report:
    """Check index adjacency, path endpoints, d^2 = 0, the ``c_f`` condition and flatness."""
    report = Report("validate")
    problems = _structural_problems(model, md)
    for key in ("index_range", "vertex_range", "trajectory_endpoints"):
        msgs = [m for k, m in problems if k == key]
        if msgs:
            report.add(key, False, violations=msgs)
    adj = [m for k, m in problems if k == "index_adjacency"]
    report.add("index_adjacency", not adj, violations=adj)
    ends = [m for k, m in problems if k == "path_endpoints"]
    report.add("path_endpoints", not ends, violations=ends)

    flat_bad = flatness_defects(model, rep)
    report.add("flatness", not flat_bad, faces=flat_bad)

    if problems:
        report.add("d_squared_zero", False, reason="structural problems prevent building the complex")
    else:
        try:
            morse_complex(model, rep, md)
            report.add("d_squared_zero", True)
        except ComplexError as exc:
            report.add("d_squared_zero", False, reason=str(exc))

    if md.c_f is None:
        try:
            solve_cf(model, md)
            report.add("c_f_boundary", True, note="c_f absent; an integral solution exists")
        except ValueError as exc:
            report.add("c_f_boundary", False, reason=str(exc))
    elif len(md.c_f) != len(model.edges):
        report.add("c_f_boundary", False, reason=f"c_f has {len(md.c_f)} entries for {len(model.edges)} edges")
    else:
        lhs = model.integral_boundary_of(md.c_f)
        rhs = md.signed_points(model.n_vertices)
        report.add("c_f_boundary", lhs == rhs, boundary=lhs, expected=rhs)
    return report


def solve_cf(model: CwModel, md: MorseData) -> list[int]:
    """An integral 1-chain whose boundary is the signed critical-point 0-chain."""
    target = md.signed_points(model.n_vertices)
    if not any(target):
        return [0] * len(model.edges)
    d1 = model.integral_d1()
    gens = [[d1[v][e] for v in range(model.n_vertices)] for e in range(len(model.edges))]
    sol = lattice_membership(gens, target)
    if sol is None:
        raise ValueError(
            f"signed critical points {target} are not an integral boundary "
            "(signed count is nonzero on some component)"
        )
    assert model.integral_boundary_of(sol) == target
    return sol


def resolved_c_f(model: CwModel, md: MorseData) -> tuple[int, ...]:
    """Supplied ``c_f`` after checking it, or a solved one."""
    if md.c_f is None:
        return tuple(solve_cf(model, md))
    if model.integral_boundary_of(md.c_f) != md.signed_points(model.n_vertices):
        raise ValueError("supplied c_f does not bound the signed critical points")
    return md.c_f


def mirror(model: CwModel, md: MorseData, suffix: str = "") -> MorseData:
    """Morse data of the negated function: index ``i -> 3 - i`` and every
    trajectory reversed. Signs are kept; ``validate`` confirms d^2 = 0."""
    pts = tuple(CriticalPoint(p.name + suffix, TOP_INDEX - p.index, p.vertex) for p in md.critical_points)
    trajs = []
    for t in md.trajectories:
        rev = md.path(t).inverse(model)
        trajs.append(Trajectory(t.target + suffix, t.source + suffix, t.sign, rev.steps))
    kind = RELATIVE if md.kind == ABSOLUTE else ABSOLUTE
    # signed point counts flip by (-1)^3, so the bounding chain flips too
    c_f = None if md.c_f is None else tuple(-c for c in md.c_f)
    return MorseData(pts, tuple(trajs), c_f, kind)


__all__ = [
    "CriticalPoint",
    "Trajectory",
    "MorseData",
    "MorseComplex",
    "morse_complex",
    "validate",
    "solve_cf",
    "resolved_c_f",
    "mirror",
    "ABSOLUTE",
    "RELATIVE",
]
