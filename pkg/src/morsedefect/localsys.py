"""Cell models, flat local systems and twisted cellular chains.

Conventions used throughout the package:

* A path is a base vertex plus steps ``(edge, +1)`` (forward) or
  ``(edge, -1)`` (backward).
* Transport composes left to right: the holonomy of ``sigma`` followed by
  ``tau`` is ``hol(tau) @ hol(sigma)``.
* The coefficient of a 1-chain on an edge lives in the fiber over the edge's
  initial vertex, so ``d(e (x) u) = term(e) (x) T_e u - init(e) (x) u``.
* Chain vectors are laid out cell-major: coordinate ``cell * n + k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactlin import Matrix, inverse, rank, rank_and_solve

Step = tuple[int, int]


class ModelError(ValueError):
    """Malformed cell model, path or representation."""


@dataclass(frozen=True)
class PathWord:
    base: int
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((int(e), int(d)) for e, d in self.steps))
        for e, d in self.steps:
            if d not in (1, -1):
                raise ModelError(f"step direction must be +1 or -1, got {d}")

    def inverse(self, model: "CwModel") -> "PathWord":
        return PathWord(model.path_end(self), tuple((e, -d) for e, d in reversed(self.steps)))

    def then(self, other: "PathWord") -> "PathWord":
        return PathWord(self.base, self.steps + other.steps)


@dataclass(frozen=True)
class Face:
    base: int
    word: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple((int(e), int(d)) for e, d in self.word))

    @property
    def path(self) -> PathWord:
        return PathWord(self.base, self.word)


@dataclass(frozen=True)
class Cell3:
    """A 3-cell with a base vertex; each boundary term is ``(face, coeff, path)``
    where the path runs from the cell's base to the face's base vertex."""

    base: int
    boundary: tuple[tuple[int, int, tuple[Step, ...]], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "boundary",
            tuple((int(f), int(c), tuple((int(e), int(d)) for e, d in p)) for f, c, p in self.boundary),
        )


@dataclass(frozen=True)
class CwModel:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    faces: tuple[Face, ...] = ()
    cells3: tuple[Cell3, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "cells3", tuple(self.cells3))
        for k, (a, b) in enumerate(self.edges):
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ModelError(f"edge {k} references a missing vertex")
        for k, f in enumerate(self.faces):
            if not 0 <= f.base < self.n_vertices:
                raise ModelError(f"face {k} has invalid base vertex")
            if self.path_end(f.path) != f.base:
                raise ModelError(f"boundary word not closed: face {k}")
        for k, c in enumerate(self.cells3):
            for f, _, steps in c.boundary:
                if not 0 <= f < len(self.faces):
                    raise ModelError(f"3-cell {k} references missing face {f}")
                if self.path_end(PathWord(c.base, steps)) != self.faces[f].base:
                    raise ModelError(f"3-cell {k}: path to face {f} does not end at its base")

    def cell_counts(self) -> list[int]:
        counts = [self.n_vertices, len(self.edges), len(self.faces)]
        if self.cells3:
            counts.append(len(self.cells3))
        return counts

    def path_end(self, path: PathWord) -> int:
        v = path.base
        for i, (e, d) in enumerate(path.steps):
            if not 0 <= e < len(self.edges):
                raise ModelError(f"path step {i} references missing edge {e}")
            a, b = self.edges[e]
            start, end = (a, b) if d == 1 else (b, a)
            if start != v:
                raise ModelError(f"path not composable at step {i} (at vertex {v}, edge {e} starts at {start})")
            v = end
        return v

    def integral_d1(self) -> list[list[int]]:
        """Untwisted integer boundary matrix of edges (rows: vertices)."""
        d = [[0] * len(self.edges) for _ in range(self.n_vertices)]
        for k, (a, b) in enumerate(self.edges):
            d[b][k] += 1
            d[a][k] -= 1
        return d

    def integral_boundary_of(self, chain: Sequence[int]) -> list[int]:
        out = [0] * self.n_vertices
        for k, c in enumerate(chain):
            if c:
                a, b = self.edges[k]
                out[b] += c
                out[a] -= c
        return out


@dataclass(frozen=True)
class Representation:
    fiber_dim: int
    holonomy: tuple[Matrix, ...]
    _inverses: tuple[Matrix, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        hol = tuple(self.holonomy)
        object.__setattr__(self, "holonomy", hol)
        invs = []
        for k, g in enumerate(hol):
            if g.shape != (self.fiber_dim, self.fiber_dim):
                raise ModelError(
                    f"holonomy of edge {k} has shape {g.shape}, expected {self.fiber_dim}x{self.fiber_dim}"
                )
            gi = inverse(g)
            if gi is None:
                raise ModelError(f"holonomy not invertible: edge {k}")
            invs.append(gi)
        object.__setattr__(self, "_inverses", tuple(invs))

    def step_matrix(self, step: Step) -> Matrix:
        e, d = step
        return self.holonomy[e] if d == 1 else self._inverses[e]

    def restrict(self, edges: Sequence[int]) -> "Representation":
        return Representation(self.fiber_dim, tuple(self.holonomy[e] for e in edges))


def _check_rep(model: CwModel, rep: Representation) -> None:
    if len(rep.holonomy) != len(model.edges):
        raise ModelError(f"representation has {len(rep.holonomy)} edge matrices, model has {len(model.edges)} edges")


def path_holonomy(rep: Representation, path: PathWord, model: Optional[CwModel] = None) -> Matrix:
    """Transport along ``path``; later steps multiply on the left."""
    if model is not None:
        model.path_end(path)
    T = Matrix.identity(rep.fiber_dim)
    for step in path.steps:
        T = rep.step_matrix(step) @ T
    return T


def flatness_defects(model: CwModel, rep: Representation) -> list[int]:
    """Faces whose boundary holonomy is not the identity."""
    _check_rep(model, rep)
    one = Matrix.identity(rep.fiber_dim)
    return [k for k, f in enumerate(model.faces) if path_holonomy(rep, f.path) != one]


def adjoint_system(rep: Representation) -> Representation:
    """The ``Hom(V, V)`` system: ``X -> g X g^-1`` on row-major vectorised matrices."""
    return Representation(
        rep.fiber_dim**2,
        tuple(g.kron(gi.transpose()) for g, gi in zip(rep.holonomy, rep._inverses)),
    )


def dual_system(rep: Representation) -> Representation:
    return Representation(rep.fiber_dim, tuple(gi.transpose() for gi in rep._inverses))


def push_vector(model: CwModel, rep: Representation, path: PathWord, u: Matrix) -> Matrix:
    """Walk ``path`` carrying ``u``; returns the 1-chain as a column of length ``E*n``."""
    n = rep.fiber_dim
    if u.shape != (n, 1):
        raise ValueError(f"coefficient must be a column of length {n}")
    model.path_end(path)
    out = [0] * (len(model.edges) * n)
    cur = u
    for e, d in path.steps:
        if d == 1:
            for k, v in enumerate(cur.entries()):
                out[e * n + k] += v
            cur = rep.holonomy[e] @ cur
        else:
            cur = rep._inverses[e] @ cur
            for k, v in enumerate(cur.entries()):
                out[e * n + k] -= v
    return Matrix.column(out)


@dataclass(frozen=True)
class HomChain:
    """1-chain with ``n x n`` matrix coefficients, one per edge."""

    model: CwModel
    fiber_dim: int
    coefficients: tuple[Matrix, ...]

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) != len(self.model.edges):
            raise ModelError("one coefficient per edge required")
        for k, c in enumerate(coeffs):
            if c.shape != (self.fiber_dim, self.fiber_dim):
                raise ModelError(f"coefficient on edge {k} has wrong shape {c.shape}")

    @classmethod
    def zero(cls, model: CwModel, n: int) -> "HomChain":
        return cls(model, n, (Matrix.zeros(n, n),) * len(model.edges))

    @classmethod
    def from_integral(cls, model: CwModel, n: int, chain: Sequence[int]) -> "HomChain":
        """``chain (x) identity``."""
        return cls(model, n, tuple(Matrix.scalar(n, c) for c in chain))

    @classmethod
    def from_vector(cls, model: CwModel, n: int, v: Matrix) -> "HomChain":
        m = n * n
        vals = v.entries()
        return cls(model, n, tuple(Matrix(n, n, vals[e * m : (e + 1) * m]) for e in range(len(model.edges))))

    def to_vector(self) -> Matrix:
        return Matrix.column([x for c in self.coefficients for x in c.entries()])

    def _same(self, other: "HomChain") -> None:
        if self.model != other.model or self.fiber_dim != other.fiber_dim:
            raise ValueError("chains live on different models")

    def __add__(self, other: "HomChain") -> "HomChain":
        self._same(other)
        return HomChain(self.model, self.fiber_dim, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "HomChain") -> "HomChain":
        self._same(other)
        return HomChain(self.model, self.fiber_dim, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "HomChain":
        return HomChain(self.model, self.fiber_dim, tuple(-a for a in self.coefficients))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.coefficients) if not c.is_zero()]

    def pushforward(self, target: CwModel, edge_map: Sequence[int]) -> "HomChain":
        """Image under a cellular inclusion sending edge ``k`` to ``edge_map[k]``."""
        n = self.fiber_dim
        out = [Matrix.zeros(n, n)] * len(target.edges)
        for k, c in enumerate(self.coefficients):
            j = edge_map[k]
            out[j] = out[j] + c
        return HomChain(target, n, tuple(out))


def push_path(model: CwModel, rep: Representation, path: PathWord, coeff: Matrix) -> HomChain:
    """Push ``coeff`` (an endomorphism of the fiber at ``path.base``) along ``path``.

    The running transport acts by conjugation, so the boundary of the result
    is ``end (x) T coeff T^-1 - base (x) coeff``.
    """
    n = rep.fiber_dim
    if coeff.shape != (n, n):
        raise ValueError(f"coefficient must be {n}x{n}")
    model.path_end(path)
    out = [Matrix.zeros(n, n)] * len(model.edges)
    cur = coeff
    for e, d in path.steps:
        g, gi = rep.holonomy[e], rep._inverses[e]
        if d == 1:
            out[e] = out[e] + cur
            cur = g @ cur @ gi
        else:
            cur = gi @ cur @ g
            out[e] = out[e] - cur
    return HomChain(model, n, tuple(out))


@dataclass(frozen=True)
class TwistedComplex:
    """``boundaries[i]`` maps degree ``i`` to ``i-1``; ``boundaries[0]`` has no rows."""

    dims: tuple[int, ...]
    boundaries: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        if len(self.dims) != len(self.boundaries):
            raise ValueError("one boundary matrix per degree required")
        for i, d in enumerate(self.boundaries):
            want = (self.dim(i - 1), self.dim(i))
            if d.shape != want:
                raise ValueError(f"boundary in degree {i} has shape {d.shape}, expected {want}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def dim(self, i: int) -> int:
        return self.dims[i] if 0 <= i < len(self.dims) else 0

    def d(self, i: int) -> Matrix:
        if 0 <= i < len(self.dims):
            return self.boundaries[i]
        return Matrix.zeros(self.dim(i - 1), self.dim(i))

    def square_defects(self) -> list[int]:
        """Degrees ``i`` with ``d(i-1) d(i) != 0``."""
        return [i for i in range(2, len(self.dims)) if not (self.d(i - 1) @ self.d(i)).is_zero()]

    def ranks(self) -> list[int]:
        return [rank(self.d(i)) for i in range(len(self.dims) + 1)]


class ComplexError(ValueError):
    """A chain complex fails d^2 = 0, or some other structural requirement."""


def twisted_complex(model: CwModel, rep: Representation) -> TwistedComplex:
    """Cellular chains of ``model`` with coefficients in the local system ``rep``."""
    _check_rep(model, rep)
    bad = flatness_defects(model, rep)
    if bad:
        raise ComplexError(f"representation is not flat on faces {bad}")
    n = rep.fiber_dim
    counts = model.cell_counts()
    E = len(model.edges)

    d1 = [[0] * (E * n) for _ in range(model.n_vertices * n)]
    for e, (a, b) in enumerate(model.edges):
        g = rep.holonomy[e]
        for k in range(n):
            d1[a * n + k][e * n + k] -= 1
            for r in range(n):
                d1[b * n + r][e * n + k] += g[r, k]
    bounds = [Matrix.zeros(0, model.n_vertices * n), Matrix.from_rows(d1, E * n)]

    eye = Matrix.identity(n)
    cols2 = []
    for f in model.faces:
        for k in range(n):
            cols2.append(push_vector(model, rep, f.path, eye.columns([k])))
    bounds.append(Matrix.hstack(cols2, rows=E * n))

    if model.cells3:
        F = len(model.faces)
        cols3 = []
        for c in model.cells3:
            for k in range(n):
                col = [0] * (F * n)
                for f, coeff, steps in c.boundary:
                    u = path_holonomy(rep, PathWord(c.base, steps)) @ eye.columns([k])
                    for r, v in enumerate(u.entries()):
                        col[f * n + r] += coeff * v
                cols3.append(Matrix.column(col))
        bounds.append(Matrix.hstack(cols3, rows=F * n))

    cx = TwistedComplex(tuple(c * n for c in counts), tuple(bounds))
    bad = cx.square_defects()
    if bad:
        raise ComplexError(f"twisted boundary does not square to zero in degrees {bad}")
    return cx


def homology_dims(c: TwistedComplex) -> list[int]:
    bad = c.square_defects()
    if bad:
        raise ComplexError(f"d^2 != 0 in degrees {bad}")
    ranks = c.ranks()
    return [c.dim(i) - ranks[i] - ranks[i + 1] for i in range(len(c.dims))]


def boundary_membership(c: TwistedComplex, degree: int, z: Matrix) -> Optional[Matrix]:
    """A preimage ``w`` with ``d(degree+1) w = z``, or ``None``."""
    if z.shape != (c.dim(degree), 1):
        raise ValueError(f"chain of degree {degree} must have length {c.dim(degree)}")
    _, w, _ = rank_and_solve(c.d(degree + 1), z)
    return w


def hom_boundary(chain: HomChain, rep: Representation) -> list[Matrix]:
    """Twisted boundary of a Hom-valued 1-chain, one ``n x n`` matrix per vertex."""
    n = chain.fiber_dim
    out = [Matrix.zeros(n, n)] * chain.model.n_vertices
    for e, (a, b) in enumerate(chain.model.edges):
        c = chain.coefficients[e]
        if c.is_zero():
            continue
        g, gi = rep.holonomy[e], rep._inverses[e]
        out[b] = out[b] + g @ c @ gi
        out[a] = out[a] - c
    return out


def is_twisted_cycle(chain: HomChain, rep: Representation) -> bool:
    return all(m.is_zero() for m in hom_boundary(chain, rep))


def subcomplex(model: CwModel, vertices: Sequence[int], edges: Sequence[int], faces: Sequence[int]) -> CwModel:
    """Restrict to the given cells (reindexed in the listed order)."""
    vmap = {v: i for i, v in enumerate(vertices)}
    emap = {e: i for i, e in enumerate(edges)}
    try:
        new_edges = [(vmap[model.edges[e][0]], vmap[model.edges[e][1]]) for e in edges]
        new_faces = [
            Face(vmap[model.faces[f].base], tuple((emap[e], d) for e, d in model.faces[f].word)) for f in faces
        ]
    except KeyError as exc:
        raise ModelError(f"cell set is not a subcomplex (missing {exc.args[0]})") from None
    return CwModel(len(vertices), tuple(new_edges), tuple(new_faces))


__all__ = [
    "PathWord",
    "Face",
    "Cell3",
    "CwModel",
    "Representation",
    "HomChain",
    "TwistedComplex",
    "ModelError",
    "ComplexError",
    "path_holonomy",
    "flatness_defects",
    "adjoint_system",
    "dual_system",
    "push_vector",
    "push_path",
    "twisted_complex",
    "homology_dims",
    "boundary_membership",
    "hom_boundary",
    "is_twisted_cycle",
    "subcomplex",
]
