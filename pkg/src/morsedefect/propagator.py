"""Chain contractions ``G`` with ``dG + Gd = id`` and their two-block gluing."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .exactlin import Matrix, inverse, kernel_basis, rank_and_solve, rref
from .localsys import ComplexError, TwistedComplex
from .report import Report


@dataclass(frozen=True)
class Propagator:
    """``maps[i]`` is ``G_i : C_{i-1} -> C_i`` for ``i = 0 .. top + 1``."""

    maps: tuple[Matrix, ...]

    def g(self, i: int) -> Matrix:
        return self.maps[i]

    def to_json(self) -> dict:
        return {str(i): m.to_json() for i, m in enumerate(self.maps) if m.rows and m.cols}

    @classmethod
    def from_blocks(cls, cx: TwistedComplex, maps: dict[int, Matrix]) -> "Propagator":
        """Fill in zero maps for every degree missing from ``maps``."""
        out = []
        for i in range(cx.top + 2):
            m = maps.get(i, Matrix.zeros(cx.dim(i), cx.dim(i - 1)))
            if m.shape != (cx.dim(i), cx.dim(i - 1)):
                raise ValueError(f"G_{i} has shape {m.shape}, expected {(cx.dim(i), cx.dim(i - 1))}")
            out.append(m)
        return cls(tuple(out))


def _check_shapes(c: TwistedComplex, G: Propagator) -> None:
    if len(G.maps) != c.top + 2:
        raise ValueError(f"propagator has {len(G.maps)} maps, complex needs {c.top + 2}")
    for i, m in enumerate(G.maps):
        if m.shape != (c.dim(i), c.dim(i - 1)):
            raise ValueError(f"G_{i} has shape {m.shape}, expected {(c.dim(i), c.dim(i - 1))}")


def residual(c: TwistedComplex, G: Propagator, i: int) -> Matrix:
    """``d_{i+1} G_{i+1} + G_i d_i - id`` on ``C_i``."""
    return c.d(i + 1) @ G.g(i + 1) + G.g(i) @ c.d(i) - Matrix.identity(c.dim(i))


def verify_propagator(c: TwistedComplex, G: Propagator) -> Report:
    _check_shapes(c, G)
    report = Report("verify_propagator")
    for i in range(c.top + 1):
        r = residual(c, G, i)
        if r.is_zero():
            report.add(f"degree_{i}", True)
        else:
            report.add(f"degree_{i}", False, residual=r)
    return report


def acyclicity_defect(c: TwistedComplex) -> Optional[int]:
    """First degree with nonzero homology, or ``None``."""
    ranks = c.ranks()
    for i in range(c.top + 1):
        if c.dim(i) != ranks[i] + ranks[i + 1]:
            return i
    return None


def contraction(c: TwistedComplex) -> Propagator:
    """Deterministic propagator of an acyclic complex.

    In each degree the pivot columns of ``d_i`` span a complement ``U_i`` of
    its kernel; ``G_i`` inverts ``d_i|U_i`` on ``ker d_{i-1}`` and vanishes on
    ``U_{i-1}``.
    """
    bad = c.square_defects()
    if bad:
        raise ComplexError(f"d^2 != 0 in degree {bad[0]}")
    defect = acyclicity_defect(c)
    if defect is not None:
        raise ComplexError(f"complex is not acyclic: homology in degree {defect}")

    pivots = []
    kernels = []
    for i in range(c.top + 1):
        _, piv = rref(c.d(i))
        pivots.append(piv)
        kernels.append(kernel_basis(c.d(i)))

    maps = [Matrix.zeros(c.dim(0), 0)]
    for i in range(1, c.top + 1):
        lo = c.dim(i - 1)
        K = Matrix.hstack(kernels[i - 1], rows=lo)
        # basis of C_{i-1}: kernel of d_{i-1}, then the pivot unit vectors
        units = Matrix.identity(lo).columns(pivots[i - 1])
        P = Matrix.hstack([K, units], rows=lo)
        P_inv = inverse(P)
        assert P_inv is not None
        r = K.cols
        A = c.d(i).columns(pivots[i])
        _, R, _ = rank_and_solve(A, K)
        assert R is not None, "image of d_i must equal ker d_{i-1}"
        E_U = Matrix.identity(c.dim(i)).columns(pivots[i])
        maps.append(E_U @ R @ P_inv.submatrix(range(r), range(lo)))
    maps.append(Matrix.zeros(0, c.dim(c.top)))
    G = Propagator(tuple(maps))
    assert verify_propagator(c, G).passed
    return G


# --- two-block gluing ---------------------------------------------------------


@dataclass(frozen=True)
class BlockedComplex:
    """Lower-triangular total complex ``[[d^aa, 0], [d^ab, d^bb]]``.

    ``cross[k]`` is ``d^ab_k : C^a_k -> C^b_{k-1}``.
    """

    a: TwistedComplex
    b: TwistedComplex
    cross: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "cross", tuple(self.cross))
        if self.a.top != self.b.top or len(self.cross) != self.a.top + 1:
            raise ValueError("blocks must have equal length")
        for k, m in enumerate(self.cross):
            if m.shape != (self.b.dim(k - 1), self.a.dim(k)):
                raise ValueError(f"cross map in degree {k} has shape {m.shape}")

    @property
    def top(self) -> int:
        return self.a.top

    def dab(self, k: int) -> Matrix:
        if 0 <= k <= self.top:
            return self.cross[k]
        return Matrix.zeros(self.b.dim(k - 1), self.a.dim(k))

    def anticommutation_defects(self) -> list[int]:
        """Degrees where ``d^bb d^ab + d^ab d^aa != 0``."""
        out = []
        for k in range(2, self.top + 1):
            m = self.b.d(k - 1) @ self.dab(k) + self.dab(k - 1) @ self.a.d(k)
            if not m.is_zero():
                out.append(k)
        return out

    def total(self) -> TwistedComplex:
        dims = tuple(self.a.dim(i) + self.b.dim(i) for i in range(self.top + 1))
        bounds = []
        for k in range(self.top + 1):
            zero = Matrix.zeros(self.a.dim(k - 1), self.b.dim(k))
            bounds.append(Matrix.block([[self.a.d(k), zero], [self.dab(k), self.b.d(k)]]))
        return TwistedComplex(dims, tuple(bounds))

    @classmethod
    def split(cls, total: TwistedComplex, a_dims: Sequence[int]) -> "BlockedComplex":
        """Cut a total complex whose degree-``i`` basis lists the ``a`` part first."""
        a_b, b_b, cross = [], [], []
        for k in range(total.top + 1):
            na, nb = a_dims[k], total.dim(k) - a_dims[k]
            ma = a_dims[k - 1] if k else 0
            mb = total.dim(k - 1) - ma
            D = total.d(k)
            a_b.append(D.submatrix(range(ma), range(na)))
            b_b.append(D.submatrix(range(ma, ma + mb), range(na, na + nb)))
            cross.append(D.submatrix(range(ma, ma + mb), range(na)))
            if not D.submatrix(range(ma), range(na, na + nb)).is_zero():
                raise ComplexError(f"total complex has a b->a block in degree {k}")
        a = TwistedComplex(tuple(a_dims), tuple(a_b))
        b = TwistedComplex(tuple(total.dim(i) - a_dims[i] for i in range(total.top + 1)), tuple(b_b))
        return cls(a, b, tuple(cross))


def _gab_zero(bc: BlockedComplex, k: int) -> Matrix:
    return Matrix.zeros(bc.b.dim(k), bc.a.dim(k - 1))


def glue_propagator(bc: BlockedComplex, Ga: Propagator, Gb: Propagator) -> Propagator:
    """Total propagator ``[[G^a, 0], [G^ab, G^b]]`` with ``G^ab`` built degree by degree:

    ``G^ab_{k+1} = -(G^b_{k+1} d^ab_{k+1} G^a_{k+1} + G^b_{k+1} G^ab_k d^aa_k
    + G^b_{k+1} G^b_k d^ab_k)``, starting from ``G^ab_0 = 0`` (which makes
    ``G^ab_1 = -G^b_1 d^ab_1 G^a_1``).
    """
    for name, cx, G in (("a", bc.a, Ga), ("b", bc.b, Gb)):
        _check_shapes(cx, G)
        if not verify_propagator(cx, G).passed:
            raise ValueError(f"G^{name} is not a propagator")
    bad = bc.anticommutation_defects()
    if bad:
        raise ComplexError(f"cross map breaks d^2 = 0 in degree {bad[0]}")

    gab = [_gab_zero(bc, 0)]
    for k in range(0, bc.top):
        Gb1 = Gb.g(k + 1)
        term = bc.dab(k + 1) @ Ga.g(k + 1) + gab[k] @ bc.a.d(k) + Gb.g(k) @ bc.dab(k)
        gab.append(-(Gb1 @ term))
    gab.append(_gab_zero(bc, bc.top + 1))

    maps = []
    for i in range(bc.top + 2):
        zero = Matrix.zeros(bc.a.dim(i), bc.b.dim(i - 1))
        maps.append(Matrix.block([[Ga.g(i), zero], [gab[i], Gb.g(i)]]))
    return Propagator(tuple(maps))


def offdiagonal_residual(bc: BlockedComplex, G: Propagator, k: int) -> Matrix:
    """``d^ab_{k+1} G^aa_{k+1} + d^bb_{k+1} G^ab_{k+1} + G^ab_k d^aa_k + G^bb_k d^ab_k``."""

    def part(M: Matrix, deg_row: int, deg_col: int, rows: str, cols: str) -> Matrix:
        ra = bc.a.dim(deg_row)
        ca = bc.a.dim(deg_col)
        r = range(ra, M.rows) if rows == "b" else range(ra)
        c = range(ca, M.cols) if cols == "b" else range(ca)
        return M.submatrix(r, c)

    Gaa1 = part(G.g(k + 1), k + 1, k, "a", "a")
    Gab1 = part(G.g(k + 1), k + 1, k, "b", "a")
    Gab0 = part(G.g(k), k, k - 1, "b", "a")
    Gbb0 = part(G.g(k), k, k - 1, "b", "b")
    return bc.dab(k + 1) @ Gaa1 + bc.b.d(k + 1) @ Gab1 + Gab0 @ bc.a.d(k) + Gbb0 @ bc.dab(k)


# --- random test inputs -----------------------------------------------------------


def random_unimodular(rng: random.Random, n: int, spread: int = 2) -> tuple[Matrix, Matrix]:
    """A random determinant-one integer matrix and its inverse."""
    L = [[1 if i == j else (rng.randint(-spread, spread) if i > j else 0) for j in range(n)] for i in range(n)]
    U = [[1 if i == j else (rng.randint(-spread, spread) if i < j else 0) for j in range(n)] for i in range(n)]
    perm = list(range(n))
    rng.shuffle(perm)
    P = [[1 if perm[i] == j else 0 for j in range(n)] for i in range(n)]
    M = Matrix.from_rows(P, n) @ Matrix.from_rows(L, n) @ Matrix.from_rows(U, n)
    Mi = inverse(M)
    assert Mi is not None
    return M, Mi


def change_basis(c: TwistedComplex, P: Sequence[Matrix], P_inv: Sequence[Matrix]) -> TwistedComplex:
    """The isomorphic complex ``d'_i = P_{i-1} d_i P_i^-1``."""
    bounds = []
    for i in range(c.top + 1):
        left = P[i - 1] if i else Matrix.zeros(0, 0)
        bounds.append(left @ c.d(i) @ P_inv[i])
    return TwistedComplex(c.dims, tuple(bounds))


def random_acyclic_complex(
    rng: random.Random, top: int = 3, max_cells: int = 8, max_fiber: int = 3, fiber: Optional[int] = None
) -> TwistedComplex:
    """Sum of cones ``[V --id--> V]`` in random adjacent degrees, then a random basis change."""
    n = fiber if fiber is not None else rng.randint(1, max_fiber)
    pairs = rng.randint(1, max(1, max_cells // 2))
    counts = [0] * (top + 1)
    cones = []
    for _ in range(pairs):
        k = rng.randint(1, top)
        cones.append((k, counts[k], counts[k - 1]))
        counts[k] += 1
        counts[k - 1] += 1
    dims = [c * n for c in counts]
    bounds = [Matrix.zeros(0, dims[0])]
    for k in range(1, top + 1):
        rows = [[0] * dims[k] for _ in range(dims[k - 1])]
        for deg, src, dst in cones:
            if deg == k:
                for j in range(n):
                    rows[dst * n + j][src * n + j] = 1
        bounds.append(Matrix.from_rows(rows, dims[k]))
    base = TwistedComplex(tuple(dims), tuple(bounds))
    Ps = [random_unimodular(rng, d) for d in dims]
    return change_basis(base, [p for p, _ in Ps], [pi for _, pi in Ps])


def random_integer_matrix(rng: random.Random, rows: int, cols: int, spread: int = 3) -> Matrix:
    return Matrix(rows, cols, [rng.randint(-spread, spread) for _ in range(rows * cols)])


def blocked_from_homotopy(a: TwistedComplex, b: TwistedComplex, Y: Sequence[Matrix]) -> BlockedComplex:
    """Cross map ``d^ab_k = d^bb_k Y_k - Y_{k-1} d^aa_k`` for a degree-0 map ``Y``."""
    cross = []
    for k in range(a.top + 1):
        term = b.d(k) @ Y[k]
        if k:
            term = term - Y[k - 1] @ a.d(k)
        cross.append(term)
    return BlockedComplex(a, b, tuple(cross))


def random_blocked_complex(
    seed: int, top: int = 3, max_cells: int = 8, max_fiber: int = 3, zero_cross: bool = False
) -> tuple[BlockedComplex, Propagator, Propagator]:
    """Two random acyclic complexes joined by a cross map that anticommutes by construction."""
    rng = random.Random(seed)
    n = rng.randint(1, max_fiber)
    a = random_acyclic_complex(rng, top, max_cells, fiber=n)
    b = random_acyclic_complex(rng, top, max_cells, fiber=n)
    if zero_cross:
        Y = [Matrix.zeros(b.dim(k), a.dim(k)) for k in range(top + 1)]
    else:
        Y = [random_integer_matrix(rng, b.dim(k), a.dim(k)) for k in range(top + 1)]
    bc = blocked_from_homotopy(a, b, Y)
    return bc, contraction(a), contraction(b)


def random_propagator(c: TwistedComplex, seed: int) -> Propagator:
    """A propagator obtained by contracting a randomly re-based copy of ``c``."""
    rng = random.Random(seed)
    Ps = [random_unimodular(rng, c.dim(i)) for i in range(c.top + 1)]
    P = [p for p, _ in Ps]
    P_inv = [pi for _, pi in Ps]
    G2 = contraction(change_basis(c, P, P_inv))
    # G = P^-1 G' P, one degree up on the left
    maps = []
    for i, m in enumerate(G2.maps):
        left = P_inv[i] if i <= c.top else Matrix.identity(0)
        right = P[i - 1] if i >= 1 else Matrix.identity(0)
        maps.append(left @ m @ right)
    return Propagator(tuple(maps))


__all__ = [
    "Propagator",
    "BlockedComplex",
    "contraction",
    "verify_propagator",
    "residual",
    "acyclicity_defect",
    "glue_propagator",
    "offdiagonal_residual",
    "random_unimodular",
    "random_acyclic_complex",
    "random_blocked_complex",
    "blocked_from_homotopy",
    "change_basis",
    "random_propagator",
]
