"""Exact rational matrices, Gaussian elimination and integer lattice reductions.

Everything here works over :class:`fractions.Fraction`; there are no
tolerances anywhere, equality is equality.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence

__all__ = [
    "Matrix",
    "parse_scalar",
    "format_scalar",
    "rref",
    "rank",
    "rank_and_solve",
    "kernel_basis",
    "inverse",
    "hermite_normal_form",
    "lattice_membership",
]


def parse_scalar(value) -> Fraction:
    """Read a scalar from ``"p/q"``, ``"p"``, an int or a Fraction."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read scalar from {value!r}")


def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Matrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Optional[Iterable] = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        self.rows = rows
        self.cols = cols
        if data is None:
            self._data = (Fraction(0),) * (rows * cols)
        else:
            flat = tuple(parse_scalar(v) for v in data)
            if len(flat) != rows * cols:
                raise ValueError(f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(flat)}")
            self._data = flat

    # construction -------------------------------------------------------
    @classmethod
    def _raw(cls, rows: int, cols: int, flat: tuple) -> "Matrix":
        m = cls.__new__(cls)
        m.rows, m.cols, m._data = rows, cols, flat
        return m

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: Optional[int] = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(rows), cols, [v for r in rows for v in r])

    @classmethod
    def column(cls, values: Sequence) -> "Matrix":
        return cls(len(values), 1, values)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(n, n, tuple(one if i == j else zero for i in range(n) for j in range(n)))

    @classmethod
    def scalar(cls, n: int, c) -> "Matrix":
        return cls.identity(n) * parse_scalar(c)

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Matrix"]]) -> "Matrix":
        """Assemble from a grid of blocks with consistent row/column sizes."""
        if not blocks:
            return cls(0, 0)
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]]
        out = [[Fraction(0)] * sum(widths) for _ in range(sum(heights))]
        r0 = 0
        for bi, brow in enumerate(blocks):
            if len(brow) != len(widths):
                raise ValueError("ragged block grid")
            c0 = 0
            for bj, b in enumerate(brow):
                if b.rows != heights[bi] or b.cols != widths[bj]:
                    raise ValueError("block shape mismatch")
                for i in range(b.rows):
                    out[r0 + i][c0 : c0 + b.cols] = b.row(i)
                c0 += widths[bj]
            r0 += heights[bi]
        return cls._raw(len(out), sum(widths), tuple(v for r in out for v in r))

    @classmethod
    def hstack(cls, mats: Sequence["Matrix"], rows: Optional[int] = None) -> "Matrix":
        if not mats:
            return cls(rows or 0, 0)
        return cls.block([list(mats)])

    @classmethod
    def vstack(cls, mats: Sequence["Matrix"], cols: Optional[int] = None) -> "Matrix":
        if not mats:
            return cls(0, cols or 0)
        return cls.block([[m] for m in mats])

    # access -------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self._data[i * self.cols + j]

    def row(self, i: int) -> list[Fraction]:
        return list(self._data[i * self.cols : (i + 1) * self.cols])

    def col(self, j: int) -> list[Fraction]:
        return [self._data[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self) -> list[list[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def entries(self) -> tuple[Fraction, ...]:
        return self._data

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(len(rows), len(cols), tuple(self._data[i * self.cols + j] for i in rows for j in cols))

    def columns(self, cols: Sequence[int]) -> "Matrix":
        return self.submatrix(range(self.rows), cols)

    def is_zero(self) -> bool:
        return not any(self._data)

    def is_square(self) -> bool:
        return self.rows == self.cols

    # arithmetic -----------------------------------------------------------
    def _check_same(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._raw(self.rows, self.cols, tuple(a + b for a, b in zip(self._data, other._data)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix._raw(self.rows, self.cols, tuple(a - b for a, b in zip(self._data, other._data)))

    def __neg__(self) -> "Matrix":
        return Matrix._raw(self.rows, self.cols, tuple(-a for a in self._data))

    def __mul__(self, c) -> "Matrix":
        if isinstance(c, Matrix):
            return self @ c
        c = parse_scalar(c)
        return Matrix._raw(self.rows, self.cols, tuple(a * c for a in self._data))

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        n, m, p = self.rows, self.cols, other.cols
        a, b = self._data, other._data
        out = [Fraction(0)] * (n * p)
        for i in range(n):
            base = i * p
            for k in range(m):
                aik = a[i * m + k]
                if not aik:
                    continue
                off = k * p
                for j in range(p):
                    bkj = b[off + j]
                    if bkj:
                        out[base + j] += aik * bkj
        return Matrix._raw(n, p, tuple(out))

    def transpose(self) -> "Matrix":
        return Matrix._raw(
            self.cols,
            self.rows,
            tuple(self._data[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def kron(self, other: "Matrix") -> "Matrix":
        rows = []
        for i in range(self.rows):
            for k in range(other.rows):
                rows.append([self[i, j] * other[k, l] for j in range(self.cols) for l in range(other.cols)])
        return Matrix.from_rows(rows, self.cols * other.cols)

    def vec(self) -> "Matrix":
        """Row-major vectorisation as a column."""
        return Matrix._raw(self.rows * self.cols, 1, self._data)

    def reshape(self, rows: int, cols: int) -> "Matrix":
        if rows * cols != len(self._data):
            raise ValueError("reshape size mismatch")
        return Matrix._raw(rows, cols, self._data)

    # comparison / display -------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(format_scalar(v) for v in self.row(i)) + "]" for i in range(self.rows))
        return f"Matrix({self.rows}x{self.cols}, [{body}])"

    def to_json(self) -> list[list[str]]:
        return [[format_scalar(v) for v in self.row(i)] for i in range(self.rows)]

    @classmethod
    def from_json(cls, rows, cols: Optional[int] = None) -> "Matrix":
        return cls.from_rows(rows, cols)


def rref(A: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns (first nonzero pivoting)."""
    m = [A.row(i) for i in range(A.rows)]
    pivots: list[int] = []
    r = 0
    for c in range(A.cols):
        if r >= A.rows:
            break
        p = next((i for i in range(r, A.rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(A.rows):
            if i != r and m[i][c]:
                f = m[i][c]
                ri = m[r]
                m[i] = [a - f * b for a, b in zip(m[i], ri)]
        pivots.append(c)
        r += 1
    return Matrix.from_rows(m, A.cols), pivots


def rank(A: Matrix) -> int:
    return len(rref(A)[1])


def kernel_basis(A: Matrix) -> list[Matrix]:
    """Basis of the null space, one column per free variable."""
    R, pivots = rref(A)
    free = [j for j in range(A.cols) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * A.cols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r, f]
        basis.append(Matrix.column(v))
    return basis


def rank_and_solve(A: Matrix, b: Optional[Matrix] = None):
    """Return ``(rank, solution, kernel_basis)``.

    ``solution`` is ``None`` when ``b`` is absent or ``A x = b`` is
    inconsistent. ``b`` may have several columns; a solution is then a matrix
    ``X`` with ``A X = b``.
    """
    if b is not None and b.rows != A.rows:
        raise ValueError(f"right-hand side has {b.rows} rows, matrix has {A.rows}")
    kernel = kernel_basis(A)
    if b is None:
        return rank(A), None, kernel
    aug = Matrix.hstack([A, b])
    R, pivots = rref(aug)
    r = sum(1 for p in pivots if p < A.cols)
    if any(p >= A.cols for p in pivots):
        return r, None, kernel
    x = [[Fraction(0)] * b.cols for _ in range(A.cols)]
    for i, pc in enumerate(pivots):
        x[pc] = [R[i, A.cols + k] for k in range(b.cols)]
    return r, Matrix.from_rows(x, b.cols), kernel


def inverse(A: Matrix) -> Optional[Matrix]:
    if not A.is_square():
        raise ValueError(f"inverse of non-square {A.shape} matrix")
    n = A.rows
    R, pivots = rref(Matrix.hstack([A, Matrix.identity(n)]))
    if sum(1 for p in pivots if p < n) < n:
        return None
    return R.submatrix(range(n), range(n, 2 * n))


# --- integer lattices ------------------------------------------------------


def hermite_normal_form(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row-style Hermite normal form ``H = U M`` with ``U`` unimodular.

    Nonzero rows of ``H`` come first, pivots are positive and strictly move
    right, and entries above a pivot lie in ``[0, pivot)``.
    """
    H = [list(map(int, r)) for r in M]
    m = len(H)
    n = len(H[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]

    def swap(i, j):
        H[i], H[j] = H[j], H[i]
        U[i], U[j] = U[j], U[i]

    def addmul(dst, src, q):
        # row[dst] += q * row[src]
        if q:
            H[dst] = [a + q * b for a, b in zip(H[dst], H[src])]
            U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    r = 0
    for c in range(n):
        if r >= m:
            break
        while True:
            nz = [i for i in range(r, m) if H[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(H[i][c]))
            swap(r, p)
            done = True
            for i in range(r + 1, m):
                if H[i][c]:
                    addmul(i, r, -(H[i][c] // H[r][c]))
                    if H[i][c]:
                        done = False
            if done:
                break
        if not H[r][c]:
            continue
        if H[r][c] < 0:
            H[r] = [-v for v in H[r]]
            U[r] = [-v for v in U[r]]
        for i in range(r):
            addmul(i, r, -(H[i][c] // H[r][c]))
        r += 1
    return H, U


def lattice_membership(generators: Sequence[Sequence], target: Sequence) -> Optional[list[int]]:
    """Integer coefficients ``c`` with ``sum(c_i * gen_i) == target``, else ``None``."""
    target = [parse_scalar(v) for v in target]
    gens = [[parse_scalar(v) for v in g] for g in generators]
    for g in gens:
        if len(g) != len(target):
            raise ValueError("generator and target lengths differ")
    if not gens:
        return [] if not any(target) else None
    den = lcm(*(v.denominator for g in gens for v in g), *(v.denominator for v in target))
    A = [[int(v * den) for v in g] for g in gens]  # rows = generators
    t = [v * den for v in target]
    if any(v.denominator != 1 for v in t):
        return None
    t = [int(v) for v in t]
    H, U = hermite_normal_form(A)
    # express t as an integer combination of the rows of H by forward substitution
    coeffs = [0] * len(H)
    residual = list(t)
    for i, hrow in enumerate(H):
        piv = next((c for c, v in enumerate(hrow) if v), None)
        if piv is None:
            break
        if any(residual[:piv]):
            return None
        q, rem = divmod(residual[piv], hrow[piv])
        if rem:
            return None
        coeffs[i] = q
        residual = [a - q * b for a, b in zip(residual, hrow)]
    if any(residual):
        return None
    # t = coeffs . H = coeffs . U . A
    return [sum(coeffs[i] * U[i][j] for i in range(len(H))) for j in range(len(gens))]
