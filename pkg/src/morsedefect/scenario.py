"""Scenario container and the shipped example builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .exactlin import Matrix, inverse, parse_scalar
from .localsys import (
    Cell3,
    CwModel,
    Face,
    Representation,
    adjoint_system,
    dual_system,
    homology_dims,
    subcomplex,
    twisted_complex,
)
from .morse import ABSOLUTE, RELATIVE, CriticalPoint, MorseData, Trajectory, morse_complex, validate
from .propagator import Propagator
from .report import Report


@dataclass(frozen=True)
class Boundary:
    vertices: tuple[int, ...] = ()
    edges: tuple[int, ...] = ()
    faces: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("vertices", "edges", "faces"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))

    def is_empty(self) -> bool:
        return not (self.vertices or self.edges or self.faces)


@dataclass(frozen=True)
class Scenario:
    model: CwModel
    rep: Representation
    morse: MorseData
    boundary: Optional[Boundary] = None
    name: str = ""
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def validate(self) -> Report:
        report = validate(self.model, self.rep, self.morse)
        if self.boundary is not None:
            try:
                subcomplex(self.model, self.boundary.vertices, self.boundary.edges, self.boundary.faces)
                report.add("boundary_subcomplex", True)
            except ValueError as exc:
                report.add("boundary_subcomplex", False, reason=str(exc))
        return report

    def homology_report(self) -> Report:
        """Morse Betti numbers against cellular ones, for the system and its adjoint.

        Relative-type data computes homology relative to the boundary, which
        is compared with the reversed cellular Betti numbers of the dual
        system (Lefschetz duality in dimension 3).
        """
        report = Report("homology")
        for label, rep in (("V", self.rep), ("Hom", adjoint_system(self.rep))):
            morse = homology_dims(morse_complex(self.model, rep, self.morse).complex)
            if self.morse.kind == RELATIVE:
                cellular = homology_dims(twisted_complex(self.model, dual_system(rep)))[::-1]
            else:
                cellular = homology_dims(twisted_complex(self.model, rep))
            report.add(f"betti_{label}", morse == cellular, morse=morse, cellular=cellular, kind=self.morse.kind)
        return report

    def boundary_homology(self) -> Optional[list[int]]:
        """Twisted Betti numbers of the restriction to the boundary, if designated."""
        if self.boundary is None or self.boundary.is_empty():
            return None
        sub = subcomplex(self.model, self.boundary.vertices, self.boundary.edges, self.boundary.faces)
        return homology_dims(twisted_complex(sub, self.rep.restrict(self.boundary.edges)))


def _as_matrix(m) -> Matrix:
    if isinstance(m, Matrix):
        return m
    if isinstance(m, (int, str)) or hasattr(m, "denominator"):
        return Matrix(1, 1, [parse_scalar(m)])
    return Matrix.from_rows(m)


def _commutator_face(base: int, x: int, y: int) -> Face:
    return Face(base, ((x, 1), (y, 1), (x, -1), (y, -1)))


class ScenarioError(ValueError):
    pass


def build_torus_cylinder(a, b, name: str = "torus_cylinder") -> Scenario:
    """``[-1, 1] x T^2`` with four critical points and holonomies ``a``, ``b`` on the two circles.

    Cell model: three parallel tori (``t = -1, 0, 1``) joined by two product
    layers. Critical points NP, p, q, SP (indices 3, 2, 2, 1) sit on the
    middle torus; the loop ``x0`` carries the holonomy ``a`` and ``y0`` carries
    ``b``. The data is of increasing-from-the-boundary type, so the Morse
    complex computes homology relative to the boundary.
    """
    A, B = _as_matrix(a), _as_matrix(b)
    if A.shape != B.shape or not A.is_square():
        raise ScenarioError("a and b must be square matrices of one size")
    n = A.rows
    I = Matrix.identity(n)
    if A @ B != B @ A:
        raise ScenarioError("a and b must commute (they are holonomies of a torus)")
    for label, M in (("a", A), ("b", B)):
        if inverse(M) is None:
            raise ScenarioError(f"{label} is not invertible")
    if inverse(I - A) is None:
        raise ScenarioError("1 - a is singular; the example needs an acyclic torus system")

    # vertices: 0 = t=-1, 1 = t=0, 2 = t=+1
    X0, Y0, XM, YM, XP, YP, EM, EP = range(8)
    edges = [(1, 1), (1, 1), (0, 0), (0, 0), (2, 2), (2, 2), (0, 1), (1, 2)]
    T0, TM, TP, AXM, AYM, AXP, AYP = range(7)
    faces = [
        _commutator_face(1, X0, Y0),
        _commutator_face(0, XM, YM),
        _commutator_face(2, XP, YP),
        Face(0, ((EM, 1), (X0, 1), (EM, -1), (XM, -1))),
        Face(0, ((EM, 1), (Y0, 1), (EM, -1), (YM, -1))),
        Face(1, ((EP, 1), (XP, 1), (EP, -1), (X0, -1))),
        Face(1, ((EP, 1), (YP, 1), (EP, -1), (Y0, -1))),
    ]

    def product_cell(base, e, top_face, bottom_face, ax, ay, xv, yv):
        return Cell3(
            base,
            (
                (top_face, 1, ((e, 1),)),
                (bottom_face, -1, ()),
                (ax, -1, ()),
                (ax, 1, ((yv, 1),)),
                (ay, 1, ()),
                (ay, -1, ((xv, 1),)),
            ),
        )

    cells = [
        product_cell(0, EM, T0, TM, AXM, AYM, XM, YM),
        product_cell(1, EP, TP, T0, AXP, AYP, X0, Y0),
    ]
    model = CwModel(3, tuple(edges), tuple(faces), tuple(cells))
    rep = Representation(n, (A, B, A, B, A, B, I, I))

    pts = (
        CriticalPoint("NP", 3, 1),
        CriticalPoint("p", 2, 1),
        CriticalPoint("q", 2, 1),
        CriticalPoint("SP", 1, 1),
    )
    trajs = (
        # d_{p,NP} = 1 - a
        Trajectory("NP", "p", 1, ()),
        Trajectory("NP", "p", -1, ((X0, 1),)),
        # d_{SP,q} = 1 - a^-1
        Trajectory("q", "SP", 1, ()),
        Trajectory("q", "SP", -1, ((X0, -1),)),
        # d_{q,NP} = a (1 - b) and d_{SP,p} = 1 - b, which force d^2 = 0
        Trajectory("NP", "q", 1, ((X0, 1),)),
        Trajectory("NP", "q", -1, ((X0, 1), (Y0, 1))),
        Trajectory("p", "SP", 1, ()),
        Trajectory("p", "SP", -1, ((Y0, 1),)),
    )
    md = MorseData(pts, trajs, (0,) * len(edges), RELATIVE)
    sc = Scenario(model, rep, md, Boundary((0, 2), (XM, YM, XP, YP), (TM, TP)), name)
    report = sc.validate()
    if not report.passed:
        raise ScenarioError(f"generated scenario failed validation: {[c.name for c in report.failures()]}")
    homology = homology_dims(twisted_complex(model, rep))
    if any(homology):
        raise ScenarioError(f"torus system is not acyclic for these holonomies (Betti numbers {homology})")
    return sc


def cylinder_reference_propagator(sc: Scenario) -> Propagator:
    """The hand-built contraction of the torus-cylinder Morse complex.

    Only two blocks are nonzero: ``(1 - a)^-1`` from ``p`` back to ``NP`` and
    ``(1 - a^-1)^-1`` from ``SP`` back to ``q``.
    """
    mc = morse_complex(sc.model, sc.rep, sc.morse)
    A = sc.rep.holonomy[0]
    n = A.rows
    I = Matrix.identity(n)
    top = inverse(I - A)
    bottom = inverse(I - inverse(A))
    md = sc.morse
    top_index, mid_index = md.point("NP").index, md.point("q").index
    maps = {}
    for i, (row, col, blk) in ((top_index, ("NP", "p", top)), (mid_index, ("q", "SP", bottom))):
        M = [[0] * mc.complex.dim(i - 1) for _ in range(mc.complex.dim(i))]
        r0, c0 = md.position(row) * n, md.position(col) * n
        for r in range(n):
            for c in range(n):
                M[r0 + r][c0 + c] = blk[r, c]
        maps[i] = Matrix.from_rows(M, mc.complex.dim(i - 1))
    return Propagator.from_blocks(mc.complex, maps)


def build_three_torus(a, b, c, name: str = "three_torus") -> Scenario:
    """Closed ``T^3`` (one cell per face of the cube) with the perfect Morse function.

    The critical point of index ``k`` for each ``k``-subset of the circle
    factors; its trajectories reproduce the cellular boundary exactly.
    """
    mats = [_as_matrix(m) for m in (a, b, c)]
    n = mats[0].rows
    for M in mats:
        if M.shape != (n, n) or inverse(M) is None:
            raise ScenarioError("holonomies must be invertible and of one size")
    for i in range(3):
        for j in range(i + 1, 3):
            if mats[i] @ mats[j] != mats[j] @ mats[i]:
                raise ScenarioError("holonomies of T^3 must commute")
    X, Y, Z = 0, 1, 2
    FXY, FXZ, FYZ = 0, 1, 2
    faces = (_commutator_face(0, X, Y), _commutator_face(0, X, Z), _commutator_face(0, Y, Z))
    cube = Cell3(
        0,
        (
            (FXY, 1, ()),
            (FXY, -1, ((Z, 1),)),
            (FXZ, -1, ()),
            (FXZ, 1, ((Y, 1),)),
            (FYZ, 1, ()),
            (FYZ, -1, ((X, 1),)),
        ),
    )
    model = CwModel(1, ((0, 0),) * 3, faces, (cube,))
    rep = Representation(n, tuple(mats))

    def one_minus(src, dst, edge, sign=1):
        # sign * (1 - g_edge)
        return [Trajectory(src, dst, sign, ()), Trajectory(src, dst, -sign, ((edge, 1),))]

    pts = tuple(CriticalPoint(nm, len(nm) - 1, 0) for nm in ("c", "cx", "cy", "cz", "cxy", "cxz", "cyz", "cxyz"))
    trajs = []
    for e, nm in ((X, "cx"), (Y, "cy"), (Z, "cz")):
        trajs += one_minus(nm, "c", e, -1)
    trajs += one_minus("cxy", "cx", Y) + one_minus("cxy", "cy", X, -1)
    trajs += one_minus("cxz", "cx", Z) + one_minus("cxz", "cz", X, -1)
    trajs += one_minus("cyz", "cy", Z) + one_minus("cyz", "cz", Y, -1)
    trajs += one_minus("cxyz", "cxy", Z) + one_minus("cxyz", "cxz", Y, -1) + one_minus("cxyz", "cyz", X)
    md = MorseData(pts, tuple(trajs), (0, 0, 0), ABSOLUTE)
    sc = Scenario(model, rep, md, None, name)
    report = sc.validate()
    if not report.passed:
        raise ScenarioError(f"generated scenario failed validation: {[c.name for c in report.failures()]}")
    return sc


__all__ = [
    "Boundary",
    "Scenario",
    "ScenarioError",
    "build_torus_cylinder",
    "build_three_torus",
    "cylinder_reference_propagator",
]
