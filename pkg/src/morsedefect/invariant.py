"""The defect 1-cycle of a Morse function, its homology class, and gluing."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exactlin import Matrix, hermite_normal_form, kernel_basis, lattice_membership, rank_and_solve
from .localsys import (
    Cell3,
    ComplexError,
    CwModel,
    Face,
    HomChain,
    ModelError,
    Representation,
    adjoint_system,
    hom_boundary,
    is_twisted_cycle,
    path_holonomy,
    push_path,
    twisted_complex,
)
from .morse import (
    ABSOLUTE,
    TOP_INDEX,
    CriticalPoint,
    MorseData,
    Trajectory,
    mirror,
    morse_complex,
    resolved_c_f,
    validate,
)
from .propagator import (
    BlockedComplex,
    Propagator,
    contraction,
    glue_propagator,
    verify_propagator,
)
from .report import Report
from .scenario import Boundary, Scenario


def defect_chain(model: CwModel, rep: Representation, md: MorseData, G: Propagator, c_f: Sequence[int]) -> HomChain:
    """``-c_f (x) 1`` plus every trajectory pushed forward with its propagator block.

    A trajectory ``p -> q`` from a point of index ``i`` contributes
    ``(-1)^(i+1) sign * G_{p,q} * holonomy`` transported along its path. The
    index sign makes the boundary at each critical point ``(-1)^ind`` times
    the identity, which cancels the boundary of ``-c_f``; the result is checked
    to be a twisted cycle and a ``ComplexError`` is raised otherwise.
    """
    mc = morse_complex(model, rep, md)
    n = rep.fiber_dim
    chain = -HomChain.from_integral(model, n, c_f)
    for t in md.trajectories:
        i = md.point(t.source).index
        path = md.path(t)
        h = path_holonomy(rep, path)
        block = mc.block(G.g(i), t.source, t.target, md)
        coeff = block @ h * ((-1) ** (i + 1) * t.sign)
        chain = chain + push_path(model, rep, path, coeff)
    bad = [v for v, m in enumerate(hom_boundary(chain, rep)) if not m.is_zero()]
    if bad:
        raise ComplexError(f"defect chain is not a cycle (boundary nonzero at vertices {bad})")
    return chain


def integral_cycle_lattice(model: CwModel) -> list[list[int]]:
    """A Z-basis of the integral 1-cycles, from the Hermite form of ``d_1^T``."""
    d1 = model.integral_d1()
    rows = [[d1[v][e] for v in range(model.n_vertices)] for e in range(len(model.edges))]
    if not rows:
        return []
    if model.n_vertices == 0:
        return [[int(i == j) for j in range(len(rows))] for i in range(len(rows))]
    H, U = hermite_normal_form(rows)
    return [list(U[r]) for r in range(len(rows)) if not any(H[r])]


@dataclass(frozen=True)
class DInvariant:
    model: CwModel
    rep: Representation
    chain: HomChain
    propagator: Propagator
    c_f: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "fiber_dim": self.chain.fiber_dim,
            "coefficients": [c.to_json() for c in self.chain.coefficients],
            "c_f": list(self.c_f),
        }


def d_invariant(model: CwModel, rep: Representation, md: MorseData, G: Optional[Propagator] = None) -> DInvariant:
    report = validate(model, rep, md)
    if not report.passed:
        raise ModelError("Morse data failed validation: " + ", ".join(c.name for c in report.failures()))
    mc = morse_complex(model, rep, md)
    if G is None:
        G = contraction(mc.complex)
    else:
        check = verify_propagator(mc.complex, G)
        if not check.passed:
            raise ComplexError(
                "supplied propagator fails dG + Gd = id in " + ", ".join(c.name for c in check.failures())
            )
    c_f = resolved_c_f(model, md)
    return DInvariant(model, rep, defect_chain(model, rep, md, G, c_f), G, tuple(c_f))


def d_equal(model: CwModel, rep: Representation, z1: HomChain, z2: Optional[HomChain] = None) -> tuple[bool, dict]:
    """Decide whether ``z1 - z2`` is a twisted boundary plus an integral cycle times identity.

    Returns ``(equal, certificate)``. When equal, the certificate holds the
    integer coefficients ``n`` on the cycle lattice basis and a 2-chain ``w``
    with ``d_2 w = z1 - z2 - sum n_i (cycle_i (x) 1)``.
    """
    n = rep.fiber_dim
    if z2 is None:
        z2 = HomChain.zero(model, n)
    for label, z in (("first", z1), ("second", z2)):
        if z.model != model or z.fiber_dim != n:
            raise ValueError(f"{label} chain does not live on this model")
        if any(not m.is_zero() for m in hom_boundary(z, rep)):
            raise ValueError(f"{label} chain is not a twisted cycle")
    cx = twisted_complex(model, adjoint_system(rep))
    d2 = cx.d(2)
    diff = (z1 - z2).to_vector()
    basis = integral_cycle_lattice(model)
    gens = [HomChain.from_integral(model, n, cyc).to_vector() for cyc in basis]

    # Work modulo im d_2: project onto the annihilator, then solve over Z.
    annihilator = kernel_basis(d2.transpose())
    if annihilator:
        proj = Matrix.hstack(annihilator).transpose()
        target = (proj @ diff).entries()
        images = [(proj @ g).entries() for g in gens]
    else:
        target, images = (), [() for _ in gens]
    if images:
        coeffs = lattice_membership(images, target)
    else:
        coeffs = [] if not any(target) else None
    if coeffs is None:
        return False, {"reason": "difference is not an integral multiple of the identity modulo boundaries"}
    rest = diff
    for c, g in zip(coeffs, gens):
        rest = rest - g * c
    _, w, _ = rank_and_solve(d2, rest)
    if w is None:
        # unreachable when the projection is exact; kept as a safeguard
        return False, {"reason": "no 2-chain bounds the remainder"}
    assert d2 @ w == rest
    return True, {"n": [int(c) for c in coeffs], "cycles": basis, "w": w}


# ---------------------------------------------------------------- gluing


@dataclass(frozen=True)
class CrossTrajectory:
    """A trajectory from a point of part ``a`` to a point of part ``b``.

    Each step names the part whose edge it uses.
    """

    source: str
    target: str
    sign: int
    steps: tuple[tuple[str, int, int], ...]


@dataclass(frozen=True)
class GluedScenario:
    a: Scenario
    b: Scenario
    vertex_pairs: tuple[tuple[int, int], ...]
    edge_pairs: tuple[tuple[int, int], ...]
    face_pairs: tuple[tuple[int, int], ...]
    cross: tuple[CrossTrajectory, ...] = ()
    name: str = "glued"


@dataclass(frozen=True)
class Glued:
    scenario: Scenario
    a_vertices: tuple[int, ...]
    b_vertices: tuple[int, ...]
    a_edges: tuple[int, ...]
    b_edges: tuple[int, ...]
    edge_origin: tuple[tuple[str, int], ...] = field(repr=False)


class GluingError(ValueError):
    pass


def _glue_cells(gs: GluedScenario, cross: Sequence[CrossTrajectory]) -> Glued:
    A, B = gs.a.model, gs.b.model
    ra, rb = gs.a.rep, gs.b.rep
    if ra.fiber_dim != rb.fiber_dim:
        raise GluingError("parts carry systems of different rank")
    vpair = dict((vb, va) for va, vb in gs.vertex_pairs)
    epair = dict((eb, ea) for ea, eb in gs.edge_pairs)
    fpair = dict((fb, fa) for fa, fb in gs.face_pairs)
    for label, pairs in (("vertex", gs.vertex_pairs), ("edge", gs.edge_pairs), ("face", gs.face_pairs)):
        if len({p[0] for p in pairs}) != len(pairs) or len({p[1] for p in pairs}) != len(pairs):
            raise GluingError(f"{label} identification is not one-to-one")

    vmap_a = list(range(A.n_vertices))
    vmap_b, nv = [], A.n_vertices
    for v in range(B.n_vertices):
        if v in vpair:
            vmap_b.append(vpair[v])
        else:
            vmap_b.append(nv)
            nv += 1

    edges = list(A.edges)
    hol = list(ra.holonomy)
    origin = [("a", e) for e in range(len(A.edges))]
    emap_b = []
    for e, (s, t) in enumerate(B.edges):
        if e in epair:
            ea = epair[e]
            if A.edges[ea] != (vmap_b[s], vmap_b[t]):
                raise GluingError(f"identified edges a:{ea} and b:{e} have different endpoints")
            if ra.holonomy[ea] != rb.holonomy[e]:
                raise GluingError(f"holonomy mismatch on identified edge a:{ea} / b:{e}")
            emap_b.append(ea)
        else:
            emap_b.append(len(edges))
            edges.append((vmap_b[s], vmap_b[t]))
            hol.append(rb.holonomy[e])
            origin.append(("b", e))

    def remap_steps(steps, emap):
        return tuple((emap[e], d) for e, d in steps)

    faces = list(A.faces)
    fmap_b = []
    for f, face in enumerate(B.faces):
        moved = Face(vmap_b[face.base], remap_steps(face.word, emap_b))
        if f in fpair:
            if A.faces[fpair[f]] != moved:
                raise GluingError(f"identified faces a:{fpair[f]} and b:{f} have different boundary words")
            fmap_b.append(fpair[f])
        else:
            fmap_b.append(len(faces))
            faces.append(moved)

    cells = list(A.cells3)
    for c in B.cells3:
        cells.append(Cell3(vmap_b[c.base], tuple((fmap_b[f], k, remap_steps(p, emap_b)) for f, k, p in c.boundary)))
    model = CwModel(nv, tuple(edges), tuple(faces), tuple(cells))
    rep = Representation(ra.fiber_dim, tuple(hol))

    ma, mb = gs.a.morse, gs.b.morse
    a_names = {p.name for p in ma.critical_points}
    b_names = {p.name for p in mb.critical_points}
    clash = a_names & b_names
    if clash:
        raise GluingError(f"critical point names used in both parts: {sorted(clash)}")
    pts = tuple(ma.critical_points) + tuple(
        CriticalPoint(p.name, p.index, vmap_b[p.vertex]) for p in mb.critical_points
    )
    trajs = list(ma.trajectories)
    trajs += [Trajectory(t.source, t.target, t.sign, remap_steps(t.steps, emap_b)) for t in mb.trajectories]
    emaps = {"a": list(range(len(A.edges))), "b": emap_b}
    for k, ct in enumerate(cross):
        if ct.source in b_names and ct.target in a_names:
            raise GluingError(f"cross trajectory {k} runs from part b to part a; only a -> b is allowed")
        if ct.source not in a_names or ct.target not in b_names:
            raise GluingError(f"cross trajectory {k} must run from a point of a to a point of b")
        try:
            steps = tuple((emaps[part][e], d) for part, e, d in ct.steps)
        except (KeyError, IndexError):
            raise GluingError(f"cross trajectory {k} names a missing edge") from None
        trajs.append(Trajectory(ct.source, ct.target, ct.sign, steps))

    boundary_edges = set(e for e, _ in gs.edge_pairs)
    cf_a, cf_b = resolved_c_f(A, ma), resolved_c_f(B, mb)
    for label, cf, ids in (("a", cf_a, boundary_edges), ("b", cf_b, set(epair))):
        touched = sorted(e for e in ids if cf[e])
        if touched:
            raise GluingError(f"c_f of part {label} meets the glued boundary on edges {touched}")
    c_f = [0] * len(edges)
    for e, c in enumerate(cf_a):
        c_f[e] += c
    for e, c in enumerate(cf_b):
        c_f[emap_b[e]] += c
    md = MorseData(pts, tuple(trajs), tuple(c_f), ABSOLUTE)
    sc = Scenario(model, rep, md, None, gs.name)
    return Glued(sc, tuple(vmap_a), tuple(vmap_b), tuple(range(len(A.edges))), tuple(emap_b), tuple(origin))


def glue(gs: GluedScenario) -> Glued:
    """Quotient model, combined system and Morse data of a two-part gluing."""
    return _glue_cells(gs, gs.cross)


def verify_gluing(gs: GluedScenario) -> Report:
    """Check the glued propagator and the additivity of the defect cycle."""
    report = Report("verify_gluing")
    try:
        glued = glue(gs)
    except (GluingError, ModelError, ValueError) as exc:
        report.add("glue", False, reason=str(exc))
        return report
    sc = glued.scenario
    for check in validate(sc.model, sc.rep, sc.morse).checks:
        report.add(f"glued_{check.name}", check.passed, **check.detail)
    if not report.passed:
        return report

    for label, part in (("a", gs.a), ("b", gs.b)):
        dims = part.boundary_homology()
        if dims is not None and any(dims):
            report.warnings.append(
                f"boundary of part {label} is not acyclic (Betti numbers {dims}); "
                "the glued chain may depend on the gluing data"
            )

    mca = morse_complex(gs.a.model, gs.a.rep, gs.a.morse)
    mcb = morse_complex(gs.b.model, gs.b.rep, gs.b.morse)
    total = morse_complex(sc.model, sc.rep, sc.morse)
    bc = BlockedComplex.split(total.complex, mca.complex.dims)
    report.add("a_block_matches_part", bc.a == mca.complex)
    report.add("b_block_matches_part", bc.b == mcb.complex)
    try:
        Ga, Gb = contraction(mca.complex), contraction(mcb.complex)
    except ComplexError as exc:
        report.add("parts_acyclic", False, reason=str(exc))
        return report
    GM = glue_propagator(bc, Ga, Gb)
    vp = verify_propagator(total.complex, GM)
    report.add("glued_propagator", vp.passed, failures=[c.name for c in vp.failures()])

    try:
        Ia = d_invariant(gs.a.model, gs.a.rep, gs.a.morse, Ga)
        Ib = d_invariant(gs.b.model, gs.b.rep, gs.b.morse, Gb)
        IM = d_invariant(sc.model, sc.rep, sc.morse, GM)
    except (ComplexError, ModelError) as exc:
        report.add("defect_cycles", False, reason=str(exc))
        return report
    report.add("a_chain_cycle", is_twisted_cycle(Ia.chain, gs.a.rep))
    report.add("b_chain_cycle", is_twisted_cycle(Ib.chain, gs.b.rep))
    report.add("glued_chain_cycle", is_twisted_cycle(IM.chain, sc.rep))
    pushed = Ia.chain.pushforward(sc.model, glued.a_edges) + Ib.chain.pushforward(sc.model, glued.b_edges)
    report.add("chain_additivity", IM.chain == pushed)

    fresh = d_invariant(sc.model, sc.rep, sc.morse)
    same, cert = d_equal(sc.model, sc.rep, fresh.chain, pushed)
    report.add("class_additivity", same, certificate=cert)
    return report


def _bfs_path(model: CwModel, start: int, goal: int) -> tuple[tuple[int, int], ...]:
    prev: dict[int, tuple[int, tuple[int, int]]] = {start: (start, (-1, 0))}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for e, (s, t) in enumerate(model.edges):
            for a, b, d in ((s, t, 1), (t, s, -1)):
                if a == v and b not in prev:
                    prev[b] = (v, (e, d))
                    queue.append(b)
    if goal not in prev:
        raise GluingError(f"vertices {start} and {goal} are not connected in the glued model")
    steps = []
    v = goal
    while v != start:
        v, step = prev[v]
        steps.append(step)
    return tuple(reversed(steps))


def _index_links(ma: MorseData, mb: MorseData) -> list[tuple[str, str, int]]:
    links = []
    for i in range(TOP_INDEX + 1):
        for p, q in zip(ma.of_index(i), mb.of_index(i)):
            links.append((p.name, q.name, 1))
    return links


def double(
    scenario: Scenario, links: Optional[Sequence[tuple[str, str, int]]] = None, suffix: str = "'"
) -> GluedScenario:
    """Glue a scenario to a mirrored copy of itself along its designated boundary.

    The cross trajectories come from a degree-0 homotopy ``Y`` between the two
    Morse complexes: each link ``(a_point, b_point, sign)`` joins points of the
    same index by a shortest path in the glued 1-skeleton. A link followed by a
    trajectory of ``b``, or a trajectory of ``a`` followed by a link, gives a
    cross trajectory, so that the off-diagonal block is ``d_b Y - Y d_a`` and
    the glued boundary squares to zero. Without explicit links, points are
    paired by index in declaration order; a closed scenario (no boundary)
    doubles to a disjoint union with no cross trajectories.
    """
    bd = scenario.boundary or Boundary()
    mb = mirror(scenario.model, scenario.morse, suffix)
    if mb.c_f is None:
        mb = mb.with_c_f([-c for c in resolved_c_f(scenario.model, scenario.morse)])
    b = Scenario(scenario.model, scenario.rep, mb, bd, scenario.name + suffix)
    base = GluedScenario(
        scenario,
        b,
        tuple((v, v) for v in bd.vertices),
        tuple((e, e) for e in bd.edges),
        tuple((f, f) for f in bd.faces),
        (),
        scenario.name + "_double",
    )
    glued = _glue_cells(base, ())
    ma = scenario.morse
    if links is None:
        links = []
        if not bd.is_empty():
            links = _index_links(ma, mb)
    origin = glued.edge_origin
    cross = []
    for pa, qb, sigma in links:
        p, q = ma.point(pa), mb.point(qb)
        if p.index != q.index:
            raise GluingError(f"link {pa} -> {qb} joins points of different index")
        link = tuple(
            (origin[e][0], origin[e][1], d)
            for e, d in _bfs_path(glued.scenario.model, glued.a_vertices[p.vertex], glued.b_vertices[q.vertex])
        )
        for t in mb.trajectories:
            if t.source == qb:
                cross.append(
                    CrossTrajectory(pa, t.target, sigma * t.sign, link + tuple(("b", e, d) for e, d in t.steps))
                )
        for t in ma.trajectories:
            if t.target == pa:
                cross.append(
                    CrossTrajectory(t.source, qb, -sigma * t.sign, tuple(("a", e, d) for e, d in t.steps) + link)
                )
    return GluedScenario(base.a, base.b, base.vertex_pairs, base.edge_pairs, base.face_pairs, tuple(cross), base.name)


__all__ = [
    "DInvariant",
    "CrossTrajectory",
    "GluedScenario",
    "Glued",
    "GluingError",
    "defect_chain",
    "integral_cycle_lattice",
    "d_invariant",
    "d_equal",
    "glue",
    "verify_gluing",
    "double",
]
