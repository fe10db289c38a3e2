import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from morsedefect.exactlin import Matrix
from morsedefect.localsys import ComplexError, TwistedComplex
from morsedefect.morse import morse_complex
from morsedefect.propagator import (
    BlockedComplex,
    Propagator,
    acyclicity_defect,
    contraction,
    glue_propagator,
    offdiagonal_residual,
    random_acyclic_complex,
    random_blocked_complex,
    random_propagator,
    random_unimodular,
    residual,
    verify_propagator,
)
from morsedefect.scenario import build_torus_cylinder, cylinder_reference_propagator

seeds = st.integers(0, 10**6)


def sympy_is_acyclic(c: TwistedComplex) -> bool:
    ranks = []
    for i in range(c.top + 2):
        D = c.d(i)
        ranks.append(sympy.Matrix(D.to_rows()).rank() if D.rows and D.cols else 0)
    return all(c.dim(i) == ranks[i] + ranks[i + 1] for i in range(c.top + 1))


@given(seeds)
def test_random_complexes_are_acyclic(seed):
    c = random_acyclic_complex(random.Random(seed))
    assert c.square_defects() == []
    assert sympy_is_acyclic(c)
    assert acyclicity_defect(c) is None


@given(seeds)
def test_contraction_is_a_propagator(seed):
    c = random_acyclic_complex(random.Random(seed))
    assert verify_propagator(c, contraction(c)).passed


@given(seeds, seeds)
def test_random_propagator_is_a_propagator(seed, seed2):
    c = random_acyclic_complex(random.Random(seed))
    assert verify_propagator(c, random_propagator(c, seed2)).passed


@given(seeds)
def test_unimodular_has_unit_determinant(seed):
    rng = random.Random(seed)
    M, Mi = random_unimodular(rng, rng.randint(1, 5))
    assert abs(sympy.Matrix(M.to_rows()).det()) == 1
    assert M @ Mi == Matrix.identity(M.rows)


def test_contraction_rejects_non_acyclic():
    c = TwistedComplex((1, 1), (Matrix.zeros(0, 1), Matrix.zeros(1, 1)))
    with pytest.raises(ComplexError, match="not acyclic"):
        contraction(c)


def test_contraction_rejects_non_complex():
    one = Matrix.from_rows([[1]])
    c = TwistedComplex((1, 1, 1), (Matrix.zeros(0, 1), one, one))
    with pytest.raises(ComplexError, match="d\\^2"):
        contraction(c)


def test_reference_cylinder_propagator():
    sc = build_torus_cylinder(2, 3)
    cx = morse_complex(sc.model, sc.rep, sc.morse).complex
    G = cylinder_reference_propagator(sc)
    assert verify_propagator(cx, G).passed
    # only the two hand-chosen blocks are nonzero: 1/(1-2) and 1/(1-1/2)
    assert G.g(3) == Matrix.from_rows([[-1, 0]])
    assert G.g(2) == Matrix.from_rows([[0], [2]])


def test_corrupted_propagator_reports_residual():
    sc = build_torus_cylinder(2, 3)
    cx = morse_complex(sc.model, sc.rep, sc.morse).complex
    G = cylinder_reference_propagator(sc)
    bad = Propagator(G.maps[:3] + (G.maps[3] * 2,) + G.maps[4:])
    report = verify_propagator(cx, bad)
    assert not report.passed
    failing = {c.name for c in report.failures()}
    assert "degree_3" in failing
    assert not residual(cx, bad, 3).is_zero()


def test_empty_complex_contracts_to_empty_maps():
    c = TwistedComplex((0, 0, 0, 0), tuple(Matrix.zeros(0, 0) for _ in range(4)))
    assert verify_propagator(c, contraction(c)).passed


@given(seeds)
def test_glued_propagator(seed):
    bc, Ga, Gb = random_blocked_complex(seed)
    assert bc.anticommutation_defects() == []
    G = glue_propagator(bc, Ga, Gb)
    total = bc.total()
    assert verify_propagator(total, G).passed
    for k in range(total.top + 1):
        assert offdiagonal_residual(bc, G, k).is_zero()


@given(seeds)
def test_glued_propagator_with_zero_cross_is_block_diagonal(seed):
    bc, Ga, Gb = random_blocked_complex(seed, zero_cross=True)
    G = glue_propagator(bc, Ga, Gb)
    for k in range(bc.top + 2):
        m = G.g(k)
        ra, ca = bc.a.dim(k), bc.a.dim(k - 1)
        assert m.submatrix(range(ra, m.rows), range(ca)).is_zero()


@given(seeds)
def test_split_inverts_total(seed):
    bc, _, _ = random_blocked_complex(seed)
    again = BlockedComplex.split(bc.total(), bc.a.dims)
    assert again == bc


def test_glue_rejects_broken_cross_map():
    checked = 0
    for seed in range(40):
        bc, Ga, Gb = random_blocked_complex(seed)
        cross = [m + Matrix(m.rows, m.cols, [1] * (m.rows * m.cols)) for m in bc.cross]
        broken = BlockedComplex(bc.a, bc.b, tuple(cross))
        if broken.anticommutation_defects():
            with pytest.raises(ComplexError, match="d\\^2"):
                glue_propagator(broken, Ga, Gb)
            checked += 1
    assert checked > 0
