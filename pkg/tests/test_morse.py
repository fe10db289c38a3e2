from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morsedefect.exactlin import Matrix
from morsedefect.localsys import ComplexError, CwModel, ModelError, Representation
from morsedefect.morse import (
    ABSOLUTE,
    RELATIVE,
    CriticalPoint,
    MorseData,
    Trajectory,
    mirror,
    morse_complex,
    resolved_c_f,
    solve_cf,
    validate,
)
from morsedefect.scenario import build_three_torus, build_torus_cylinder

SEGMENT = CwModel(2, ((0, 1),))


def failed(report):
    return {c.name for c in report.failures()}


def corrupt_sign(md, k):
    trajs = list(md.trajectories)
    t = trajs[k]
    trajs[k] = Trajectory(t.source, t.target, -t.sign, t.steps)
    return MorseData(md.critical_points, tuple(trajs), md.c_f, md.kind)


def test_cylinder_blocks():
    sc = build_torus_cylinder(2, 3)
    cx = morse_complex(sc.model, sc.rep, sc.morse).complex
    assert cx.dims == (0, 1, 2, 1)
    # 1 - a and a (1 - b) out of NP, then 1 - b and 1 - 1/a into SP
    assert cx.d(3) == Matrix.from_rows([[-1], [-4]])
    assert cx.d(2) == Matrix.from_rows([[-2, Fraction(1, 2)]])


def test_shipped_data_validates():
    for sc in (build_torus_cylinder(2, 3), build_three_torus(2, 3, 5)):
        assert validate(sc.model, sc.rep, sc.morse).passed


def test_mirrored_data_validates_and_flips_kind():
    sc = build_torus_cylinder(2, 3)
    md = mirror(sc.model, sc.morse, "'")
    assert validate(sc.model, sc.rep, md).passed
    assert md.kind == ABSOLUTE and sc.morse.kind == RELATIVE
    assert [p.index for p in md.critical_points] == [0, 1, 1, 2]


@given(st.integers(0, 7))
def test_corrupted_sign_breaks_d_squared(k):
    sc = build_torus_cylinder(2, 3)
    bad = corrupt_sign(sc.morse, k)
    assert "d_squared_zero" in failed(validate(sc.model, sc.rep, bad))
    with pytest.raises(ComplexError, match="does not square to zero"):
        morse_complex(sc.model, sc.rep, bad)


def test_index_and_endpoint_violations_are_reported():
    rep = Representation(1, (Matrix.from_rows([[2]]),))
    md = MorseData(
        (CriticalPoint("a", 2, 0), CriticalPoint("b", 0, 1)),
        (Trajectory("a", "b", 1, ()),),
    )
    assert {"index_adjacency", "path_endpoints"} <= failed(validate(SEGMENT, rep, md))
    with pytest.raises(ModelError):
        morse_complex(SEGMENT, rep, md)


def test_duplicate_names_and_bad_sign():
    with pytest.raises(ModelError, match="duplicate"):
        MorseData((CriticalPoint("a", 0, 0), CriticalPoint("a", 1, 0)))
    with pytest.raises(ModelError, match="sign"):
        Trajectory("a", "b", 2)


def test_solve_cf_on_segment():
    md = MorseData((CriticalPoint("m", 0, 0), CriticalPoint("s", 1, 1)))
    c = solve_cf(SEGMENT, md)
    assert c == [-1]
    assert SEGMENT.integral_boundary_of(c) == md.signed_points(2)


def test_solve_cf_rejects_unbalanced_component():
    md = MorseData((CriticalPoint("m", 0, 0),))
    with pytest.raises(ValueError, match="not an integral boundary"):
        solve_cf(SEGMENT, md)
    rep = Representation(1, (Matrix.from_rows([[2]]),))
    assert "c_f_boundary" in failed(validate(SEGMENT, rep, md))


def test_supplied_c_f_is_checked():
    md = MorseData((CriticalPoint("m", 0, 0), CriticalPoint("s", 1, 1)), (), (1,))
    with pytest.raises(ValueError, match="does not bound"):
        resolved_c_f(SEGMENT, md)
    assert resolved_c_f(SEGMENT, md.with_c_f((-1,))) == (-1,)


def test_mirror_twice_restores_data():
    sc = build_three_torus(2, 3, 5)
    back = mirror(sc.model, mirror(sc.model, sc.morse))
    assert [(p.name, p.index) for p in back.critical_points] == [(p.name, p.index) for p in sc.morse.critical_points]
    assert morse_complex(sc.model, sc.rep, back).complex == morse_complex(sc.model, sc.rep, sc.morse).complex
