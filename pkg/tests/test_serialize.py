import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morsedefect.exactlin import Matrix
from morsedefect.invariant import d_invariant, double
from morsedefect.scenario import build_three_torus, build_torus_cylinder
from morsedefect.serialize import (
    InputError,
    dumps,
    load_chain,
    load_glued,
    load_scenario,
    save_chain,
    save_glued,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    write_atomic,
)

DIAG2 = ([[2, 0], [0, 3]], [[5, 0], [0, 7]])


def roundtrip(sc):
    return scenario_from_dict(json.loads(dumps(scenario_to_dict(sc))))


@pytest.mark.parametrize(
    "sc",
    [build_torus_cylinder(2, 3), build_torus_cylinder(*DIAG2), build_three_torus(2, 3, 5)],
    ids=lambda s: s.name,
)
def test_round_trip_is_identity(sc, tmp_path):
    assert roundtrip(sc) == sc
    path = tmp_path / "s.json"
    save_scenario(sc, path)
    assert load_scenario(path) == sc


nonzero = st.fractions(min_value=-7, max_value=7, max_denominator=9).filter(lambda x: x not in (0, 1))


@given(nonzero, nonzero)
def test_round_trip_keeps_rationals_exact(a, b):
    sc = build_torus_cylinder(a, b)
    back = roundtrip(sc)
    assert back == sc
    assert back.rep.holonomy[0] == Matrix.from_rows([[a]])


def test_rationals_are_written_as_strings():
    sc = build_torus_cylinder(Fraction(1, 3), 2)
    data = scenario_to_dict(sc)
    assert data["holonomy"][0] == [["1/3"]]


def test_shipped_fixtures_match_generators(fixtures_dir):
    assert load_scenario(fixtures_dir / "torus_cylinder.json") == build_torus_cylinder(2, 3)
    assert load_scenario(fixtures_dir / "three_torus.json") == build_three_torus(2, 3, 5)
    assert load_scenario(fixtures_dir / "n2" / "torus_cylinder.json") == build_torus_cylinder(*DIAG2)
    gs = load_glued(fixtures_dir / "double_cylinder.json")
    assert gs == double(build_torus_cylinder(2, 3))


def test_glued_round_trip(tmp_path):
    gs = double(build_torus_cylinder(2, 3))
    save_glued(gs, tmp_path / "g" / "double.json", tmp_path / "parts" / "a.json", tmp_path / "parts" / "b.json")
    raw = json.loads((tmp_path / "g" / "double.json").read_text())
    assert raw["a"] == "../parts/a.json"
    assert load_glued(tmp_path / "g" / "double.json") == gs


def test_chain_round_trip(tmp_path):
    sc = build_torus_cylinder(2, 3)
    save_scenario(sc, tmp_path / "s.json")
    chain = d_invariant(sc.model, sc.rep, sc.morse).chain
    save_chain(chain, tmp_path / "out" / "z.json", tmp_path / "s.json")
    back, sc2 = load_chain(tmp_path / "out" / "z.json")
    assert back == chain and sc2 == sc


def test_output_is_deterministic():
    a = dumps(scenario_to_dict(build_torus_cylinder(2, 3)))
    b = dumps(scenario_to_dict(build_torus_cylinder(2, 3)))
    assert a == b


def test_atomic_write_leaves_no_temporaries(tmp_path):
    write_atomic(tmp_path / "x.json", "{}\n")
    write_atomic(tmp_path / "x.json", "[]\n")
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]
    assert (tmp_path / "x.json").read_text() == "[]\n"


def _cylinder_dict():
    return scenario_to_dict(build_torus_cylinder(2, 3))


def test_singular_holonomy_in_file(tmp_path):
    data = _cylinder_dict()
    data["holonomy"][3] = [["0"]]
    with pytest.raises(InputError, match="holonomy not invertible: edge 3"):
        scenario_from_dict(data)


def test_open_face_in_file():
    data = _cylinder_dict()
    data["model"]["faces"][3]["word"] = data["model"]["faces"][3]["word"][:1]
    with pytest.raises(InputError, match="boundary word not closed: face 3"):
        scenario_from_dict(data)


def test_syntax_error_reports_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "fiber_dim": 1,\n  oops\n}\n')
    with pytest.raises(InputError, match="line 3 column 3"):
        load_scenario(path)


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d.pop("model"), r"\$: missing field 'model'"),
        (lambda d: d["model"]["edges"].__setitem__(1, [1]), r"\$\.model\.edges\[1\]"),
        (lambda d: d["holonomy"][0][0].__setitem__(0, "two"), r"\$\.holonomy\[0\]\[0\]\[0\]: not an exact rational"),
        (lambda d: d["morse"]["trajectories"][2].__setitem__("sign", 0), r"\$\.morse\.trajectories\[2\]\.sign"),
        (lambda d: d.__setitem__("fiber_dim", True), r"\$\.fiber_dim: expected an integer"),
    ],
)
def test_schema_errors_name_their_location(mutate, where):
    data = _cylinder_dict()
    mutate(data)
    with pytest.raises(InputError, match=where):
        scenario_from_dict(data)


def test_missing_file():
    with pytest.raises(InputError, match="no such file"):
        load_scenario("/nonexistent/scenario.json")
