"""Acceptance criteria. Every comparison is exact rational equality; each
criterion prints one PASS/FAIL line with its timing."""

import random
import time
from dataclasses import replace
from pathlib import Path

import pytest

from morsedefect.cli import main
from morsedefect.invariant import (
    d_equal,
    d_invariant,
    glue,
    integral_cycle_lattice,
    verify_gluing,
)
from morsedefect.localsys import HomChain, hom_boundary
from morsedefect.morse import mirror, morse_complex
from morsedefect.propagator import (
    contraction,
    glue_propagator,
    offdiagonal_residual,
    random_acyclic_complex,
    random_blocked_complex,
    random_propagator,
    verify_propagator,
)
from morsedefect.scenario import Scenario, cylinder_reference_propagator
from morsedefect.serialize import load_glued, load_scenario

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def shipped_scenarios() -> list[Scenario]:
    cyl = load_scenario(FIXTURES / "torus_cylinder.json")
    return [
        cyl,
        load_scenario(FIXTURES / "torus_cylinder_mirror.json"),
        load_scenario(FIXTURES / "n2" / "torus_cylinder.json"),
        load_scenario(FIXTURES / "three_torus.json"),
        glue(load_glued(FIXTURES / "double_cylinder.json")).scenario,
    ]


@pytest.fixture
def record(capsys):
    def _record(number: int, title: str, ok: bool, elapsed: float, bound: float | None = None, detail: str = ""):
        within = bound is None or elapsed < bound
        verdict = "PASS" if ok and within else "FAIL"
        limit = f" (limit {bound:g} s)" if bound is not None else ""
        extra = f" [{detail}]" if detail else ""
        with capsys.disabled():
            print(f"\ncriterion {number}: {verdict} {title}; {elapsed:.3f} s{limit}{extra}")
        assert ok, detail or title
        assert within, f"{title}: {elapsed:.3f} s exceeds {bound} s"

    return _record


def test_criterion_1_cylinder_invariant_is_zero(record, tmp_path, capsys):
    start = time.perf_counter()
    codes = []
    for k, path in enumerate((FIXTURES / "torus_cylinder.json", FIXTURES / "n2" / "torus_cylinder.json")):
        chain = tmp_path / f"z{k}.json"
        codes.append(main(["invariant", str(path), "--out", str(chain), "--quiet"]))
        codes.append(main(["compare", str(chain), "--quiet"]))
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    record(
        1,
        "torus-cylinder class equals zero for n=1 and n=2",
        codes == [0, 0, 0, 0],
        elapsed,
        1.0,
        f"exit codes {codes}",
    )


def test_criterion_2_reference_propagator(record):
    start = time.perf_counter()
    results = []
    for path in (FIXTURES / "torus_cylinder.json", FIXTURES / "n2" / "torus_cylinder.json"):
        sc = load_scenario(path)
        cx = morse_complex(sc.model, sc.rep, sc.morse).complex
        results.append(verify_propagator(cx, cylinder_reference_propagator(sc)).passed)
    record(
        2, "hand-built cylinder propagator satisfies dG + Gd = id exactly", all(results), time.perf_counter() - start
    )


def test_criterion_3_contraction_suite(record):
    start = time.perf_counter()
    bad = []
    for seed in range(100):
        c = random_acyclic_complex(random.Random(seed), top=3, max_cells=8, max_fiber=3)
        if not verify_propagator(c, contraction(c)).passed:
            bad.append(seed)
    record(
        3,
        "100 random acyclic complexes contract exactly",
        not bad,
        time.perf_counter() - start,
        30.0,
        f"failing seeds {bad}" if bad else "",
    )


def test_criterion_4_glued_propagator_suite(record):
    start = time.perf_counter()
    bad = []
    for seed in range(100):
        bc, Ga, Gb = random_blocked_complex(seed, top=3, max_cells=8, max_fiber=3)
        G = glue_propagator(bc, Ga, Gb)
        ok = verify_propagator(bc.total(), G).passed
        ok = ok and all(offdiagonal_residual(bc, G, k).is_zero() for k in range(bc.top + 1))
        if not ok:
            bad.append(seed)
    record(
        4,
        "100 random blocked complexes glue to exact propagators",
        not bad,
        time.perf_counter() - start,
        60.0,
        f"failing seeds {bad}" if bad else "",
    )


def test_criterion_5_defect_chains_are_cycles(record):
    start = time.perf_counter()
    bad = []
    for sc in shipped_scenarios():
        cx = morse_complex(sc.model, sc.rep, sc.morse).complex
        for G in [None] + [random_propagator(cx, s) for s in range(3)]:
            chain = d_invariant(sc.model, sc.rep, sc.morse, G).chain
            if any(not m.is_zero() for m in hom_boundary(chain, sc.rep)):
                bad.append(sc.name)
    record(
        5,
        "every defect chain has vanishing twisted boundary",
        not bad,
        time.perf_counter() - start,
        None,
        ", ".join(bad),
    )


def test_criterion_6_choice_independence(record):
    start = time.perf_counter()
    bad = []
    for sc in shipped_scenarios():
        base = d_invariant(sc.model, sc.rep, sc.morse)
        cx = morse_complex(sc.model, sc.rep, sc.morse).complex
        alternatives = [
            d_invariant(sc.model, sc.rep, sc.morse, random_propagator(cx, 100 + s)).chain for s in range(10)
        ]
        basis = integral_cycle_lattice(sc.model)
        for k in range(3):
            cyc = basis[k % len(basis)]
            c_f = [c + (k + 1) * x for c, x in zip(base.c_f, cyc)]
            alternatives.append(d_invariant(sc.model, sc.rep, sc.morse.with_c_f(c_f)).chain)
        if not all(d_equal(sc.model, sc.rep, z, base.chain)[0] for z in alternatives):
            bad.append(sc.name)
    record(
        6,
        "10 propagators and 3 bounding chains give one class per scenario",
        not bad,
        time.perf_counter() - start,
        None,
        ", ".join(bad),
    )


def test_criterion_7_gluing_additivity(record):
    start = time.perf_counter()
    gs = load_glued(FIXTURES / "double_cylinder.json")
    report = verify_gluing(gs)
    names = {c.name for c in report.checks}
    required = {"a_chain_cycle", "b_chain_cycle", "glued_propagator", "chain_additivity", "class_additivity"}
    c = gs.cross[0]
    control = verify_gluing(replace(gs, cross=(replace(c, sign=-c.sign),) + gs.cross[1:]))
    ok = report.passed and required <= names and not control.passed
    detail = "" if ok else f"failures {[c.name for c in report.failures()]}, control passed={control.passed}"
    record(
        7,
        "double of the cylinder: part cycles, exact chain sum, class sum; corrupted sign rejected",
        ok,
        time.perf_counter() - start,
        5.0,
        detail,
    )


def test_criterion_8_both_orientations_vanish(record):
    start = time.perf_counter()
    sc = load_scenario(FIXTURES / "torus_cylinder.json")
    flipped = Scenario(sc.model, sc.rep, mirror(sc.model, sc.morse), sc.boundary, "flipped")
    results = []
    for s in (sc, flipped):
        z = d_invariant(s.model, s.rep, s.morse).chain
        results.append(d_equal(s.model, s.rep, z, HomChain.zero(s.model, s.rep.fiber_dim))[0])
    record(
        8, "increasing and decreasing cylinder data both give the zero class", all(results), time.perf_counter() - start
    )


def test_criterion_9_homology_models_agree(record):
    start = time.perf_counter()
    bad = []
    for sc in shipped_scenarios():
        rep = sc.homology_report()
        if not rep.passed:
            bad.append(f"{sc.name}: {[(c.name, c.detail) for c in rep.failures()]}")
    record(
        9,
        "Morse and cellular Betti numbers agree for V and Hom on every shipped scenario",
        not bad,
        time.perf_counter() - start,
        None,
        "; ".join(bad),
    )
