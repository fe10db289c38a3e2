import json
import shutil
import subprocess
import sys

import pytest

from morsedefect.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from morsedefect.scenario import build_torus_cylinder
from morsedefect.serialize import load_scenario


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def work(tmp_path, fixtures_dir):
    for name in ("torus_cylinder.json", "torus_cylinder_mirror.json", "double_cylinder.json", "three_torus.json"):
        shutil.copy(fixtures_dir / name, tmp_path / name)
    return tmp_path


def test_validate_and_homology(work, capsys):
    for cmd in ("validate", "homology"):
        for name in ("torus_cylinder.json", "three_torus.json"):
            code, out, _ = run([cmd, work / name], capsys)
            assert code == EXIT_OK
            assert json.loads(out)["passed"] is True


def test_homology_reports_betti_numbers(work, capsys):
    code, out, _ = run(["homology", work / "three_torus.json"], capsys)
    body = json.loads(out)
    assert body["cellular"] == {"V": [0, 0, 0, 0], "Hom": [1, 3, 3, 1]}


def test_invariant_chain_on_cylinder(work, capsys):
    code, out, _ = run(["invariant", work / "torus_cylinder.json", "--out", work / "z.json"], capsys)
    assert code == EXIT_OK
    coeffs = json.loads(out)["chain"]["coefficients"]
    assert coeffs == [[["1"]]] + [[["0"]]] * 7
    assert json.loads((work / "z.json").read_text())["scenario"] == "torus_cylinder.json"


def test_compare_against_zero_and_itself(work, capsys):
    run(["invariant", work / "torus_cylinder.json", "--out", work / "z.json"], capsys)
    code, _, _ = run(["compare", work / "z.json"], capsys)
    assert code == EXIT_OK
    code, out, _ = run(["compare", work / "z.json", work / "z.json"], capsys)
    cert = json.loads(out)["checks"][0]["detail"]["certificate"]
    assert code == EXIT_OK
    assert set(cert["n"]) == {0} and {x for row in cert["w"] for x in row} == {"0"}


def test_compare_detects_different_class(work, capsys):
    run(["invariant", work / "torus_cylinder.json", "--out", work / "z.json"], capsys)
    data = json.loads((work / "z.json").read_text())
    data["coefficients"][0] = [["1/2"]]
    (work / "half.json").write_text(json.dumps(data))
    code, out, _ = run(["compare", work / "half.json", "--quiet"], capsys)
    assert code == EXIT_FAIL
    assert out == "compare: FAIL\n"


def test_seeded_invariant_agrees(work, capsys):
    run(["invariant", work / "torus_cylinder.json", "--out", work / "z.json"], capsys)
    run(["invariant", work / "torus_cylinder.json", "--seed", 11, "--out", work / "z11.json"], capsys)
    code, _, _ = run(["compare", work / "z.json", work / "z11.json"], capsys)
    assert code == EXIT_OK


def test_propagator_snapshot(work, capsys):
    code, out, _ = run(["propagator", work / "torus_cylinder.json", "--out", work / "g.json"], capsys)
    assert code == EXIT_OK
    snap = json.loads((work / "g.json").read_text())
    assert snap["labels"] == [[], ["SP"], ["p", "q"], ["NP"]]


def test_glue_and_verify_gluing(work, capsys):
    code, out, _ = run(["verify-gluing", work / "double_cylinder.json"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["passed"] is True
    code, _, _ = run(["glue", work / "double_cylinder.json", "--out", work / "glued.json"], capsys)
    assert code == EXIT_OK
    code, _, _ = run(["validate", work / "glued.json"], capsys)
    assert code == EXIT_OK


def test_verify_gluing_negative_control(work, capsys):
    data = json.loads((work / "double_cylinder.json").read_text())
    data["cross"][0]["sign"] *= -1
    (work / "bad.json").write_text(json.dumps(data))
    code, out, _ = run(["verify-gluing", work / "bad.json"], capsys)
    assert code == EXIT_FAIL


def test_validation_failure_exit_code(work, capsys):
    data = json.loads((work / "torus_cylinder.json").read_text())
    data["morse"]["trajectories"][0]["sign"] = -1
    (work / "bad.json").write_text(json.dumps(data))
    code, out, _ = run(["validate", work / "bad.json"], capsys)
    assert code == EXIT_FAIL
    failing = [c["name"] for c in json.loads(out)["checks"] if not c["passed"]]
    assert failing == ["d_squared_zero"]
    code, _, _ = run(["invariant", work / "bad.json"], capsys)
    assert code == EXIT_FAIL


def test_input_errors_exit_two(work, capsys):
    (work / "broken.json").write_text("{ not json")
    code, _, err = run(["validate", work / "broken.json"], capsys)
    assert code == EXIT_INPUT and "line 1" in err
    code, _, err = run(["validate", work / "missing.json"], capsys)
    assert code == EXIT_INPUT
    data = json.loads((work / "torus_cylinder.json").read_text())
    data["holonomy"][1] = [["0"]]
    (work / "singular.json").write_text(json.dumps(data))
    code, _, err = run(["validate", work / "singular.json"], capsys)
    assert code == EXIT_INPUT and "holonomy not invertible: edge 1" in err


def test_example_generator(tmp_path, capsys):
    code, _, _ = run(["example", "torus_cylinder", "--fiber-dim", 2, "--out", tmp_path / "c2.json", "--quiet"], capsys)
    assert code == EXIT_OK
    assert load_scenario(tmp_path / "c2.json") == build_torus_cylinder([[2, 0], [0, 3]], [[5, 0], [0, 7]])
    code, _, _ = run(["example", "double_cylinder", "--out", tmp_path / "d" / "double.json"], capsys)
    assert code == EXIT_OK
    assert sorted(p.name for p in (tmp_path / "d").iterdir()) == [
        "double.json",
        "torus_cylinder.json",
        "torus_cylinder_mirror.json",
    ]
    code, _, _ = run(["example", "three_torus", "--seed", 4, "--out", tmp_path / "t.json"], capsys)
    assert code == EXIT_OK
    assert load_scenario(tmp_path / "t.json").seed == 4


def test_reports_are_reproducible(work, capsys):
    outs = [run(["verify-gluing", work / "double_cylinder.json"], capsys)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_console_script_runs(work):
    exe = shutil.which("morsedefect")
    cmd = [exe] if exe else [sys.executable, "-m", "morsedefect.cli"]
    proc = subprocess.run(
        cmd + ["validate", str(work / "torus_cylinder.json"), "--quiet"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout == "validate: PASS\n"
