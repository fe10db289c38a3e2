"""Command-line entry point: ``morsedefect <command> ...``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from typing import Optional, Sequence

from .exactlin import Matrix
from .invariant import GluingError, d_equal, d_invariant, double, glue, verify_gluing
from .localsys import ComplexError, HomChain, ModelError, adjoint_system, homology_dims, twisted_complex
from .morse import morse_complex, mirror
from .propagator import contraction, random_propagator, verify_propagator
from .report import Report, jsonable
from .scenario import Scenario, ScenarioError, build_three_torus, build_torus_cylinder
from .serialize import (
    InputError,
    chain_to_dict,
    dumps,
    load_chain,
    load_glued,
    load_scenario,
    save_chain,
    save_glued,
    save_scenario,
    write_atomic,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
EXAMPLES = ("torus_cylinder", "torus_cylinder_mirror", "three_torus", "double_cylinder")
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _emit(report: Report, args, extra: Optional[dict] = None) -> int:
    body = report.to_dict()
    if extra:
        body.update(jsonable(extra))
    if args.quiet:
        print(f"{report.title}: {'PASS' if report.passed else 'FAIL'}")
    else:
        sys.stdout.write(dumps(body))
    return EXIT_OK if report.passed else EXIT_FAIL


def _diag(values: Sequence[int]) -> Matrix:
    n = len(values)
    return Matrix.from_rows([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], n)


def _holonomies(count: int, n: int, seed: Optional[int]) -> list[Matrix]:
    """Commuting diagonal holonomies with no eigenvalue equal to 1."""
    if seed is None:
        if count * n > len(_PRIMES):
            raise InputError("fiber dimension too large for the default holonomies; pass --seed")
        vals = list(_PRIMES[: count * n])
    else:
        rng = random.Random(seed)
        vals = [rng.choice((-3, -2, -1, 2, 3, 4, 5)) for _ in range(count * n)]
    return [_diag(vals[k * n : (k + 1) * n]) for k in range(count)]


def build_example(name: str, fiber_dim: int = 1, seed: Optional[int] = None) -> Scenario:
    if fiber_dim < 1:
        raise InputError("--fiber-dim must be positive")
    if name in ("torus_cylinder", "torus_cylinder_mirror", "double_cylinder"):
        a, b = _holonomies(2, fiber_dim, seed)
        sc = build_torus_cylinder(a, b)
        if name == "torus_cylinder_mirror":
            sc = Scenario(sc.model, sc.rep, mirror(sc.model, sc.morse), sc.boundary, name)
    elif name == "three_torus":
        sc = build_three_torus(*_holonomies(3, fiber_dim, seed))
    else:
        raise InputError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")
    return Scenario(sc.model, sc.rep, sc.morse, sc.boundary, sc.name, seed)


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    return _emit(sc.validate(), args)


def cmd_homology(args) -> int:
    sc = load_scenario(args.scenario)
    extra = {
        "cellular": {
            "V": homology_dims(twisted_complex(sc.model, sc.rep)),
            "Hom": homology_dims(twisted_complex(sc.model, adjoint_system(sc.rep))),
        }
    }
    return _emit(sc.homology_report(), args, extra)


def _propagator_for(sc: Scenario, seed: Optional[int]):
    mc = morse_complex(sc.model, sc.rep, sc.morse)
    G = contraction(mc.complex) if seed is None else random_propagator(mc.complex, seed)
    return mc, G


def cmd_propagator(args) -> int:
    sc = load_scenario(args.scenario)
    mc, G = _propagator_for(sc, args.seed)
    report = verify_propagator(mc.complex, G)
    snapshot = {"labels": [list(l) for l in mc.labels], "fiber_dim": mc.fiber_dim, "maps": G.to_json()}
    if args.out:
        write_atomic(args.out, dumps(snapshot))
    return _emit(report, args, {"propagator": snapshot})


def cmd_invariant(args) -> int:
    sc = load_scenario(args.scenario)
    check = sc.validate()
    if not check.passed:
        return _emit(check, args)
    G = None if args.seed is None else _propagator_for(sc, args.seed)[1]
    inv = d_invariant(sc.model, sc.rep, sc.morse, G)
    report = Report("invariant")
    report.add("cycle", True)
    if args.out:
        save_chain(inv.chain, args.out, args.scenario)
    return _emit(report, args, {"chain": chain_to_dict(inv.chain, args.scenario), "c_f": list(inv.c_f)})


def cmd_compare(args) -> int:
    given = load_scenario(args.scenario) if args.scenario else None
    z1, sc = load_chain(args.first, given)
    if args.second:
        z2, sc2 = load_chain(args.second, given or sc)
        if sc2.model != sc.model or sc2.rep != sc.rep:
            raise InputError("the two chains refer to different scenarios")
    else:
        z2 = HomChain.zero(sc.model, sc.rep.fiber_dim)
    try:
        same, cert = d_equal(sc.model, sc.rep, z1, z2)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = Report("compare")
    report.add("same_class", same, certificate=cert)
    return _emit(report, args)


def cmd_glue(args) -> int:
    gs = load_glued(args.glued)
    glued = glue(gs)
    report = glued.scenario.validate()
    report.title = "glue"
    if args.out:
        save_scenario(glued.scenario, args.out)
    return _emit(report, args, {"cells": glued.scenario.model.cell_counts()})


def cmd_verify_gluing(args) -> int:
    return _emit(verify_gluing(load_glued(args.glued)), args)


def cmd_example(args) -> int:
    if args.name == "double_cylinder":
        sc = build_example("torus_cylinder", args.fiber_dim, args.seed)
        gs = double(sc)
        out = args.out or "double_cylinder.json"
        stem = os.path.join(os.path.dirname(out), "torus_cylinder")
        save_glued(gs, out, stem + ".json", stem + "_mirror.json")
    else:
        sc = build_example(args.name, args.fiber_dim, args.seed)
        out = args.out or f"{args.name}.json"
        save_scenario(sc, out)
    report = Report("example")
    report.add("written", True, path=out)
    return _emit(report, args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="print only the verdict line")
    common.add_argument("--out", help="write the command's artifact to this path")
    common.add_argument("--seed", type=int, default=None, help="seed for random propagators or example holonomies")

    parser = argparse.ArgumentParser(prog="morsedefect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a scenario file").add_argument("scenario")
    add("homology", cmd_homology, "twisted Betti numbers, Morse against cellular").add_argument("scenario")
    add("propagator", cmd_propagator, "build and verify a chain contraction").add_argument("scenario")
    add("invariant", cmd_invariant, "compute the defect cycle representative").add_argument("scenario")
    p = add("compare", cmd_compare, "decide whether two chains define the same class")
    p.add_argument("first")
    p.add_argument("second", nargs="?", help="defaults to the zero chain")
    p.add_argument("--scenario", help="scenario file, overriding the chains' own references")
    add("glue", cmd_glue, "glue two scenarios and validate the result").add_argument("glued")
    add("verify-gluing", cmd_verify_gluing, "check propagator gluing and additivity").add_argument("glued")
    p = add("example", cmd_example, "write a shipped example scenario")
    p.add_argument("name", choices=EXAMPLES)
    p.add_argument("--fiber-dim", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, ScenarioError, GluingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComplexError as exc:
        report = Report(args.command)
        report.add("complex", False, reason=str(exc))
        return _emit(report, args)


if __name__ == "__main__":
    sys.exit(main())
