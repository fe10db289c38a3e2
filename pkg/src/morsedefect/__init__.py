"""Exact twisted Morse complexes, chain contractions and the defect 1-cycle."""

from .exactlin import Matrix, hermite_normal_form, lattice_membership, rank, rank_and_solve
from .invariant import (
    CrossTrajectory,
    DInvariant,
    GluedScenario,
    d_equal,
    d_invariant,
    defect_chain,
    double,
    glue,
    verify_gluing,
)
from .localsys import CwModel, Face, HomChain, PathWord, Representation, homology_dims, twisted_complex
from .morse import CriticalPoint, MorseData, Trajectory, morse_complex, validate
from .propagator import Propagator, contraction, glue_propagator, verify_propagator
from .scenario import Boundary, Scenario, build_three_torus, build_torus_cylinder

__version__ = "0.1.0"

__all__ = [
    "Matrix",
    "hermite_normal_form",
    "lattice_membership",
    "rank",
    "rank_and_solve",
    "CwModel",
    "Face",
    "HomChain",
    "PathWord",
    "Representation",
    "homology_dims",
    "twisted_complex",
    "CriticalPoint",
    "MorseData",
    "Trajectory",
    "morse_complex",
    "validate",
    "Propagator",
    "contraction",
    "glue_propagator",
    "verify_propagator",
    "Boundary",
    "Scenario",
    "build_three_torus",
    "build_torus_cylinder",
    "CrossTrajectory",
    "DInvariant",
    "GluedScenario",
    "d_equal",
    "d_invariant",
    "defect_chain",
    "double",
    "glue",
    "verify_gluing",
]
