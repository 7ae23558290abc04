"""Polynomial homotopy continuation with numpy and numba."""
from hcpy.dethom import (
    DeterminantHomotopy,
    SymmetricPencil,
    monomial_count,
    singular_point_count,
    track_singular_points,
)
from hcpy.endgame import EndgameOptions, run_endgame
from hcpy.homotopies import AffinePatch, Homotopy, PatchedHomotopy, StraightLineHomotopy
from hcpy.poly import Polynomial, PolySystem, parse_polynomial, parse_system, variables
from hcpy.solver import Solution, SolveOptions, SolveResult, solve, solve_with_start
from hcpy.systems import BENCHMARKS, cyclic, get_system, katsura
from hcpy.totaldegree import bezout_number, build_start_system
from hcpy.tracker import PathStatus, TrackerOptions, track, track_many

__version__ = "0.1.0"

__all__ = [
    "AffinePatch", "BENCHMARKS", "DeterminantHomotopy", "EndgameOptions", "Homotopy",
    "PatchedHomotopy", "PathStatus", "PolySystem", "Polynomial", "Solution", "SolveOptions",
    "SolveResult", "StraightLineHomotopy", "SymmetricPencil", "TrackerOptions",
    "bezout_number", "build_start_system", "cyclic", "get_system", "katsura",
    "monomial_count", "parse_polynomial", "parse_system", "run_endgame", "singular_point_count",
    "solve", "solve_with_start", "track", "track_many", "track_singular_points", "variables",
]
