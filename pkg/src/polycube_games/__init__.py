"""Exact engines, solvers and hardness-reduction compilers for Node Kayles,
2-player polycube packing and 2-player 3D n-tris."""

from .kayles import Graph, KaylesPosition, KaylesSolver, Outcome, apply_move, legal_moves, solve, solve_naive
from .ntris import DropMove, TetrisSolver, TetrisState, drop_moves, new_game, tetris_apply, tetris_solve
from .packing import BudgetExceeded, PackMove, PackSolver, PackState, pack_apply, pack_legal_moves, pack_solve
from .report import CheckResult, Report
from .voxel import (
    Box,
    Isometry,
    Placement,
    Polycube,
    canonical_form,
    distinct_orientations,
    is_face_connected,
    placements_in_box,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BudgetExceeded",
    "CheckResult",
    "DropMove",
    "Graph",
    "Isometry",
    "KaylesPosition",
    "KaylesSolver",
    "Outcome",
    "PackMove",
    "PackSolver",
    "PackState",
    "Placement",
    "Polycube",
    "Report",
    "TetrisSolver",
    "TetrisState",
    "apply_move",
    "canonical_form",
    "distinct_orientations",
    "drop_moves",
    "is_face_connected",
    "legal_moves",
    "new_game",
    "pack_apply",
    "pack_legal_moves",
    "pack_solve",
    "placements_in_box",
    "solve",
    "solve_naive",
    "tetris_apply",
    "tetris_solve",
]
