"""2-Player 3D n-tris.

A fixed sequence of polycubes is dealt one at a time; the mover picks an
orientation and a horizontal offset, and the piece falls straight down the
``z`` axis from above the box until some cell lands on the floor or on an
occupied cell.  Orientation is chosen before the drop (rotations only).  A
player who cannot place the next piece loses; once the sequence runs out the
player who would move next has nothing to place and also loses.

With plane clearing on, each full ``z`` layer is deleted and everything
above it moves down by one, rigidly.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .kayles import Outcome
from .packing import BudgetExceeded
from .voxel import Box, Cell, Polycube, oriented_grids

__all__ = [
    "DropMove",
    "TetrisSolver",
    "TetrisState",
    "drop_moves",
    "drop_moves_bruteforce",
    "new_game",
    "orientations",
    "tetris_apply",
    "tetris_solve",
    "tetris_solve_naive",
]


def orientations(p: Polycube):
    """Distinct rotated images of ``p`` as ``(linear, grid)``; the list index is the orientation id."""
    return oriented_grids(p, False)


@dataclass(frozen=True)
class _Orientation:
    lin: tuple
    extent: Cell
    cols: np.ndarray  # (k, 2) footprint columns
    zlow: np.ndarray  # (k,) lowest cell per footprint column
    ztop: np.ndarray  # (k,) highest cell per footprint column
    filled: np.ndarray  # footprint as (ex, ey) bool
    zlow_grid: np.ndarray  # (ex, ey) int, 0 where unfilled
    ztop_grid: np.ndarray
    template: int


@lru_cache(maxsize=256)
def _drop_tables(p: Polycube, box: Box) -> tuple[_Orientation | None, ...]:
    out = []
    for lin, g in orientations(p):
        ex, ey, ez = g.shape
        if ex > box.nx or ey > box.ny or ez > box.nz:
            out.append(None)
            continue
        filled = g.any(axis=2)
        zlow = np.argmax(g, axis=2)
        ztop = ez - 1 - np.argmax(g[:, :, ::-1], axis=2)
        cols = np.argwhere(filled)
        idx = np.argwhere(g)
        template = box.mask_of_indices(idx[:, 0] + box.nx * (idx[:, 1] + box.ny * idx[:, 2]))
        out.append(
            _Orientation(
                lin, g.shape, cols, zlow[filled], ztop[filled], filled,
                np.where(filled, zlow, 0), np.where(filled, ztop, -1), template,
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class DropMove:
    orientation: int
    dx: int
    dy: int
    rest_z: int
    mask: int = field(repr=False, compare=False)
    box: Box = field(repr=False, compare=False)

    @property
    def xy_offset(self) -> tuple[int, int]:
        return (self.dx, self.dy)

    @cached_property
    def resulting_cells(self) -> frozenset[Cell]:
        return self.box.cells_of_mask(self.mask)

    def script(self) -> str:
        return f"drop {self.orientation} {self.dx} {self.dy}"


def _heights_of(box: Box, occupied: int) -> np.ndarray:
    if occupied == 0:
        return np.zeros((box.nx, box.ny), dtype=np.int64)
    g = box.grid_of_mask(occupied)
    any_ = g.any(axis=2)
    top = box.nz - np.argmax(g[:, :, ::-1], axis=2)
    return np.where(any_, top, 0).astype(np.int64)


@dataclass(frozen=True)
class TetrisState:
    """Box, occupancy bits, the piece sequence and the index of the next piece.

    Player 1 places pieces ``0, 2, 4, ...`` of the sequence, player 2 the rest.
    """

    box: Box
    sequence: tuple[Polycube, ...]
    occupied: int = 0
    index: int = 0
    plane_clearing: bool = False
    heights_hint: np.ndarray | None = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not 0 <= self.index <= len(self.sequence):
            raise ValueError("sequence index out of range")
        if self.occupied & ~self.box.full_mask:
            raise ValueError("occupied cells outside the box")

    @property
    def mover(self) -> int:
        return 1 + self.index % 2

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.sequence)

    @property
    def piece(self) -> Polycube:
        return self.sequence[self.index]

    @cached_property
    def heights(self) -> np.ndarray:
        """``heights[x, y]`` is one above the topmost occupied cell of the column, 0 if empty."""
        if self.heights_hint is not None:
            return self.heights_hint
        return _heights_of(self.box, self.occupied)

    @property
    def occupied_cells(self) -> frozenset[Cell]:
        return self.box.cells_of_mask(self.occupied)

    def key(self):
        occ = self.occupied
        if self.box.volume > 1 << 16:
            # exact, just smaller to hold in a table
            occ = zlib.compress(occ.to_bytes((self.box.volume + 7) // 8, "little"), 1)
        return (self.index, occ)


def _rest_heights(o: _Orientation, H: np.ndarray) -> np.ndarray:
    """Lowest reachable offset for every (dx, dy): max over columns of ``H - zlow``."""
    nx, ny = H.shape
    ex, ey, _ = o.extent
    ox, oy = nx - ex + 1, ny - ey + 1
    if len(o.cols) <= ox * oy:
        R = np.full((ox, oy), np.iinfo(np.int64).min, dtype=np.int64)
        for (u, v), zl in zip(o.cols.tolist(), o.zlow.tolist()):
            np.maximum(R, H[u:u + ox, v:v + oy] - zl, out=R)
    else:
        win = sliding_window_view(H, (ex, ey))
        R = np.where(o.filled, win - o.zlow_grid, np.iinfo(np.int64).min).max(axis=(2, 3))
    return np.maximum(R, 0)


def drop_moves(s: TetrisState) -> list[DropMove]:
    """Every distinct landing of the next piece, ordered by (orientation, dx, dy)."""
    if s.exhausted:
        return []
    box = s.box
    H = s.heights
    seen = set()
    out = []
    for oi, o in enumerate(_drop_tables(s.piece, box)):
        if o is None:
            continue
        R = _rest_heights(o, H)
        ok = R + o.extent[2] <= box.nz
        for dx, dy in np.argwhere(ok).tolist():
            rz = int(R[dx, dy])
            m = o.template << (dx + box.nx * (dy + box.ny * rz))
            if m in seen:
                continue
            seen.add(m)
            out.append(DropMove(oi, dx, dy, rz, m, box))
    return out


def drop_moves_bruteforce(s: TetrisState) -> list[frozenset[Cell]]:
    """Reference enumeration by literal falling (used as a test oracle)."""
    if s.exhausted:
        return []
    occ = s.occupied_cells
    box = s.box
    found = []
    for _, g in orientations(s.piece):
        cells = [tuple(c) for c in np.argwhere(g).tolist()]
        ex, ey, ez = g.shape
        for dx in range(box.nx - ex + 1):
            for dy in range(box.ny - ey + 1):
                z = box.nz  # start just above the box
                while True:
                    nxt = z - 1
                    if nxt < 0:
                        break
                    placed = [(x + dx, y + dy, w + nxt) for x, y, w in cells]
                    if any(c in occ for c in placed if c[2] < box.nz):
                        break
                    z = nxt
                final = frozenset((x + dx, y + dy, w + z) for x, y, w in cells)
                if z + ez <= box.nz and final not in found:
                    found.append(final)
    return found


def _clear_full_layers(box: Box, occ: int, zs) -> tuple[int, int]:
    ls = box.layer_size
    layer = (1 << ls) - 1
    cleared = 0
    for z in sorted(set(zs), reverse=True):
        if (occ >> (z * ls)) & layer == layer:
            low = occ & ((1 << (z * ls)) - 1)
            occ = low | ((occ >> ((z + 1) * ls)) << (z * ls))
            cleared += 1
    return occ, cleared


def _apply_raw(s: TetrisState, m: DropMove) -> tuple[TetrisState, int]:
    box = s.box
    occ = s.occupied | m.mask
    o = _drop_tables(s.piece, box)[m.orientation]
    ex, ey, ez = o.extent
    cleared = 0
    if s.plane_clearing:
        occ, cleared = _clear_full_layers(box, occ, range(m.rest_z, m.rest_z + ez))
    if cleared:
        H = None
    else:
        H = s.heights.copy()
        sub = H[m.dx:m.dx + ex, m.dy:m.dy + ey]
        sub[...] = np.where(o.filled, np.maximum(sub, m.rest_z + o.ztop_grid + 1), sub)
    return TetrisState(box, s.sequence, occ, s.index + 1, s.plane_clearing, H), cleared


def tetris_apply(s: TetrisState, m: DropMove, with_clears: bool = False):
    """Place ``m`` and advance the turn; optionally also return the number of layers cleared."""
    legal = {mv.mask: mv for mv in drop_moves(s)}
    if m.mask not in legal:
        raise ValueError(f"illegal drop {m}")
    nxt, cleared = _apply_raw(s, legal[m.mask])
    return (nxt, cleared) if with_clears else nxt


class TetrisSolver:
    """Memoized negamax keyed by ``(index, occupied)``.

    ``on_expand(state, moves)`` is called once for every freshly expanded
    position; ``clear_events`` counts layer deletions over every simulated move.
    """

    def __init__(self, budget: int | None = None, on_expand: Callable | None = None):
        self.table: dict = {}
        self.nodes = 0
        self.budget = budget
        self.on_expand = on_expand
        self.clear_events = 0

    def wins(self, s: TetrisState) -> bool:
        if s.exhausted:
            return False
        key = s.key()
        hit = self.table.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(f"node budget {self.budget} exhausted")
        moves = drop_moves(s)
        if self.on_expand is not None:
            self.on_expand(s, moves)
        result = False
        for mv in moves:
            child, cleared = _apply_raw(s, mv)
            self.clear_events += cleared
            if not self.wins(child):
                result = True
                break
        self.table[key] = result
        return result

    def solve(self, s: TetrisState) -> tuple[Outcome, DropMove | None]:
        outcome = Outcome.of(self.wins(s))
        moves = drop_moves(s)
        for mv in moves:
            if not self.wins(_apply_raw(s, mv)[0]):
                return outcome, mv
        return outcome, (moves[0] if moves else None)

    def principal_variation(self, s: TetrisState, limit: int = 10_000) -> list[DropMove]:
        pv = []
        while len(pv) < limit:
            _, mv = self.solve(s)
            if mv is None:
                break
            pv.append(mv)
            s = _apply_raw(s, mv)[0]
        return pv


def tetris_solve(s: TetrisState, budget: int | None = None) -> tuple[Outcome, DropMove | None]:
    return TetrisSolver(budget).solve(s)


def tetris_solve_naive(s: TetrisState) -> Outcome:
    """No table; recursion over :func:`drop_moves` and :func:`tetris_apply`."""
    for mv in drop_moves(s):
        if tetris_solve_naive(tetris_apply(s, mv)) is Outcome.MOVER_LOSES:
            return Outcome.MOVER_WINS
    return Outcome.MOVER_LOSES


def new_game(box: Box, sequence: Sequence[Polycube], plane_clearing: bool = False) -> TetrisState:
    return TetrisState(box, tuple(sequence), 0, 0, plane_clearing)
