"""2-Player Polycube Packing.

Players alternately place any remaining polycube anywhere it fits in the box
(translations, rotations and optionally reflections); the first player who
cannot place a piece loses.  Pieces are grouped into kinds by canonical form
so interchangeable copies never multiply the search.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .kayles import Outcome
from .voxel import Box, Placement, Polycube, Isometry, canonical_form, is_face_connected, placement_masks

__all__ = [
    "BudgetExceeded",
    "PackMove",
    "PackSolver",
    "PackState",
    "PieceKind",
    "pack_apply",
    "pack_legal_moves",
    "pack_solve",
    "pack_solve_naive",
]


class BudgetExceeded(RuntimeError):
    """A solver hit its node budget before reaching a result."""


@dataclass(frozen=True)
class PieceKind:
    canonical: Polycube
    owner: int | None = None
    label: str = ""

    @property
    def size(self) -> int:
        return len(self.canonical)


@dataclass(frozen=True)
class PackMove:
    kind: int
    placement: Placement

    @property
    def mask(self) -> int:
        return self.placement.mask


@dataclass(frozen=True)
class PackState:
    """Box, occupancy bit mask, remaining piece counts per kind, mover.

    ``kinds`` is fixed for a whole game; ``counts[k]`` says how many copies of
    kind ``k`` are left.  Owners are set on every kind in partisan mode and on
    none otherwise.
    """

    box: Box
    occupied: int
    kinds: tuple[PieceKind, ...]
    counts: tuple[int, ...]
    mover: int = 1
    allow_reflections: bool = False

    @classmethod
    def new(
        cls,
        box: Box,
        pieces: Sequence[Polycube],
        owners: Sequence[int] | None = None,
        occupied: Iterable | int = (),
        allow_reflections: bool = False,
        labels: Sequence[str] | None = None,
        mover: int = 1,
    ) -> "PackState":
        occ = occupied if isinstance(occupied, int) else box.mask_of(list(occupied))
        if occ & ~box.full_mask:
            raise ValueError("occupied cells outside the box")
        index: dict[tuple, int] = {}
        kinds: list[PieceKind] = []
        counts: list[int] = []
        for i, p in enumerate(pieces):
            if not is_face_connected(p):
                raise ValueError(f"piece {i} is not face-connected")
            owner = owners[i] if owners is not None else None
            if owners is not None and owner not in (1, 2):
                raise ValueError(f"piece {i} needs an owner 1 or 2 in partisan mode")
            canon = canonical_form(p, allow_reflections)
            key = (canon, owner)
            if key not in index:
                index[key] = len(kinds)
                label = labels[i] if labels is not None else str(i)
                kinds.append(PieceKind(canon, owner, label))
                counts.append(0)
            counts[index[key]] += 1
        return cls(box, occ, tuple(kinds), tuple(counts), mover, allow_reflections)

    @property
    def partisan(self) -> bool:
        return bool(self.kinds) and self.kinds[0].owner is not None

    @property
    def occupied_cells(self) -> frozenset:
        return self.box.cells_of_mask(self.occupied)

    @property
    def remaining(self) -> int:
        return sum(self.counts)

    def key(self):
        if self.partisan:
            return (self.occupied, self.counts, self.mover)
        return (self.occupied, self.counts)


def pack_legal_moves(s: PackState) -> list[PackMove]:
    """Every distinct (piece kind, resulting cell set) the mover can play.

    Kinds are visited largest first, which is also the solver's move order.
    """
    moves = []
    order = sorted(range(len(s.kinds)), key=lambda k: (-s.kinds[k].size, k))
    for k in order:
        kind = s.kinds[k]
        if s.counts[k] == 0 or (kind.owner is not None and kind.owner != s.mover):
            continue
        for lin, t, m in placement_masks(kind.canonical, s.box, s.occupied, s.allow_reflections):
            moves.append(PackMove(k, Placement(kind.label, Isometry(lin, t), m, s.box)))
    return moves


def _apply_raw(s: PackState, k: int, mask: int) -> PackState:
    counts = list(s.counts)
    counts[k] -= 1
    return replace(s, occupied=s.occupied | mask, counts=tuple(counts), mover=3 - s.mover)


def pack_apply(s: PackState, m: PackMove) -> PackState:
    kind = s.kinds[m.kind] if 0 <= m.kind < len(s.kinds) else None
    if kind is None or s.counts[m.kind] == 0:
        raise ValueError("no copy of that piece remains")
    if kind.owner is not None and kind.owner != s.mover:
        raise ValueError(f"piece belongs to player {kind.owner}, not the mover")
    if m.mask & s.occupied or m.mask & ~s.box.full_mask:
        raise ValueError("placement overlaps occupied cells or leaves the box")
    placed = Polycube(sorted(m.placement.resulting_cells))
    if canonical_form(placed, s.allow_reflections) != kind.canonical:
        raise ValueError("placement cells are not a copy of the piece")
    return _apply_raw(s, m.kind, m.mask)


class PackSolver:
    """Memoized negamax for packing states.

    The table maps :meth:`PackState.key` to the mover's result.  ``budget``
    caps the number of expanded positions.
    """

    def __init__(self, budget: int | None = None):
        self.table: dict = {}
        self.nodes = 0
        self.budget = budget

    def _moves(self, s: PackState):
        order = sorted(range(len(s.kinds)), key=lambda k: (-s.kinds[k].size, k))
        for k in order:
            kind = s.kinds[k]
            if s.counts[k] == 0 or (kind.owner is not None and kind.owner != s.mover):
                continue
            for _, _, m in placement_masks(kind.canonical, s.box, s.occupied, s.allow_reflections):
                yield k, m

    def wins(self, s: PackState) -> bool:
        key = s.key()
        hit = self.table.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(f"node budget {self.budget} exhausted")
        result = False
        for k, m in self._moves(s):
            if not self.wins(_apply_raw(s, k, m)):
                result = True
                break
        self.table[key] = result
        return result

    def solve(self, s: PackState) -> tuple[Outcome, PackMove | None]:
        """Outcome for the mover and a principal move (a winning one if any)."""
        outcome = Outcome.of(self.wins(s))
        moves = pack_legal_moves(s)
        for mv in moves:
            if not self.wins(pack_apply(s, mv)):
                return outcome, mv
        return outcome, (moves[0] if moves else None)

    def principal_variation(self, s: PackState, limit: int = 10_000) -> list[PackMove]:
        pv = []
        while len(pv) < limit:
            _, mv = self.solve(s)
            if mv is None:
                break
            pv.append(mv)
            s = pack_apply(s, mv)
        return pv


def pack_solve(s: PackState, budget: int | None = None) -> tuple[Outcome, PackMove | None]:
    return PackSolver(budget).solve(s)


def pack_solve_naive(s: PackState) -> Outcome:
    """Unmemoized recursion over :func:`pack_legal_moves` / :func:`pack_apply`."""
    for mv in pack_legal_moves(s):
        if pack_solve_naive(pack_apply(s, mv)) is Outcome.MOVER_LOSES:
            return Outcome.MOVER_WINS
    return Outcome.MOVER_LOSES

