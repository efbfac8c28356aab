"""Lattice geometry for polycubes.

A cell ``(x, y, z)`` is the unit cube ``[x, x+1] x [y, y+1] x [z, z+1]``.
Polycubes keep their cells as a sorted ``(k, 3)`` integer array so very large
pieces (molds with a million cells) stay cheap; orientation work is done on a
dense boolean grid of the bounding box.

Occupancy inside a :class:`Box` is a Python ``int`` used as a bitset, with
cell ``(x, y, z)`` at bit ``x + nx * (y + ny * z)`` so every z-layer is a
contiguous run of bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import ndimage

Cell = tuple[int, int, int]

__all__ = [
    "Box",
    "Cell",
    "Isometry",
    "Placement",
    "Polycube",
    "ROTATIONS",
    "SYMMETRIES",
    "canonical_form",
    "distinct_orientations",
    "group",
    "is_face_connected",
    "oriented_grids",
    "placements_in_box",
]


def _signed_permutations(det: int) -> list[tuple[tuple[int, ...], ...]]:
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=np.int64)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            if round(np.linalg.det(m)) == det:
                mats.append(tuple(tuple(int(v) for v in r) for r in m))
    return mats


#: The 24 orientation-preserving axis-aligned rotations; identity first.
ROTATIONS: tuple[tuple[tuple[int, ...], ...], ...] = tuple(_signed_permutations(1))
#: All 48 signed permutation matrices (rotations, then improper ones).
SYMMETRIES = ROTATIONS + tuple(_signed_permutations(-1))


def group(allow_reflections: bool):
    return SYMMETRIES if allow_reflections else ROTATIONS


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


@dataclass(frozen=True)
class Isometry:
    """``p -> linear @ p + translation`` with ``linear`` a signed permutation."""

    linear: tuple[tuple[int, ...], ...] = ROTATIONS[0]
    translation: Cell = (0, 0, 0)

    @property
    def reflect(self) -> bool:
        return self.linear not in ROTATIONS

    def compose(self, other: "Isometry") -> "Isometry":
        """Return ``self o other`` (apply ``other`` first)."""
        lin = _matmul(self.linear, other.linear)
        t = tuple(
            sum(self.linear[i][k] * other.translation[k] for k in range(3))
            + self.translation[i]
            for i in range(3)
        )
        return Isometry(lin, t)

    def apply_array(self, cells: np.ndarray) -> np.ndarray:
        m = np.array(self.linear, dtype=np.int64)
        return cells @ m.T + np.array(self.translation, dtype=np.int64)

    def apply(self, cell: Cell) -> Cell:
        return tuple(
            sum(self.linear[i][k] * cell[k] for k in range(3)) + self.translation[i]
            for i in range(3)
        )


class Polycube:
    """Finite nonempty set of lattice cells.

    Cells are stored sorted by ``(x, y, z)`` with duplicates removed, so two
    polycubes are equal exactly when their cell sets are equal.
    """

    def __init__(self, cells: Iterable[Sequence[int]] | np.ndarray):
        arr = np.asarray(
            list(cells) if not isinstance(cells, np.ndarray) else cells,
            dtype=np.int64,
        ).reshape(-1, 3)
        if len(arr) == 0:
            raise ValueError("a polycube needs at least one cell")
        arr = np.unique(arr, axis=0)
        arr.setflags(write=False)
        self.cells = arr
        self._hash = None
        self._grid = None

    @classmethod
    def from_grid(cls, grid: np.ndarray, origin: Sequence[int] = (0, 0, 0)) -> "Polycube":
        """Build from a dense boolean grid indexed ``[x, y, z]``."""
        idx = np.argwhere(grid)
        if len(idx) == 0:
            raise ValueError("a polycube needs at least one cell")
        obj = cls.__new__(cls)
        # argwhere on a C-ordered [x, y, z] grid is already lexicographic and unique
        arr = (idx + np.asarray(origin, dtype=np.int64)).astype(np.int64)
        arr.setflags(write=False)
        obj.cells = arr
        obj._hash = None
        lo, hi = idx.min(0), idx.max(0)
        g = np.asarray(grid, dtype=bool)[tuple(slice(a, b + 1) for a, b in zip(lo, hi))]
        g = np.ascontiguousarray(g)
        g.setflags(write=False)
        obj._grid = g
        return obj

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        for row in self.cells.tolist():
            yield tuple(row)

    def __contains__(self, cell) -> bool:
        lo = self.min_corner
        hi = self.max_corner
        c = tuple(cell)
        if any(not (lo[i] <= c[i] <= hi[i]) for i in range(3)):
            return False
        return bool(self.grid[c[0] - lo[0], c[1] - lo[1], c[2] - lo[2]])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polycube):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.cells.shape, self.cells.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        if len(self) <= 6:
            return f"Polycube({list(self)})"
        return f"Polycube(<{len(self)} cells, extent {self.extent}>)"

    @cached_property
    def min_corner(self) -> Cell:
        return tuple(int(v) for v in self.cells.min(axis=0))

    @cached_property
    def max_corner(self) -> Cell:
        return tuple(int(v) for v in self.cells.max(axis=0))

    @property
    def extent(self) -> Cell:
        return tuple(b - a + 1 for a, b in zip(self.min_corner, self.max_corner))

    @property
    def grid(self) -> np.ndarray:
        """Dense boolean grid of the bounding box, indexed ``[x, y, z]``."""
        if self._grid is None:
            g = np.zeros(self.extent, dtype=bool)
            rel = self.cells - np.asarray(self.min_corner)
            g[rel[:, 0], rel[:, 1], rel[:, 2]] = True
            g.setflags(write=False)
            self._grid = g
        return self._grid

    def cell_set(self) -> frozenset[Cell]:
        return frozenset(self)

    def translate(self, d: Sequence[int]) -> "Polycube":
        obj = Polycube.__new__(Polycube)
        arr = self.cells + np.asarray(d, dtype=np.int64)
        arr.setflags(write=False)
        obj.cells = arr
        obj._hash = None
        obj._grid = self._grid
        return obj

    def normalized(self) -> "Polycube":
        if self.min_corner == (0, 0, 0):
            return self
        return self.translate(tuple(-v for v in self.min_corner))

    def transformed(self, iso: Isometry) -> "Polycube":
        return Polycube(iso.apply_array(self.cells))

    def union(self, *others: "Polycube") -> "Polycube":
        return Polycube(np.concatenate([self.cells] + [o.cells for o in others]))

    def difference(self, other: "Polycube | Iterable[Cell]") -> "Polycube":
        drop = other.cell_set() if isinstance(other, Polycube) else set(map(tuple, other))
        return Polycube([c for c in self if c not in drop])


@dataclass(frozen=True)
class Box:
    """Axis-aligned box of cells ``0 <= x < nx`` (and so on)."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError(f"box extents must be positive, got {self.dims}")

    @property
    def dims(self) -> Cell:
        return (self.nx, self.ny, self.nz)

    @property
    def volume(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def layer_size(self) -> int:
        return self.nx * self.ny

    @property
    def full_mask(self) -> int:
        return (1 << self.volume) - 1

    def contains(self, cell: Sequence[int]) -> bool:
        x, y, z = cell
        return 0 <= x < self.nx and 0 <= y < self.ny and 0 <= z < self.nz

    def index(self, cell: Sequence[int]) -> int:
        x, y, z = cell
        return x + self.nx * (y + self.ny * z)

    def mask_of(self, cells: Iterable[Sequence[int]] | Polycube | np.ndarray) -> int:
        """Bit mask of ``cells``; every cell must lie inside the box."""
        if isinstance(cells, Polycube):
            arr = cells.cells
        else:
            arr = np.asarray(list(cells) if not isinstance(cells, np.ndarray) else cells,
                             dtype=np.int64).reshape(-1, 3)
        if len(arr) == 0:
            return 0
        if (arr.min(axis=0) < 0).any() or (arr.max(axis=0) >= np.array(self.dims)).any():
            raise ValueError("cells outside the box")
        idx = arr[:, 0] + self.nx * (arr[:, 1] + self.ny * arr[:, 2])
        return self.mask_of_indices(idx)

    def mask_of_indices(self, idx: np.ndarray) -> int:
        if len(idx) < 64:
            m = 0
            for i in np.asarray(idx).tolist():
                m |= 1 << i
            return m
        flat = np.zeros(self.volume, dtype=bool)
        flat[idx] = True
        return int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little")

    def mask_of_grid(self, grid: np.ndarray) -> int:
        """Mask of a full-box boolean grid indexed ``[x, y, z]``."""
        flat = np.ascontiguousarray(np.transpose(grid, (2, 1, 0))).ravel()
        return int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little")

    def grid_of_mask(self, mask: int) -> np.ndarray:
        nbytes = (self.volume + 7) // 8
        raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
        flat = np.unpackbits(raw, bitorder="little")[: self.volume].astype(bool)
        return flat.reshape(self.nz, self.ny, self.nx).transpose(2, 1, 0)

    def cells_of_mask(self, mask: int) -> frozenset[Cell]:
        if mask.bit_length() <= 4096:
            out = []
            m = mask
            while m:
                low = m & -m
                i = low.bit_length() - 1
                x, rest = i % self.nx, i // self.nx
                out.append((x, rest % self.ny, rest // self.ny))
                m ^= low
            return frozenset(out)
        return frozenset(map(tuple, np.argwhere(self.grid_of_mask(mask)).tolist()))

    def all_cells(self) -> Iterator[Cell]:
        return itertools.product(range(self.nx), range(self.ny), range(self.nz))

    def symmetries(self, allow_reflections: bool = True) -> list[Isometry]:
        """Isometries mapping the box onto itself."""
        out = []
        dims = np.array(self.dims)
        for lin in group(allow_reflections):
            m = np.array(lin)
            if not np.array_equal(np.abs(m) @ dims, dims):
                continue
            # image of [0, d-1] under a negative axis needs shifting back by d-1
            t = tuple(int(v) for v in np.where(m.sum(axis=1) < 0, np.abs(m) @ dims - 1, 0))
            out.append(Isometry(lin, t))
        return out


def _orient_grid(grid: np.ndarray, lin) -> np.ndarray:
    perm = [next(c for c in range(3) if lin[r][c]) for r in range(3)]
    signs = [lin[r][perm[r]] for r in range(3)]
    g = np.transpose(grid, perm)
    flips = tuple(r for r in range(3) if signs[r] < 0)
    if flips:
        g = np.flip(g, axis=flips)
    return np.ascontiguousarray(g)


def oriented_grids(p: Polycube, allow_reflections: bool = False):
    """Distinct orientations of ``p`` as ``(linear, dense grid)`` pairs.

    Each distinct image is reported once, with the first group element that
    produces it; the order is fixed by :data:`ROTATIONS` / :data:`SYMMETRIES`.
    """
    return _oriented_grids_cached(p, allow_reflections)


@lru_cache(maxsize=512)
def _oriented_grids_cached(p: Polycube, allow_reflections: bool):
    seen: dict[tuple, int] = {}
    out = []
    for lin in group(allow_reflections):
        g = _orient_grid(p.grid, lin)
        key = (g.shape, g.tobytes())
        if key in seen:
            continue
        seen[key] = len(out)
        g.setflags(write=False)
        out.append((lin, g))
    return tuple(out)


def distinct_orientations(p: Polycube, allow_reflections: bool = False) -> list[Polycube]:
    """All translation-normalized images of ``p`` under the group, deduplicated."""
    return [Polycube.from_grid(g) for _, g in oriented_grids(p, allow_reflections)]


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    fa, fb = a.ravel(), b.ravel()
    diff = np.flatnonzero(fa != fb)
    if len(diff) == 0:
        return False
    i = diff[0]
    return bool(fa[i] < fb[i])


def canonical_form(p: Polycube, allow_reflections: bool = False) -> Polycube:
    """Lexicographically least normalized image of ``p`` over the group."""
    if not isinstance(p, Polycube):
        p = Polycube(p)
    best = None
    for img in distinct_orientations(p, allow_reflections):
        if best is None or _lex_less(img.cells, best.cells):
            best = img
    return best


def is_face_connected(p: Polycube) -> bool:
    _, count = ndimage.label(p.grid, structure=ndimage.generate_binary_structure(3, 1))
    return count == 1


@dataclass(frozen=True)
class Placement:
    piece_id: object
    isometry: Isometry
    mask: int = field(repr=False)
    box: Box = field(repr=False)

    @cached_property
    def resulting_cells(self) -> frozenset[Cell]:
        return self.box.cells_of_mask(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()


@lru_cache(maxsize=1024)
def _orientation_templates(p: Polycube, box: Box, allow_reflections: bool):
    """Per orientation: (linear, shift to normalize, extent, template mask at origin)."""
    out = []
    for lin, g in oriented_grids(p, allow_reflections):
        ex = g.shape
        if ex[0] > box.nx or ex[1] > box.ny or ex[2] > box.nz:
            continue
        idx = np.argwhere(g)
        template = box.mask_of_indices(idx[:, 0] + box.nx * (idx[:, 1] + box.ny * idx[:, 2]))
        # image of p under lin has min corner lin @ cells min; shift it to the origin
        imin = (p.cells @ np.array(lin).T).min(axis=0)
        out.append((lin, tuple(int(-v) for v in imin), ex, template))
    return tuple(out)


def placement_masks(p: Polycube, box: Box, occupied: int, allow_reflections: bool = False):
    """Yield ``(linear, translation, mask)`` for every legal placement, deduplicated."""
    seen = set()
    for lin, norm, ex, template in _orientation_templates(p, box, allow_reflections):
        for tz in range(box.nz - ex[2] + 1):
            for ty in range(box.ny - ex[1] + 1):
                base = box.nx * (ty + box.ny * tz)
                for tx in range(box.nx - ex[0] + 1):
                    m = template << (base + tx)
                    if m & occupied or m in seen:
                        continue
                    seen.add(m)
                    yield lin, (norm[0] + tx, norm[1] + ty, norm[2] + tz), m


def placements_in_box(
    p: Polycube,
    box: Box,
    occupied: Iterable[Cell] | int = (),
    allow_reflections: bool = False,
    piece_id: object = None,
) -> list[Placement]:
    """Every placement of ``p`` inside ``box`` disjoint from ``occupied``.

    ``occupied`` may be a set of cells or a box bit mask.  Placements with the
    same resulting cell set are reported once.
    """
    occ = occupied if isinstance(occupied, int) else box.mask_of(list(occupied))
    return [
        Placement(piece_id, Isometry(lin, t), m, box)
        for lin, t, m in placement_masks(p, box, occ, allow_reflections)
    ]
