import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycube_games import Box, Polycube, canonical_form, distinct_orientations, is_face_connected, placements_in_box
from polycube_games.voxel import ROTATIONS, SYMMETRIES, Isometry

from conftest import FACE_STEPS, polycubes


def _det(m):
    return round(np.linalg.det(np.array(m)))


def test_group_sizes_and_identity_first():
    assert len(ROTATIONS) == 24 and len(SYMMETRIES) == 48
    eye = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert ROTATIONS[0] == eye and SYMMETRIES[0] == eye
    assert all(_det(r) == 1 for r in ROTATIONS)
    assert sum(_det(r) == -1 for r in SYMMETRIES) == 24
    assert len(set(SYMMETRIES)) == 48


def test_rotation_group_closed_under_composition():
    rs = set(ROTATIONS)
    for a, b in itertools.product(ROTATIONS, repeat=2):
        ab = tuple(tuple(int(v) for v in row) for row in np.array(a) @ np.array(b))
        assert ab in rs


@pytest.mark.parametrize(
    "cells, rot, sym",
    [
        ([(0, 0, 0)], 1, 1),
        ([(0, 0, 0), (1, 0, 0)], 3, 3),
        ([(0, 0, 0), (1, 0, 0), (2, 0, 0)], 3, 3),
        ([(0, 0, 0), (1, 0, 0), (0, 1, 0)], 12, 12),
        # chiral tetracube: a half-turn maps it to itself, its mirror image is new
        ([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)], 12, 24),
        ([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], 8, 8),
    ],
)
def test_orientation_counts(cells, rot, sym):
    p = Polycube(cells)
    assert len(distinct_orientations(p, False)) == rot
    assert len(distinct_orientations(p, True)) == sym


def test_chiral_pair_same_class_only_with_reflections():
    a = Polycube([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)])
    b = Polycube([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, -1)])
    assert canonical_form(a, False) != canonical_form(b, False)
    assert canonical_form(a, True) == canonical_form(b, True)


@settings(max_examples=60, deadline=None)
@given(polycubes(max_cells=6), st.integers(0, 47), st.tuples(*[st.integers(-5, 5)] * 3))
def test_canonical_form_is_isometry_invariant(p, k, t):
    img = p.transformed(Isometry(SYMMETRIES[k], t))
    assert canonical_form(img, True) == canonical_form(p, True)
    if k < 24 or SYMMETRIES[k] in ROTATIONS:
        assert canonical_form(img, False) == canonical_form(p, False)
    assert len(img) == len(p)


def _bfs_connected(cells):
    cells = set(cells)
    start = next(iter(cells))
    seen, todo = {start}, deque([start])
    while todo:
        x, y, z = todo.popleft()
        for dx, dy, dz in FACE_STEPS:
            c = (x + dx, y + dy, z + dz)
            if c in cells and c not in seen:
                seen.add(c)
                todo.append(c)
    return len(seen) == len(cells)


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(*[st.integers(0, 2)] * 3), min_size=1, max_size=8))
def test_face_connectivity_matches_bfs(cells):
    assert is_face_connected(Polycube(sorted(cells))) == _bfs_connected(cells)


def test_edge_touching_cubes_are_not_face_connected():
    assert not is_face_connected(Polycube([(0, 0, 0), (1, 1, 0)]))


def _placements_oracle(p, box, occupied, refl):
    """Every isometry, every translation, literal cell-set test."""
    found = set()
    occ = set(occupied)
    for lin in SYMMETRIES if refl else ROTATIONS:
        img = Polycube(p.cells @ np.array(lin).T)
        lo = img.min_corner
        for t in itertools.product(*(range(-lo[a] - 1, box.dims[a] + 2) for a in range(3))):
            cells = {(x + t[0], y + t[1], z + t[2]) for x, y, z in img}
            if all(box.contains(c) for c in cells) and not cells & occ:
                found.add(frozenset(cells))
    return found


@settings(max_examples=40, deadline=None)
@given(
    polycubes(max_cells=4),
    st.tuples(*[st.integers(1, 3)] * 3),
    st.sets(st.tuples(*[st.integers(0, 2)] * 3), max_size=4),
    st.booleans(),
)
def test_placements_match_bruteforce(p, dims, occupied, refl):
    box = Box(*dims)
    occupied = {c for c in occupied if box.contains(c)}
    got = [pl.resulting_cells for pl in placements_in_box(p, box, occupied, refl)]
    assert len(got) == len(set(got))
    assert set(got) == _placements_oracle(p, box, occupied, refl)


@settings(max_examples=40, deadline=None)
@given(polycubes(max_cells=4), st.booleans())
def test_placement_isometry_reproduces_cells(p, refl):
    box = Box(3, 3, 2)
    for pl in placements_in_box(p, box, (), refl):
        assert p.transformed(pl.isometry).cell_set() == pl.resulting_cells


def test_box_mask_round_trip():
    box = Box(3, 4, 2)
    cells = [(0, 0, 0), (2, 3, 1), (1, 2, 0)]
    m = box.mask_of(cells)
    assert box.cells_of_mask(m) == frozenset(cells)
    assert bin(m).count("1") == 3
    assert box.index((2, 3, 1)) == 2 + 3 * (3 + 4 * 1)
    g = box.grid_of_mask(m)
    assert g.shape == (3, 4, 2) and g.sum() == 3
    assert box.mask_of_grid(g) == m


def test_box_symmetries_map_box_onto_itself():
    box = Box(2, 2, 3)
    full = set(box.all_cells())
    syms = box.symmetries(True)
    # a square prism keeps 16 of the 48 cube symmetries
    assert len(syms) == 16
    for iso in syms:
        assert {iso.apply(c) for c in full} == full


def test_polycube_rejects_empty():
    with pytest.raises(ValueError):
        Polycube([])
