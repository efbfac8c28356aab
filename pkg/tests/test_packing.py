import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycube_games import Box, BudgetExceeded, Outcome, PackSolver, PackState, Polycube, pack_apply, pack_legal_moves
from polycube_games.packing import pack_solve, pack_solve_naive
from polycube_games.voxel import ROTATIONS, SYMMETRIES

from conftest import grow

UNIT = Polycube([(0, 0, 0)])
DOMINO = Polycube([(0, 0, 0), (1, 0, 0)])
ELL = Polycube([(0, 0, 0), (1, 0, 0), (0, 1, 0)])


def oracle_wins(box, pieces, occupied, refl):
    """Literal cell-set game tree; ``pieces`` is a tuple of cell lists."""
    group = SYMMETRIES if refl else ROTATIONS
    full = set(itertools.product(range(box.nx), range(box.ny), range(box.nz)))

    def images(cells):
        out = set()
        for lin in group:
            img = np.array(cells) @ np.array(lin).T
            img -= img.min(axis=0)
            ext = img.max(axis=0)
            for t in itertools.product(*(range(d - e) for d, e in zip(box.dims, ext))):
                out.add(frozenset(map(tuple, (img + t).tolist())))
        return out

    imgs = [images(p) for p in pieces]

    def rec(occ, left):
        for k in sorted(set(left)):
            rest = list(left)
            rest.remove(k)
            for cs in imgs[k]:
                if cs <= full and not cs & occ and not rec(occ | cs, tuple(rest)):
                    return True
        return False

    return rec(frozenset(occupied), tuple(range(len(pieces))))


def random_instance(seed):
    rng = random.Random(seed)
    box = Box(*(rng.randint(1, 3) for _ in range(3)))
    while box.volume > 12:
        box = Box(*(rng.randint(1, 3) for _ in range(3)))
    pieces = [grow(rng, rng.randint(1, 3), 2) for _ in range(rng.randint(1, 3))]
    occ = [c for c in box.all_cells() if rng.random() < 0.15]
    return box, pieces, occ, rng.random() < 0.5


@pytest.mark.parametrize("seed", range(40))
def test_memo_naive_and_oracle_agree(seed):
    box, pieces, occ, refl = random_instance(seed)
    s = PackState.new(box, pieces, occupied=occ, allow_reflections=refl)
    want = Outcome.of(oracle_wins(box, [p.cells.tolist() for p in pieces], occ, refl))
    assert pack_solve_naive(s) is want
    assert pack_solve(s)[0] is want


def test_single_unit_cube_mover_wins():
    s = PackState.new(Box(1, 1, 1), [UNIT])
    out, mv = pack_solve(s)
    assert out is Outcome.MOVER_WINS and mv is not None
    assert not pack_legal_moves(pack_apply(s, mv))


def test_two_dominoes_in_2x2x1_second_player_wins():
    # whichever way the first domino goes, the second fits in the remaining pair
    s = PackState.new(Box(2, 2, 1), [DOMINO, DOMINO])
    assert pack_solve(s)[0] is Outcome.MOVER_LOSES


def test_duplicate_pieces_share_a_kind():
    s = PackState.new(Box(2, 2, 2), [DOMINO, DOMINO.translate((0, 0, 1)), ELL])
    assert len(s.kinds) == 2 and sorted(s.counts) == [1, 2]


def test_reflections_merge_mirror_pieces():
    a = Polycube([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)])
    b = Polycube([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, -1)])
    assert len(PackState.new(Box(3, 3, 3), [a, b]).kinds) == 2
    assert len(PackState.new(Box(3, 3, 3), [a, b], allow_reflections=True).kinds) == 1


def test_partisan_owner_is_enforced():
    s = PackState.new(Box(2, 1, 1), [UNIT, DOMINO], owners=[2, 1])
    moves = pack_legal_moves(s)
    assert {s.kinds[m.kind].owner for m in moves} == {1}
    # P1 fills the box with the domino; P2 owns the unit cube but has no room
    assert pack_solve(s)[0] is Outcome.MOVER_WINS
    wrong = PackState.new(Box(2, 1, 1), [UNIT, DOMINO], owners=[2, 1], mover=2)
    mv = pack_legal_moves(wrong)[0]
    with pytest.raises(ValueError):
        pack_apply(s, mv)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        PackState.new(Box(2, 2, 2), [Polycube([(0, 0, 0), (1, 1, 0)])])
    with pytest.raises(ValueError):
        PackState.new(Box(1, 1, 1), [UNIT], occupied=[(1, 0, 0)])
    s = PackState.new(Box(2, 1, 1), [UNIT], occupied=[(0, 0, 0)])
    mv = pack_legal_moves(PackState.new(Box(2, 1, 1), [UNIT]))[0]
    with pytest.raises(ValueError):
        pack_apply(s, mv)


def test_budget_is_enforced():
    s = PackState.new(Box(3, 3, 1), [UNIT] * 5)
    with pytest.raises(BudgetExceeded):
        PackSolver(budget=3).wins(s)


def _move_cells(s):
    return {frozenset(m.placement.resulting_cells) for m in pack_legal_moves(s)}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_move_list_is_symmetry_equivariant(seed):
    rng = random.Random(seed)
    box = Box(*(rng.randint(1, 3) for _ in range(3)))
    piece = grow(rng, rng.randint(1, 4), 2)
    occ = {c for c in box.all_cells() if rng.random() < 0.25}
    refl = rng.random() < 0.5
    base = _move_cells(PackState.new(box, [piece], occupied=occ, allow_reflections=refl))
    for iso in box.symmetries(refl):
        img_occ = {iso.apply(c) for c in occ}
        img_moves = _move_cells(PackState.new(box, [piece], occupied=img_occ, allow_reflections=refl))
        assert img_moves == {frozenset(iso.apply(c) for c in cs) for cs in base}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_apply_conserves_cells(seed):
    rng = random.Random(seed)
    box = Box(3, 3, 2)
    s = PackState.new(box, [grow(rng, rng.randint(1, 4), 2) for _ in range(4)])
    total = box.volume
    while True:
        moves = pack_legal_moves(s)
        if not moves:
            break
        mv = rng.choice(moves)
        t = pack_apply(s, mv)
        placed = bin(t.occupied).count("1") - bin(s.occupied).count("1")
        assert placed == s.kinds[mv.kind].size == len(mv.placement)
        assert t.remaining == s.remaining - 1 and t.mover == 3 - s.mover
        assert bin(t.occupied).count("1") + bin(~t.occupied & box.full_mask).count("1") == total
        s = t


def test_principal_variation_ends_with_loser_stuck():
    s = PackState.new(Box(3, 2, 1), [DOMINO, UNIT, UNIT, UNIT])
    solver = PackSolver()
    outcome = Outcome.of(solver.wins(s))
    pv = solver.principal_variation(s)
    for mv in pv:
        s = pack_apply(s, mv)
    assert not pack_legal_moves(s)
    assert (len(pv) % 2 == 1) == (outcome is Outcome.MOVER_WINS)
