import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycube_games import Graph, KaylesPosition, KaylesSolver, Outcome, apply_move, legal_moves, solve, solve_naive

from conftest import k2, p3, p4


def oracle_wins(n, edges, partition=None):
    """First player wins?  Independent set-based recursion, first principles."""
    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)

    def rec(avail, mover):
        for v in avail:
            if partition is not None and partition[v] != mover:
                continue
            if not rec(avail - {v} - adj[v], 3 - mover):
                return True
        return False

    return rec(frozenset(adj), 1)


def bipartition(n, edges):
    side = {}
    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    for s in range(1, n + 1):
        if s in side:
            continue
        side[s] = 1
        todo = [s]
        while todo:
            u = todo.pop()
            for w in adj[u]:
                if w not in side:
                    side[w] = 3 - side[u]
                    todo.append(w)
                elif side[w] == side[u]:
                    return None
    return side


def catalog(seed=7, samples=150):
    for n in range(1, 6):
        pairs = list(itertools.combinations(range(1, n + 1), 2))
        for bits in range(1 << len(pairs)):
            yield n, [e for k, e in enumerate(pairs) if bits >> k & 1]
    rng = random.Random(seed)
    pairs = list(itertools.combinations(range(1, 7), 2))
    for _ in range(samples):
        yield 6, [e for e in pairs if rng.random() < 0.4]


def test_catalog_memo_naive_and_oracle_agree():
    count = 0
    for n, edges in catalog():
        g = Graph.from_edges(n, edges)
        pos = KaylesPosition.initial(g)
        want = Outcome.of(oracle_wins(n, edges))
        assert KaylesSolver(g).solve(pos) is want
        assert solve_naive(pos) is want
        part = bipartition(n, edges)
        if part is not None:
            ppos = KaylesPosition.initial(g, part)
            pwant = Outcome.of(oracle_wins(n, edges, part))
            assert KaylesSolver(g, part).solve(ppos) is pwant
            assert solve_naive(ppos) is pwant
        count += 1
    assert count == 1 + 2 + 8 + 64 + 1024 + 150


@pytest.mark.parametrize(
    "g, first_wins",
    [(k2(), True), (Graph.from_edges(2, []), False), (p3(), True), (p4(), False), (Graph.from_edges(1, []), True)],
)
def test_small_outcomes(g, first_wins):
    assert solve(KaylesPosition.initial(g)) is Outcome.of(first_wins)
    assert first_wins == oracle_wins(g.n, g.edges)


def test_marking_removes_neighbors():
    pos = KaylesPosition.initial(p4())
    after = apply_move(pos, 2)
    assert after.available == frozenset({4}) and after.mover == 2
    with pytest.raises(ValueError):
        apply_move(after, 1)


def test_partisan_moves_restricted_to_own_side():
    g = p4()
    pos = KaylesPosition.initial(g, {1: 1, 2: 2, 3: 1, 4: 2})
    assert legal_moves(pos) == frozenset({1, 3})
    with pytest.raises(ValueError):
        KaylesPosition.initial(g, {1: 1, 2: 1, 3: 2, 4: 2})


@pytest.mark.parametrize("n", [1, 3, 5])
def test_partisan_one_side_empty(n):
    # every vertex on side 1: P1 wins iff it has a move, P2 never has one
    g = Graph.from_edges(n, [])
    pos = KaylesPosition.initial(g, {v: 1 for v in g.vertices})
    assert solve(pos) is Outcome.MOVER_WINS
    pos2 = KaylesPosition(g, pos.available, pos.partition, 2)
    assert solve(pos2) is Outcome.MOVER_LOSES


def test_multigraph_keeps_repeats_adjacency_ignores_them():
    g = Graph.from_edges(3, [(1, 2), (1, 2), (2, 3)], multigraph=True)
    with pytest.warns(UserWarning, match="duplicate edge 1-2"):
        h = Graph.from_edges(3, [(1, 2), (1, 2), (2, 3)])
    assert g.m == 3 and h.m == 2
    assert g.neighbors(2) == h.neighbors(2) == frozenset({1, 3})
    assert g.incident_edges(1) == [1, 2]


def test_principal_variation_is_a_legal_game():
    g = Graph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5)])
    pos = KaylesPosition.initial(g)
    pv = KaylesSolver(g).principal_variation(pos)
    for v in pv:
        pos = apply_move(pos, v)
    assert not legal_moves(pos)
    # winner is whoever made the last mark
    assert (len(pv) % 2 == 1) == (solve(KaylesPosition.initial(g)) is Outcome.MOVER_WINS)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**20), st.integers(0, 2**20))
def test_solve_satisfies_negamax_recurrence(n, eseed, mseed):
    rng = random.Random(eseed)
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.random() < 0.35]
    g = Graph.from_edges(n, edges)
    solver = KaylesSolver(g)
    pos = KaylesPosition.initial(g)
    # walk a random line, re-expanding each position once
    walk = random.Random(mseed)
    while True:
        moves = sorted(legal_moves(pos))
        expect = any(solver.solve(apply_move(pos, v)) is Outcome.MOVER_LOSES for v in moves)
        assert solver.solve(pos) is Outcome.of(expect)
        if not moves:
            break
        pos = apply_move(pos, walk.choice(moves))
