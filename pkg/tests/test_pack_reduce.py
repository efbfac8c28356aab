import hashlib
from pathlib import Path

import pytest

from polycube_games import Graph, is_face_connected
from polycube_games.formats import render_layers
from polycube_games.pack_reduce import (
    build_blockers,
    build_cavity,
    build_mold,
    build_vertex_piece,
    build_wiring_diagram,
    compile_packing,
    corrupt_mold,
    default_bipartition,
    verify_pack_reduction,
)

from conftest import H_EDGES, SUITE, graph_h, k2, k3, p3, p4

GOLDEN = Path(__file__).parent / "golden"


def test_wiring_diagram_of_h():
    w = build_wiring_diagram(graph_h(multigraph=True))
    assert w.n == 7 and w.m == 8
    for i in range(1, 8):
        assert w.vertex_lines[i] == ((4 * i, 0), (4 * i, 16))
    for j, (a, b) in enumerate(H_EDGES, start=1):
        assert w.edge_segments[j] == ((4 * a, 2 * j), (4 * b, 2 * j))


def _column_crossings(g):
    """Foreign columns passed by edge rows plus by every support beam."""
    edge = sum(b - a - 1 for a, b in g.edges)
    beams = g.n * (g.n - 1)
    return edge + beams


@pytest.mark.parametrize("multi", [False, True])
def test_crossover_count_for_h(multi):
    g = graph_h(multigraph=multi) if multi else Graph.from_edges(7, dict.fromkeys(H_EDGES))
    art = compile_packing(g)
    assert art.bridges == _column_crossings(g)
    # each bridge lifts three cells into z = 1; rows sit on distinct y, so no sharing
    lifted = sum(1 for c in art.cavity if c[2] == 1)
    assert lifted == 3 * art.bridges
    assert not any(c[2] == 2 for c in art.cavity)


def test_h_box_size():
    g = graph_h(multigraph=True)
    art = compile_packing(g)
    assert art.box.dims == (4 * 7 - 1, 2 * 8 + 4 * 7, 3)


def _golden_text():
    g = graph_h(multigraph=True)
    art = compile_packing(g)
    items = [(f"v{i}", art.vertex_pieces[i]) for i in g.vertices]
    return render_layers(art.box, items)


def test_h_cavity_matches_golden_file():
    got = _golden_text()
    want = (GOLDEN / "h_cavity_layers.txt").read_text()
    assert got == want


def test_h_golden_digest_of_mold():
    g = graph_h(multigraph=True)
    mold, box = build_mold(g)
    digest = hashlib.sha256(mold.cells.tobytes()).hexdigest()[:16]
    assert digest == (GOLDEN / "h_mold.sha256").read_text().strip()
    assert len(mold) + len(build_cavity(g)[0]) == box.volume


@pytest.mark.parametrize("name", sorted(SUITE))
def test_pieces_connected_and_spanning(name):
    g = SUITE[name]()
    art = compile_packing(g, variant="empty")
    dims = art.box.dims
    for lab, p, _ in art.piece_list():
        assert is_face_connected(p), lab
        spans = [p.extent[a] == dims[a] for a in range(3)]
        assert any(spans), lab
        if lab == "mold":
            assert all(spans)


@pytest.mark.parametrize("name", sorted(SUITE))
def test_forced_placements_overlap_exactly_on_edges(name):
    g = SUITE[name]()
    art = compile_packing(g)
    for u in g.vertices:
        for v in g.vertices:
            if u < v:
                share = art.forced_placements[u] & art.forced_placements[v]
                assert bool(share) == g.adjacent(u, v)
    union = set().union(*art.forced_placements.values())
    assert union == art.cavity.cell_set()


@pytest.mark.parametrize("name", ["K2", "P3", "K3"])
def test_blocker_covers_box_with_piece_and_bridge_shadows(name):
    g = SUITE[name]()
    box = compile_packing(g).box
    for i in g.vertices:
        qm, qp = build_blockers(g, i)
        p = build_vertex_piece(g, i)
        own_edges = [(a, b) for a, b in g.edges if i in (a, b)]
        shadows = (g.n - 1) + sum(b - a - 1 for a, b in own_edges)
        assert len(qm) + len(p) + shadows == box.volume
        assert not qm.cell_set() & p.cell_set()
        raised = p.translate((0, 0, 1))
        assert not qp.cell_set() & raised.cell_set()
        assert all(box.contains(c) for c in qp)


def test_k2_blocker_count_literal():
    g = k2()
    box = compile_packing(g).box
    qm, _ = build_blockers(g, 1)
    p = build_vertex_piece(g, 1)
    # one bridge: vertex 1's beam passes over column 2
    assert len(qm) + len(p) + 1 == box.volume


def test_partisan_owners():
    g = p3()
    part = default_bipartition(g)
    assert part == {1: 1, 2: 2, 3: 1}
    pre = {lab: o for lab, _, o in compile_packing(g, "premold", partisan=True).piece_list()}
    assert pre == {"v1": 1, "v2": 2, "v3": 1}
    emp = {lab: o for lab, _, o in compile_packing(g, "empty", partisan=True).piece_list()}
    assert emp["mold"] == 1
    assert (emp["v1"], emp["v2"], emp["v3"]) == (2, 1, 2)
    assert all(emp[f"q{i}{s}"] == 2 for i in g.vertices for s in "-+")


def test_partisan_rejects_odd_cycle():
    with pytest.raises(ValueError):
        compile_packing(k3(), partisan=True)


@pytest.mark.parametrize("g", [Graph.from_edges(1, []), Graph.from_edges(3, [])])
def test_rejects_degenerate_graphs(g):
    with pytest.raises(ValueError):
        compile_packing(g)


def test_compile_is_deterministic():
    a = compile_packing(p4(), variant="empty")
    b = compile_packing(p4(), variant="empty")
    assert [(lab, p) for lab, p, _ in a.piece_list()] == [(lab, p) for lab, p, _ in b.piece_list()]


@pytest.mark.parametrize("refl", [False, True])
@pytest.mark.parametrize("name", sorted(SUITE))
def test_forcing_checks_pass(name, refl):
    rep = verify_pack_reduction(SUITE[name](), allow_reflections=refl, end_to_end=False)
    assert rep.ok, str(rep)
    assert [c.name for c in rep.checks] == [
        "structure-connected", "structure-complement", "a-placement-unique",
        "b-intersection-graph", "c-blockers-end-game", "d-mold-blocks-blockers",
    ]


def test_k2_end_to_end_both_modes():
    rep = verify_pack_reduction(k2())
    assert rep.ok, str(rep)
    assert "e-end-to-end-impartial" in rep and "e-end-to-end-partisan" in rep


def test_k3_partisan_is_skipped_not_failed():
    rep = verify_pack_reduction(k3(), partisan=True)
    assert rep["e-end-to-end-partisan"].passed
    assert rep["e-end-to-end-partisan"].detail.startswith("skipped")


def test_corrupted_mold_fails_with_witness():
    art = corrupt_mold(compile_packing(k2()))
    rep = verify_pack_reduction(artifacts=art, end_to_end=False)
    assert not rep.ok
    assert not rep["structure-complement"].passed
    assert "(0,0,0)" in rep["a-placement-unique"].detail


def test_budget_exhaustion_is_reported():
    rep = verify_pack_reduction(p3(), partisan=False, budget=2)
    assert rep.budget_exhausted and not rep["e-end-to-end-impartial"].passed


def test_premold_state_has_only_vertex_pieces():
    art = compile_packing(p3())
    s = art.state()
    assert sorted(k.label for k in s.kinds) == ["v1", "v2", "v3"]
    assert s.occupied == art.box.mask_of(art.mold)
    assert s.remaining == 3 and s.mover == 1
