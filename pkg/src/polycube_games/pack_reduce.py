"""Node Kayles to 2-Player Polycube Packing in an ``N x M x 3`` box.

Cell coordinates (before the final shift that puts the box at the origin):

* vertex ``i`` owns the column ``x = 4i``, ``y = -2n .. 2m+2n-1``, ``z = 0``;
* edge ``e_j = (a, b)`` is the row ``y = 2j-1`` from ``x = 4a`` to ``4b``;
* vertex ``i``'s support beam is the row ``y = 2m+2i-1`` across the whole
  width ``x = 3 .. 4n+1``, and its key is the single cell ``(4i-1, -1, 0)``.

Where a row passes a foreign column ``x = c`` it skips ``(c, y, 0)`` and
bridges over it through ``(c-1, y, 1), (c, y, 1), (c+1, y, 1)``.  The box is
then ``N = 4n-1`` by ``M = 2m+4n`` by 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .kayles import Graph, KaylesPosition, KaylesSolver, Outcome
from .packing import BudgetExceeded, PackSolver, PackState, pack_apply, pack_legal_moves
from .report import Report
from .voxel import Box, Cell, Polycube, is_face_connected

__all__ = [
    "PackReductionArtifacts",
    "WiringDiagram",
    "build_blockers",
    "build_cavity",
    "build_mold",
    "build_vertex_piece",
    "build_wiring_diagram",
    "compile_packing",
    "corrupt_mold",
    "default_bipartition",
    "verify_pack_reduction",
]


@dataclass(frozen=True)
class WiringDiagram:
    n: int
    m: int
    # vertex -> ((x, y_lo), (x, y_hi))
    vertex_lines: dict[int, tuple[tuple[int, int], tuple[int, int]]]
    # edge index (1-based) -> ((x_a, y), (x_b, y))
    edge_segments: dict[int, tuple[tuple[int, int], tuple[int, int]]]


def _check_graph(g: Graph) -> None:
    if g.n < 2:
        raise ValueError(f"the packing reduction needs n >= 2 vertices, got n = {g.n}")
    if g.m < 1:
        raise ValueError("the packing reduction needs at least one edge (m >= 1)")


def build_wiring_diagram(g: Graph) -> WiringDiagram:
    _check_graph(g)
    lines = {i: ((4 * i, 0), (4 * i, 2 * g.m)) for i in g.vertices}
    segs = {j: ((4 * a, 2 * j), (4 * b, 2 * j)) for j, (a, b) in enumerate(g.edges, start=1)}
    return WiringDiagram(g.n, g.m, lines, segs)


def _row(y: int, x0: int, x1: int, crossed: list[int]) -> tuple[set[Cell], list[int]]:
    """Base-layer row from ``x0`` to ``x1`` bridging over columns in ``crossed``."""
    cells = {(x, y, 0) for x in range(x0, x1 + 1) if x not in crossed}
    for c in crossed:
        cells |= {(c - 1, y, 1), (c, y, 1), (c + 1, y, 1)}
    return cells, list(crossed)


@dataclass
class _Layout:
    """All gadget cell sets in box coordinates."""

    graph: Graph
    box: Box
    columns: dict[int, set[Cell]]
    keys: dict[int, Cell]
    beams: dict[int, set[Cell]]
    edges: dict[int, set[Cell]]
    bridges: int

    def region(self, i: int) -> set[Cell]:
        return self.columns[i] | {self.keys[i]} | self.beams[i]

    def piece_cells(self, i: int) -> set[Cell]:
        cells = set(self.region(i))
        for j in self.graph.incident_edges(i):
            cells |= self.edges[j]
        return cells

    def base_non_column(self, i: int) -> set[Cell]:
        """Edge, beam and key cells of piece ``i`` in the base layer."""
        return {c for c in self.piece_cells(i) - self.columns[i] if c[2] == 0}


def _layout(g: Graph) -> _Layout:
    _check_graph(g)
    n, m = g.n, g.m
    dx, dy = -3, 2 * n
    shift = lambda cells: {(x + dx, y + dy, z) for x, y, z in cells}  # noqa: E731
    box = Box(4 * n - 1, 2 * m + 4 * n, 3)
    bridges = 0
    columns = {i: shift({(4 * i, y, 0) for y in range(-2 * n, 2 * m + 2 * n)}) for i in g.vertices}
    keys = {i: (4 * i - 1 + dx, -1 + dy, 0) for i in g.vertices}
    beams = {}
    for i in g.vertices:
        y = 2 * m + 2 * i - 1
        left, cl = _row(y, 3, 4 * i - 1, [4 * k for k in range(1, i)])
        right, cr = _row(y, 4 * i + 1, 4 * n + 1, [4 * k for k in range(i + 1, n + 1)])
        bridges += len(cl) + len(cr)
        beams[i] = shift(left | right)
    edges = {}
    for j, (a, b) in enumerate(g.edges, start=1):
        cells, cr = _row(2 * j - 1, 4 * a, 4 * b, [4 * k for k in range(a + 1, b)])
        bridges += len(cr)
        edges[j] = shift(cells)
    return _Layout(g, box, columns, keys, beams, edges, bridges)


def build_cavity(g: Graph) -> tuple[Polycube, dict[int, frozenset[Cell]]]:
    """The cavity polycube and each vertex's own region (column, key, beams)."""
    lay = _layout(g)
    cells = set()
    for i in g.vertices:
        cells |= lay.region(i)
    for e in lay.edges.values():
        cells |= e
    return Polycube(sorted(cells)), {i: frozenset(lay.region(i)) for i in g.vertices}


def build_vertex_piece(g: Graph, i: int) -> Polycube:
    """Vertex ``i``'s piece, in its forced position in the box."""
    return Polycube(sorted(_layout(g).piece_cells(i)))


def build_mold(g: Graph) -> tuple[Polycube, Box]:
    cavity, _ = build_cavity(g)
    box = _layout(g).box
    grid = np.ones(box.dims, dtype=bool)
    grid[tuple(cavity.cells.T)] = False
    mold = Polycube.from_grid(grid)
    if not is_face_connected(mold):
        raise RuntimeError("mold is not face-connected")
    return mold, box


def build_blockers(g: Graph, i: int) -> tuple[Polycube, Polycube]:
    """``(q_minus, q_plus)`` for vertex ``i``, in their constructed positions."""
    lay = _layout(g)
    box = lay.box
    piece = lay.piece_cells(i)
    under_bridges = {(x, y, 0) for x, y, z in piece if z == 1} - piece
    q_minus = set(box.all_cells()) - piece - under_bridges
    raised = {(x, y, z + 1) for x, y, z in piece}
    above_base = {(x, y, 2) for x, y, _ in lay.base_non_column(i)} - raised
    q_plus = set(box.all_cells()) - raised - above_base
    return Polycube(sorted(q_minus)), Polycube(sorted(q_plus))


@dataclass
class PackReductionArtifacts:
    graph: Graph
    box: Box
    mold: Polycube
    cavity: Polycube
    vertex_pieces: dict[int, Polycube]
    blockers: dict[int, tuple[Polycube, Polycube]]
    forced_placements: dict[int, frozenset[Cell]]
    variant: str = "premold"
    partisan: bool = False
    partition: dict[int, int] | None = None
    allow_reflections: bool = False
    bridges: int = 0
    meta: dict = field(default_factory=dict)

    def raised(self, i: int) -> Polycube:
        return self.vertex_pieces[i].translate((0, 0, 1))

    def piece_list(self) -> list[tuple[str, Polycube, int | None]]:
        """``(label, piece, owner)`` in instance order for the chosen variant."""
        part = self.partition or {}
        out = []
        if self.variant == "empty":
            out.append(("mold", self.mold, 1 if self.partisan else None))
        for i in self.graph.vertices:
            owner = None
            if self.partisan:
                # the Kayles first mover is the packing player who moves after the mold
                owner = part[i] if self.variant == "premold" else 3 - part[i]
            out.append((f"v{i}", self.vertex_pieces[i], owner))
        if self.variant == "empty":
            for i in self.graph.vertices:
                qm, qp = self.blockers[i]
                own = 2 if self.partisan else None
                out.append((f"q{i}-", qm, own))
                out.append((f"q{i}+", qp, own))
        return out

    def preplaced(self) -> Polycube | None:
        return self.mold if self.variant == "premold" else None

    def state(self, allow_reflections: bool | None = None) -> PackState:
        refl = self.allow_reflections if allow_reflections is None else allow_reflections
        items = self.piece_list()
        pre = self.preplaced()
        return PackState.new(
            self.box,
            [p for _, p, _ in items],
            [o for _, _, o in items] if self.partisan else None,
            occupied=self.box.mask_of(pre) if pre is not None else 0,
            allow_reflections=refl,
            labels=[lab for lab, _, _ in items],
        )


def default_bipartition(g: Graph) -> dict[int, int]:
    """2-colouring with the lowest vertex of each component on side 1."""
    side: dict[int, int] = {}
    for start in g.vertices:
        if start in side:
            continue
        side[start] = 1
        stack = [start]
        while stack:
            u = stack.pop()
            for w in sorted(g.neighbors(u)):
                if w not in side:
                    side[w] = 3 - side[u]
                    stack.append(w)
                elif side[w] == side[u]:
                    raise ValueError("graph is not bipartite; no partition into two independent sets")
    return side


def compile_packing(
    g: Graph,
    variant: str = "premold",
    partisan: bool = False,
    partition: Mapping[int, int] | None = None,
    allow_reflections: bool = False,
) -> PackReductionArtifacts:
    if variant not in ("premold", "empty"):
        raise ValueError(f"unknown variant {variant!r}")
    lay = _layout(g)
    mold, box = build_mold(g)
    cavity, _ = build_cavity(g)
    pieces = {i: Polycube(sorted(lay.piece_cells(i))) for i in g.vertices}
    blockers = {i: build_blockers(g, i) for i in g.vertices}
    part = None
    if partisan:
        part = dict(partition) if partition is not None else default_bipartition(g)
        KaylesPosition.initial(g, part)
    return PackReductionArtifacts(
        graph=g,
        box=box,
        mold=mold,
        cavity=cavity,
        vertex_pieces=pieces,
        blockers=blockers,
        forced_placements={i: p.cell_set() for i, p in pieces.items()},
        variant=variant,
        partisan=partisan,
        partition=part,
        allow_reflections=allow_reflections,
        bridges=lay.bridges,
    )


def corrupt_mold(art: PackReductionArtifacts, cell: Cell | None = None) -> PackReductionArtifacts:
    """Copy of ``art`` whose mold lost one cell (negative-control fixture)."""
    cells = art.mold.cell_set()
    if cell is None:
        cell = min(cells)
    if cell not in cells:
        raise ValueError(f"{cell} is not a mold cell")
    return replace(art, mold=Polycube(sorted(cells - {cell})), meta={**art.meta, "corrupted": cell})


def _fmt(cells, limit: int = 3) -> str:
    cs = sorted(cells)
    s = " ".join(f"({x},{y},{z})" for x, y, z in cs[:limit])
    return s + (f" ... (+{len(cs) - limit})" if len(cs) > limit else "")


def _empty_board(art: PackReductionArtifacts, refl: bool) -> PackState:
    return replace(art, variant="empty", partisan=False).state(refl)


def _place(s: PackState, label: str, cells) -> PackState:
    """Place the piece called ``label`` onto exactly ``cells``."""
    target = s.box.mask_of(cells)
    for mv in pack_legal_moves(s):
        if mv.placement.piece_id == label and mv.mask == target:
            return pack_apply(s, mv)
    # a congruent piece may carry another kind label; fall back on cell match
    for mv in pack_legal_moves(s):
        if mv.mask == target:
            return pack_apply(s, mv)
    raise LookupError(f"{label} cannot be placed on the requested cells")


def verify_pack_reduction(
    g: Graph | None = None,
    allow_reflections: bool = False,
    partisan: bool | None = None,
    budget: int | None = None,
    artifacts: PackReductionArtifacts | None = None,
    end_to_end: bool = True,
) -> Report:
    """Machine-check the placement and play properties by exhaustive enumeration."""
    art = artifacts if artifacts is not None else compile_packing(g, allow_reflections=allow_reflections)
    g = art.graph
    refl = allow_reflections
    rep = Report()
    box = art.box
    full = box.full_mask
    mold_mask = box.mask_of(art.mold)
    cavity_mask = box.mask_of(art.cavity)

    # structure
    bad = [lab for lab, p, _ in replace(art, variant="empty").piece_list() if not is_face_connected(p)]
    rep.add("structure-connected", not bad, "all pieces face-connected" if not bad else f"disconnected: {bad}")
    overlap = mold_mask & cavity_mask
    gaps = full & ~(mold_mask | cavity_mask)
    ok = not overlap and not gaps
    rep.add(
        "structure-complement",
        ok,
        "mold and cavity tile the box" if ok
        else f"mold/cavity mismatch at {_fmt(box.cells_of_mask(overlap | gaps))}",
    )

    # (a) unique placement
    s = replace(art, variant="premold", partisan=False).state(refl)
    s = replace(s, occupied=mold_mask)
    free = full & ~mold_mask
    failures = []
    if free != cavity_mask:
        failures.append(f"free space after mold differs from cavity at {_fmt(box.cells_of_mask(free ^ cavity_mask))}")
    for i in g.vertices:
        target = box.mask_of(art.vertex_pieces[i])
        lab = f"v{i}"
        one = replace(s, counts=tuple(int(k.label == lab) for k in s.kinds))
        landing = pack_legal_moves(one)
        if [mv.mask for mv in landing] != [target]:
            extra = [mv for mv in landing if mv.mask != target]
            wit = f"witness {_fmt(extra[0].placement.resulting_cells)}" if extra else "forced spot unavailable"
            failures.append(f"v{i}: {len(landing)} placements, {wit}")
    rep.add(
        "a-placement-unique",
        not failures,
        "; ".join(failures) if failures else f"{g.n} pieces, 1 placement each (reflections {'on' if refl else 'off'})",
    )

    # (b) intersection graph
    forced = {i: box.mask_of(art.vertex_pieces[i]) for i in g.vertices}
    got = {(u, v) for u in g.vertices for v in g.vertices if u < v and forced[u] & forced[v]}
    want = set(g.simple_edges())
    rep.add(
        "b-intersection-graph",
        got == want,
        f"overlap graph = G ({len(want)} edges)" if got == want
        else f"missing {sorted(want - got)} extra {sorted(got - want)}",
    )

    # (c) blockers end the game
    empty = _empty_board(art, refl)
    failures = []
    for i in g.vertices:
        qm, qp = art.blockers[i]
        p = art.vertex_pieces[i]
        pr = art.raised(i)
        for name, first, second in (
            ("p-normal,q-", (f"v{i}", p), (f"q{i}-", qm)),
            ("p-raised,q+", (f"v{i}", pr), (f"q{i}+", qp)),
            ("q-,p-normal", (f"q{i}-", qm), (f"v{i}", p)),
            ("q+,p-raised", (f"q{i}+", qp), (f"v{i}", pr)),
        ):
            try:
                t = _place(_place(empty, *first), *second)
            except LookupError as exc:
                failures.append(f"v{i} {name}: {exc}")
                continue
            left = pack_legal_moves(t)
            if left:
                failures.append(
                    f"v{i} {name}: {len(left)} moves remain, witness {left[0].placement.piece_id} "
                    f"on {_fmt(left[0].placement.resulting_cells)}"
                )
    rep.add("c-blockers-end-game", not failures, "; ".join(failures) if failures else f"{4 * g.n} sequences end the game")

    # (d) mold blocks blockers
    after = _place(empty, "mold", art.mold.cell_set()) if not art.meta.get("corrupted") else replace(
        empty, occupied=mold_mask, counts=tuple(0 if k.label == "mold" else c for k, c in zip(empty.kinds, empty.counts))
    )
    bl = [mv for mv in pack_legal_moves(after) if empty.kinds[mv.kind].label.startswith("q")]
    rep.add(
        "d-mold-blocks-blockers",
        not bl,
        "no blocker fits after the mold" if not bl
        else f"{bl[0].placement.piece_id} fits on {_fmt(bl[0].placement.resulting_cells)}",
    )

    if end_to_end:
        _end_to_end(rep, art, refl, partisan, budget)
    return rep


def _end_to_end(rep: Report, art: PackReductionArtifacts, refl: bool, partisan: bool | None, budget) -> None:
    g = art.graph
    modes = [False, True] if partisan is None else [partisan]
    for part in modes:
        if part:
            try:
                partition = art.partition or default_bipartition(g)
            except ValueError:
                rep.add("e-end-to-end-partisan", True, "skipped: graph has no partition into two independent sets")
                continue
        else:
            partition = None
        kay = KaylesSolver(g, partition).solve(KaylesPosition.initial(g, partition))
        tag = "partisan" if part else "impartial"
        pre = replace(art, variant="premold", partisan=part, partition=partition).state(refl)
        pre = replace(pre, occupied=art.box.mask_of(art.mold))
        emp = replace(art, variant="empty", partisan=part, partition=partition).state(refl)
        try:
            solver = PackSolver(budget)
            got_pre = Outcome.of(solver.wins(pre))
            solver = PackSolver(budget)
            got_emp = Outcome.of(solver.wins(emp))
        except BudgetExceeded as exc:
            rep.budget_exhausted = True
            rep.add(f"e-end-to-end-{tag}", False, f"not decided: {exc}")
            continue
        ok = got_pre == kay and got_emp == kay.flipped()
        rep.add(
            f"e-end-to-end-{tag}",
            ok,
            f"kayles first player {kay.value}; premold mover {got_pre.value}; "
            f"empty-board mover {got_emp.value} ({solver.nodes} nodes)",
        )
