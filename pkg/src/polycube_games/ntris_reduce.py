"""Node Kayles to 2-Player 3D n-tris.

The box is a cube of side ``S``.  In the construction frame the play face is
the top (``z = S-1``) and every cavity opens onto it:

* the contest region, holding the one vertex piece chosen in each phase;
* one dump per phase, holding the ``n-1`` pieces not chosen;
* the main garbage chute, a ``1 x 1`` shaft absorbing the out-of-phase turns.

Five shallow ``1 x 1 x L`` chutes, one per other face, punish a mold dropped
with the wrong side up.  Cavity footprints sit left to right along ``x``,
three cells in from the box edge, separated by one-cell walls.

Phase-``i`` vertex pieces are built in their own upright frame (edge columns
along ``y = 0``, binding along ``y = -1``, handle running to negative ``y``);
see :func:`build_phase_piece`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .kayles import Graph, KaylesPosition, KaylesSolver, Outcome
from .ntris import DropMove, TetrisSolver, TetrisState, _apply_raw, drop_moves, orientations
from .packing import BudgetExceeded
from .report import Report
from .voxel import Box, Cell, Isometry, Polycube, is_face_connected

__all__ = [
    "PaddedGraph",
    "TetrisReductionArtifacts",
    "build_cavities",
    "build_phase_piece",
    "build_sequence",
    "build_tetris_mold",
    "compile_ntris",
    "dump_footprint",
    "pad_graph",
    "verify_tetris_reduction",
]

# (x, y, z) -> (z, y, -x): stands a piece's binding up on end
DUMP_ROTATION = ((0, 0, 1), (0, 1, 0), (-1, 0, 0))
MARGIN = 3


@dataclass(frozen=True)
class PaddedGraph:
    """``graph`` with extra edge columns: one private column per vertex, then fillers.

    Column ``h`` (1-based) is listed edge ``h`` for ``h <= graph.m``, the
    private column of vertex ``h - graph.m`` up to ``graph.m + n``, and an
    unused filler beyond that.
    """

    graph: Graph
    m: int
    private: dict[int, int]

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dummy_edges(self) -> int:
        return self.m - self.graph.m

    @property
    def handle_x(self) -> int:
        return math.ceil(self.m / 2)

    def columns(self, v: int) -> list[int]:
        return sorted(self.graph.incident_edges(v) + [self.private[v]])


def pad_graph(g: Graph) -> PaddedGraph:
    if g.n < 2:
        raise ValueError(f"the n-tris reduction needs n >= 2 vertices, got n = {g.n}")
    private = {v: g.m + v for v in g.vertices}
    return PaddedGraph(g, max(g.n + 4, g.m + g.n), private)


def build_phase_piece(pg: PaddedGraph, v: int, i: int) -> Polycube:
    """Phase-``i`` piece of vertex ``v`` in its upright frame."""
    n, m, c = pg.n, pg.m, pg.handle_x
    if not 1 <= i <= n:
        raise ValueError(f"phase {i} outside 1..{n}")
    cells = [(h - 1, 0, z) for h in pg.columns(v) for z in range(n)]
    cells += [(x, -1, i - 1) for x in range(m)]
    cells += [(c, y, i - 1) for y in range(i - n - 3, -1)]
    cells.append((c - 1, -3, i - 1))
    return Polycube(cells)


def dump_footprint(pg: PaddedGraph, i: int) -> set[tuple[int, int]]:
    """Top-down shadow of a phase-``i`` piece stood on end, normalized to the origin."""
    p = build_phase_piece(pg, 1, i).transformed(Isometry(DUMP_ROTATION)).normalized()
    return {(x, y) for x, y, _ in p}


def contest_footprint(pg: PaddedGraph) -> set[tuple[int, int]]:
    """Shadow shared by all upright phase pieces, shifted so the handle tip is at ``y = 0``."""
    n, m, c = pg.n, pg.m, pg.handle_x
    cells = {(x, y) for x in range(m) for y in (0, -1)}
    cells |= {(c, y) for y in range(-(n + 2), -1)}
    cells.add((c - 1, -3))
    return {(x, y + n + 2) for x, y in cells}


def build_cavities(pg: PaddedGraph):
    """``(contest, dumps)`` as ``(footprint, depth)`` pairs, footprints at the origin."""
    n, m = pg.n, pg.m
    contest = (contest_footprint(pg), n)
    dumps = {i: (dump_footprint(pg, i), m * (n - 1)) for i in range(1, n + 1)}
    return contest, dumps


@dataclass
class TetrisReductionArtifacts:
    graph: Graph
    padded: PaddedGraph
    box: Box
    L: int
    chute_depth: int
    shallow_chute_depth: int
    mold: Polycube
    contest_region: frozenset[Cell]
    dumps: dict[int, frozenset[Cell]]
    garbage_chute: frozenset[Cell]
    side_chutes: dict[str, frozenset[Cell]]
    notches: frozenset[Cell]
    vertex_pieces: dict[tuple[int, int], Polycube]
    garbage: Polycube
    sequence: list[tuple[str, Polycube]]
    contest_offset: Cell
    plane_clearing: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def side(self) -> int:
        return self.box.nx

    def state(self) -> TetrisState:
        return TetrisState(self.box, tuple(p for _, p in self.sequence), 0, 0, self.plane_clearing)

    def labels(self) -> list[str]:
        return [lab for lab, _ in self.sequence]

    def contest_placement(self, v: int, i: int) -> frozenset[Cell]:
        """Construction-frame cells of the phase-``i`` piece of ``v`` seated in the contest region."""
        dx, dy, dz = self.contest_offset
        return frozenset((x + dx, y + dy, z + dz) for x, y, z in self.vertex_pieces[(v, i)])

    def region_masks(self, lin) -> dict[str, int]:
        """Box bit masks of the cavities once the mold lands with rotation ``lin`` face up."""
        f = _Frame(self, lin)
        return {"contest": f.contest, **{f"dump{i}": m for i, m in f.dumps.items()}, "chute": f.chute}

    def cavity_dims(self) -> dict[str, Cell]:
        out = {"contest": _dims(self.contest_region)}
        out.update({f"dump{i}": _dims(c) for i, c in self.dumps.items()})
        return out


def _dims(cells) -> Cell:
    a = np.array(sorted(cells))
    return tuple(int(v) for v in a.max(0) - a.min(0) + 1)


def _notches(S: int) -> set[Cell]:
    """One cell on every axis-aligned plane, on the box surface, alternating sides."""
    out = set()
    for k in range(S):
        lo, hi = 0, S - 1
        out.add((lo if k % 2 == 0 else hi, 0, k))
        out.add((k, hi, lo if k % 2 == 0 else hi))
        out.add((lo if k % 2 == 0 else hi, k, hi))
    return out


def build_tetris_mold(pg: PaddedGraph, plane_clearing: bool = False, chute_shortfall: int = 0):
    """Lay out every cavity in a cube and return ``(mold, box, regions)``.

    ``chute_shortfall`` shortens the main chute (negative-control fixture)
    without changing anything else.
    """
    n = pg.n
    (cfoot, cdepth), dumps = build_cavities(pg)
    dims = [max(x for x, _ in cfoot) + 1, max(y for _, y in cfoot) + 1, cdepth]
    for foot, depth in dumps.values():
        dims += [max(x for x, _ in foot) + 1, max(y for _, y in foot) + 1, depth]
    L = 1 + max(dims)
    garbage_count = n * (n - 1) + 1
    chute_depth = L * garbage_count
    layout = [("contest", cfoot, cdepth)] + [(f"dump{i}", f, d) for i, (f, d) in dumps.items()]
    layout.append(("chute", {(0, 0)}, chute_depth - chute_shortfall))
    placed_foot = {}
    x0 = MARGIN
    for name, foot, depth in layout:
        placed_foot[name] = ({(x + x0, y + MARGIN) for x, y in foot}, depth)
        x0 += max(x for x, _ in foot) + 2
    used_x = max(x for f, _ in placed_foot.values() for x, _ in f)
    used_y = max(y for f, _ in placed_foot.values() for _, y in f)
    S = max(chute_depth + 2, used_x + 8, used_y + 8, 2 * L + 3)

    regions: dict[str, set[Cell]] = {
        name: {(x, y, z) for x, y in foot for z in range(S - depth, S)}
        for name, (foot, depth) in placed_foot.items()
    }
    r = range(L)
    regions["side-x-"] = {(k, S - 3, 3) for k in r}
    regions["side-x+"] = {(S - 1 - k, S - 3, 3) for k in r}
    regions["side-y-"] = {(S - 3, k, 5) for k in r}
    regions["side-y+"] = {(S - 3, S - 1 - k, 5) for k in r}
    regions["side-z-"] = {(S - 6, S - 6, k) for k in r}
    notches = _notches(S) if plane_clearing else set()

    box = Box(S, S, S)
    grid = np.ones(box.dims, dtype=bool)
    label = np.zeros(box.dims, dtype=np.int32)
    for k, cells in enumerate(regions.values(), start=1):
        a = np.array(sorted(cells))
        if label[tuple(a.T)].any():
            raise RuntimeError("cavities overlap")
        label[tuple(a.T)] = k
        grid[tuple(a.T)] = False
    if notches:
        a = np.array(sorted(notches))
        if (label[tuple(a.T)] != 0).any():
            raise RuntimeError("notch inside a cavity")
        grid[tuple(a.T)] = False
    _assert_separate(label, len(regions))
    mold = Polycube.from_grid(grid)
    if not is_face_connected(mold):
        raise RuntimeError("mold is not face-connected")
    meta = dict(L=L, chute_depth=chute_depth - chute_shortfall, shallow_chute_depth=L * n * (n - 1),
                contest_offset=(MARGIN, MARGIN + n + 2, S - n), notches=frozenset(notches))
    return mold, box, {k: frozenset(v) for k, v in regions.items()}, meta


def _assert_separate(label: np.ndarray, count: int) -> None:
    """Every cavity must be its own connected component of the empty space."""
    comp, ncomp = ndimage.label(label > 0, structure=ndimage.generate_binary_structure(3, 1))
    if ncomp != count:
        raise RuntimeError(f"{count} cavities form {ncomp} components; some touch")


def build_sequence(pg: PaddedGraph, mold: Polycube, garbage: Polycube) -> list[tuple[str, Polycube]]:
    seq = [("mold", mold), ("garbage", garbage)]
    for i in range(1, pg.n + 1):
        for v in pg.graph.vertices:
            if v > 1:
                seq.append(("garbage", garbage))
            seq.append((f"v{v}p{i}", build_phase_piece(pg, v, i)))
    return seq


def compile_ntris(g: Graph, plane_clearing: bool = False, chute_shortfall: int = 0) -> TetrisReductionArtifacts:
    pg = pad_graph(g)
    mold, box, regions, meta = build_tetris_mold(pg, plane_clearing, chute_shortfall)
    L = meta["L"]
    garbage = Polycube([(0, 0, z) for z in range(L)])
    pieces = {(v, i): build_phase_piece(pg, v, i) for i in range(1, g.n + 1) for v in g.vertices}
    return TetrisReductionArtifacts(
        graph=g,
        padded=pg,
        box=box,
        L=L,
        chute_depth=meta["chute_depth"],
        shallow_chute_depth=meta["shallow_chute_depth"],
        mold=mold,
        contest_region=regions["contest"],
        dumps={i: regions[f"dump{i}"] for i in range(1, g.n + 1)},
        garbage_chute=regions["chute"],
        side_chutes={k[5:]: v for k, v in regions.items() if k.startswith("side-")},
        notches=meta["notches"],
        vertex_pieces=pieces,
        garbage=garbage,
        sequence=build_sequence(pg, mold, garbage),
        contest_offset=meta["contest_offset"],
        plane_clearing=plane_clearing,
        meta={"chute_shortfall": chute_shortfall},
    )


# ---------------------------------------------------------------- verification


def _frame(lin, S: int) -> Isometry:
    t = tuple(S - 1 if sum(row) < 0 else 0 for row in lin)
    return Isometry(lin, t)


def _play_face_up(lin) -> bool:
    return tuple(row[2] for row in lin) == (0, 0, 1)


class _Frame:
    """Region masks in box coordinates for one way of seating the mold."""

    def __init__(self, art: TetrisReductionArtifacts, lin):
        box = art.box
        iso = _frame(lin, box.nx)

        def mask(cells) -> int:
            return box.mask_of(iso.apply_array(np.array(sorted(cells), dtype=np.int64).reshape(-1, 3)))

        self.contest = mask(art.contest_region)
        self.dumps = {i: mask(c) for i, c in art.dumps.items()}
        self.chute = mask(art.garbage_chute)
        pg = art.padded
        dx, dy, dz = art.contest_offset
        # bottom cell of each vertex's private column: set iff that vertex sits in the contest
        self.private = {v: mask([(pg.private[v] - 1 + dx, dy, dz)]) for v in art.graph.vertices}
        self.expected = {k: mask(art.contest_placement(*k)) for k in art.vertex_pieces}


def _parse_label(lab: str):
    v, i = lab[1:].split("p")
    return int(v), int(i)


class _Audit:
    """Collects (b), (c), (d) violations from every position the solver expands."""

    def __init__(self, art: TetrisReductionArtifacts):
        self.art = art
        self.labels = art.labels()
        self.frame: _Frame | None = None
        self.states = 0
        self.garbage_drops = 0
        self.contest_checks = 0
        self.bad_b: list[str] = []
        self.bad_c: list[str] = []
        self.bad_d: list[str] = []

    def __call__(self, s: TetrisState, moves: list[DropMove]) -> None:
        f = self.frame
        if f is None:
            return
        self.states += 1
        lab = self.labels[s.index]
        if lab == "garbage":
            for mv in moves:
                self.garbage_drops += 1
                if mv.mask & ~f.chute:
                    self.bad_b.append(f"turn {s.index + 1}: garbage lands outside the chute at {mv.script()}")
            return
        if lab == "mold":
            return
        v, i = _parse_label(lab)
        g = self.art.graph
        chosen = {u for u, bit in f.private.items() if s.occupied & bit}
        inside = [mv for mv in moves if not mv.mask & ~f.contest]
        allowed = len(chosen) == i - 1 and v not in chosen and not any(g.adjacent(v, u) for u in chosen)
        self.contest_checks += 1
        if allowed:
            if len(inside) != 1 or inside[0].mask != f.expected[(v, i)]:
                self.bad_c.append(f"{lab} with contest {sorted(chosen)}: {len(inside)} contest drops, expected 1")
        elif inside:
            self.bad_c.append(f"{lab} with contest {sorted(chosen)}: witness {inside[0].script()} should not fit")
        for mv in moves:
            if not mv.mask & ~f.contest or not mv.mask & ~f.dumps[i]:
                continue
            later = [k for k, d in f.dumps.items() if k > i and not mv.mask & ~d]
            where = f"phase-{later[0]} dump" if later else "outside the contest and its dump"
            self.bad_d.append(f"{lab} lands in the {where}: {mv.script()}")


def _fmt_list(xs: list[str], limit: int = 2) -> str:
    more = f" (+{len(xs) - limit} more)" if len(xs) > limit else ""
    return "; ".join(xs[:limit]) + more


def verify_tetris_reduction(
    g: Graph | None = None,
    plane_clearing: bool | None = None,
    budget: int | None = None,
    artifacts: TetrisReductionArtifacts | None = None,
    end_to_end: bool = True,
) -> Report:
    """Machine-check the n-tris forcing properties and the winner equivalence.

    ``plane_clearing=None`` plays the game without clearing and then again
    with it; ``True`` / ``False`` plays only that variant.  Given
    ``artifacts``, the other variant is rebuilt from the same graph with the
    same chute depth.
    """
    art = artifacts if artifacts is not None else compile_ntris(g, bool(plane_clearing))
    g = art.graph
    pg = art.padded
    rep = Report()
    rep.note(f"box {art.side}^3, m = {pg.m} (padded from {g.m}), L = {art.L}")
    rep.note(f"main chute depth {art.chute_depth}; the sizing L*n(n-1) would give {art.shallow_chute_depth}")

    _structure_checks(rep, art)
    up_lin = next(lin for lin, _ in orientations(art.mold) if _play_face_up(lin))
    face_up = _after_mold(art, up_lin)
    _chute_capacity(rep, art, face_up)
    _check_a(rep, art)
    _check_d_static(rep, art, face_up)
    if not end_to_end:
        return rep

    kay = KaylesSolver(g).solve(KaylesPosition.initial(g))
    variants = [False, True] if plane_clearing is None else [plane_clearing]
    for clearing in variants:
        run = art if clearing == art.plane_clearing else compile_ntris(g, clearing, art.meta.get("chute_shortfall", 0))
        if run is not art and clearing:
            _notch_check(rep, run)
        audit = _Audit(run)
        solver = TetrisSolver(budget, on_expand=audit)
        try:
            first = _solve_root(run, solver, audit)
        except BudgetExceeded:
            rep.budget_exhausted = True
            rep.add("e-end-to-end" if not clearing else "f-clearing-invariance", False,
                    f"node budget {budget} exhausted after {solver.nodes} positions")
            continue
        if not clearing:
            rep.add("b-garbage-in-chute", not audit.bad_b,
                    _fmt_list(audit.bad_b) if audit.bad_b
                    else f"{audit.garbage_drops} garbage drops over {audit.states} positions, all in the main chute")
            rep.add("c-contest-unique", not audit.bad_c,
                    _fmt_list(audit.bad_c) if audit.bad_c
                    else f"{audit.contest_checks} vertex-piece positions, placement matches the Kayles position")
            rep.add("d-dump-only", not audit.bad_d,
                    _fmt_list(audit.bad_d) if audit.bad_d
                    else "every other vertex-piece drop lands in its own phase dump")
            rep.add("e-end-to-end", first == kay,
                    f"kayles first player {kay.value}; n-tris first player {first.value} ({solver.nodes} positions)")
        else:
            bad = audit.bad_b + audit.bad_c + audit.bad_d
            ok = first == kay and solver.clear_events == 0 and not bad
            detail = (f"first player {first.value} (kayles {kay.value}), {solver.clear_events} clear events "
                      f"over {solver.nodes} positions")
            if bad:
                detail += f"; {_fmt_list(bad, 1)}"
            rep.add("f-clearing-invariance", ok, detail)
    return rep


def _after_mold(art: TetrisReductionArtifacts, lin) -> TetrisState:
    root = art.state()
    oi = next(k for k, (l2, _) in enumerate(orientations(art.mold)) if l2 == lin)
    mv = next(m for m in drop_moves(root) if m.orientation == oi)
    return _apply_raw(root, mv)[0]


def _solve_root(art: TetrisReductionArtifacts, solver: TetrisSolver, audit: _Audit) -> Outcome:
    """Root negamax done by hand so the audit knows how the mold was seated."""
    root = art.state()
    grids = orientations(art.mold)
    solver.nodes += 1
    for mv in drop_moves(root):
        lin = grids[mv.orientation][0]
        audit.frame = _Frame(art, lin) if _play_face_up(lin) else None
        child, cleared = _apply_raw(root, mv)
        solver.clear_events += cleared
        if not solver.wins(child):
            return Outcome.MOVER_WINS
    return Outcome.MOVER_LOSES


def _structure_checks(rep: Report, art: TetrisReductionArtifacts) -> None:
    n = art.graph.n
    dims = art.cavity_dims()
    worst = max(max(d) for d in dims.values())
    rep.add("structure-L", art.L > worst, f"L = {art.L} > largest cavity dimension {worst}")
    bad = [k for k, p in art.vertex_pieces.items() if not is_face_connected(p)]
    ok = not bad and is_face_connected(art.mold)
    rep.add("structure-connected", ok, "mold and all vertex pieces face-connected" if ok
            else f"disconnected: {bad or 'mold'}")
    labels = art.labels()
    want_len = 2 + n * (2 * n - 1)
    garbage = labels.count("garbage")
    ok = len(labels) == want_len and garbage == n * (n - 1) + 1
    rep.add("structure-sequence", ok, f"{len(labels)} pieces, {garbage} garbage")
    if art.plane_clearing:
        _notch_check(rep, art)


def _notch_check(rep: Report, art: TetrisReductionArtifacts) -> None:
    zs = {z for _, _, z in art.notches}
    xs = {x for x, _, _ in art.notches}
    ys = {y for _, y, _ in art.notches}
    full = set(range(art.side))
    ok = zs == full and xs == full and ys == full
    rep.add("structure-notches", ok, f"every axis-aligned plane has an empty notch ({len(art.notches)} cells)")


def _chute_capacity(rep: Report, art: TetrisReductionArtifacts, face_up: TetrisState) -> None:
    """Drop every garbage piece of the sequence straight into the chute."""
    count = art.labels().count("garbage")
    box = art.box
    chute = _Frame(art, next(lin for lin, _ in orientations(art.mold) if _play_face_up(lin))).chute
    s = TetrisState(box, (art.garbage,) * count, face_up.occupied, 0, False)
    for k in range(count):
        into = [mv for mv in drop_moves(s) if not mv.mask & ~chute]
        if not into:
            rep.add("chute-capacity", False,
                    f"garbage piece {k + 1} of {count} has no drop into the main chute "
                    f"(depth {art.chute_depth}, needs {art.L * count})")
            return
        s = _apply_raw(s, into[0])[0]
    rep.add("chute-capacity", True, f"all {count} garbage pieces fit the main chute (depth {art.chute_depth})")


def _check_a(rep: Report, art: TetrisReductionArtifacts) -> None:
    root = art.state()
    grids = orientations(art.mold)
    failures = []
    tried = 0
    for mv in drop_moves(root):
        lin = grids[mv.orientation][0]
        if _play_face_up(lin):
            continue
        tried += 1
        s1 = _apply_raw(root, mv)[0]
        replies = drop_moves(s1)
        if not any(not drop_moves(_apply_raw(s1, g)[0]) for g in replies):
            failures.append(f"mold orientation {mv.orientation}: {len(replies)} garbage replies, "
                            f"none leaves the next piece without a drop")
    rep.add("a-mold-face-up", not failures and tried > 0,
            _fmt_list(failures) if failures else f"{tried} wrong-side-up seatings each refuted by one garbage drop")


def _check_d_static(rep: Report, art: TetrisReductionArtifacts, face_up: TetrisState) -> None:
    """Dump capacity and later-dump exclusion from the bare mold."""
    g, n, m = art.graph, art.graph.n, art.padded.m
    lin = next(lin for lin, _ in orientations(art.mold) if _play_face_up(lin))
    f = _Frame(art, lin)
    problems = []
    box = art.box
    floor = box.nz - m * (n - 1)
    orders = list(itertools.permutations(g.vertices)) if n <= 4 else [tuple(g.vertices)]
    for i in range(1, n + 1):
        for order in orders:
            seq = tuple(art.vertex_pieces[(v, i)] for v in order)
            s = TetrisState(box, seq, face_up.occupied, 0, False)
            placed = 0
            while not s.exhausted:
                into = [mv for mv in drop_moves(s) if not mv.mask & ~f.dumps[i]]
                if not into:
                    break
                s = _apply_raw(s, into[0])[0]
                placed += 1
                top = max(z for _, _, z in box.cells_of_mask(s.occupied & f.dumps[i])) + 1
                if top - floor != placed * m:
                    problems.append(f"phase {i}: {placed} pieces reach height {top - floor}, expected {placed * m}")
            if placed != n - 1:
                problems.append(f"phase {i} order {order}: {placed} pieces fit the dump, expected {n - 1}")
        for v in g.vertices:
            s = TetrisState(box, (art.vertex_pieces[(v, i)],), face_up.occupied, 0, False)
            for mv in drop_moves(s):
                later = [k for k in range(i + 1, n + 1) if not mv.mask & ~f.dumps[k]]
                if later:
                    problems.append(f"v{v}p{i} fits the phase-{later[0]} dump: {mv.script()}")
    rep.add("d-dump-capacity", not problems,
            _fmt_list(problems) if problems else f"each dump takes exactly {n - 1} of its phase's pieces, "
                                               f"stacked {m} high; no piece fits a later dump")
