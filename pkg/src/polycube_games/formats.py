"""Plain-text file formats and renderers.

Graph file::

    graph <n> <m>
    u v                    (m lines)
    partition: 1 3         (optional; the side-1 vertices)

Polycube block::

    polycube <id> <cell-count>
    x y z                  (one line per cell)

A packing instance starts with ``packing-instance``, then ``box nx ny nz``,
``reflections on|off`` and ``partisan on|off``, then any number of
``pre-placed <count>`` cell blocks and polycube blocks.  A polycube block may
be followed by ``owner P1|P2``.  An n-tris instance starts with
``ntris-instance``, then ``box`` and ``clearing on|off``, then the piece
sequence as polycube blocks in order.  Blank lines and lines starting with
``#`` are ignored everywhere.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .kayles import Graph
from .packing import PackState
from .ntris import TetrisState
from .voxel import Box, Polycube

__all__ = [
    "FormatError",
    "NtrisInstance",
    "PackingInstance",
    "format_graph",
    "format_move_script",
    "format_ntris_instance",
    "format_packing_instance",
    "format_polycube",
    "parse_graph",
    "parse_instance",
    "parse_move_script",
    "parse_ntris_instance",
    "parse_packing_instance",
    "parse_polycube",
    "render_layers",
    "render_mesh",
]


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class _Lines:
    """Meaningful lines with their 1-based source line numbers."""

    items: list[tuple[int, str]]
    pos: int = 0

    @classmethod
    def of(cls, text: str) -> "_Lines":
        out = []
        for k, raw in enumerate(text.splitlines(), start=1):
            s = raw.strip()
            if s and not s.startswith("#"):
                out.append((k, s))
        return cls(out)

    def done(self) -> bool:
        return self.pos >= len(self.items)

    def peek(self) -> tuple[int, str] | None:
        return None if self.done() else self.items[self.pos]

    def next(self, what: str) -> tuple[int, str]:
        if self.done():
            last = self.items[-1][0] if self.items else 0
            raise FormatError(f"unexpected end of file, expected {what}", last + 1 if self.items else 1)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def take(self, k: int) -> list[tuple[int, str]]:
        chunk = self.items[self.pos:self.pos + k]
        self.pos += len(chunk)
        return chunk

    def last_line(self) -> int:
        return self.items[-1][0] if self.items else 1


def _ints(ln: int, words: Sequence[str], count: int, what: str) -> list[int]:
    if len(words) != count:
        raise FormatError(f"{what}: expected {count} integers, got {len(words)}", ln)
    try:
        return [int(w) for w in words]
    except ValueError:
        raise FormatError(f"{what}: not an integer in {' '.join(words)!r}", ln) from None


def _on_off(ln: int, line: str, key: str) -> bool:
    words = line.split()
    if len(words) != 2 or words[0] != key or words[1] not in ("on", "off"):
        raise FormatError(f"expected '{key} on|off'", ln)
    return words[1] == "on"


# ---------------------------------------------------------------- graphs


def parse_graph(text: str, multigraph: bool = False) -> tuple[Graph, dict[int, int] | None]:
    """Graph and optional partition (vertex -> side 1 or 2)."""
    lines = _Lines.of(text)
    ln, head = lines.next("graph header")
    words = head.split()
    if not words or words[0] != "graph":
        raise FormatError("expected 'graph <n> <m>'", ln)
    n, m = _ints(ln, words[1:], 2, "graph header")
    if n < 1 or m < 0:
        raise FormatError("need n >= 1 and m >= 0", ln)
    edges = []
    for _ in range(m):
        ln, s = lines.next("edge line")
        if s.startswith("partition"):
            raise FormatError(f"only {len(edges)} of {m} edges listed", ln)
        u, v = _ints(ln, s.split(), 2, "edge")
        if u == v:
            raise FormatError(f"self-loop at vertex {u}", ln)
        if not (1 <= u <= n and 1 <= v <= n):
            raise FormatError(f"edge {u} {v} has an endpoint outside 1..{n}", ln)
        edges.append((u, v))
    partition = None
    if not lines.done():
        ln, s = lines.next("partition")
        if not s.startswith("partition:"):
            raise FormatError("expected 'partition: <vertices>' or end of file", ln)
        side1 = _ints(ln, s[len("partition:"):].split(), len(s[len("partition:"):].split()), "partition")
        bad = [v for v in side1 if not 1 <= v <= n]
        if bad:
            raise FormatError(f"partition vertex {bad[0]} outside 1..{n}", ln)
        partition = {v: (1 if v in side1 else 2) for v in range(1, n + 1)}
        if not lines.done():
            raise FormatError("trailing content", lines.peek()[0])
    return Graph.from_edges(n, edges, multigraph=multigraph), partition


def format_graph(g: Graph, partition: dict[int, int] | None = None) -> str:
    out = [f"graph {g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    if partition is not None:
        out.append("partition: " + " ".join(str(v) for v in sorted(partition) if partition[v] == 1))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- polycubes


def format_polycube(p: Polycube, ident: str = "p") -> str:
    if any(ch.isspace() for ch in ident) or not ident:
        raise ValueError(f"polycube id {ident!r} must be a nonempty word")
    buf = io.StringIO()
    buf.write(f"polycube {ident} {len(p)}\n")
    np.savetxt(buf, p.cells, fmt="%d", delimiter=" ")
    return buf.getvalue()


def _read_cells(lines: _Lines, count: int, what: str) -> np.ndarray:
    chunk = lines.take(count)
    if len(chunk) < count:
        raise FormatError(f"{what}: expected {count} cells, file ended after {len(chunk)}", lines.last_line() + 1)
    flat = " ".join(s for _, s in chunk).split()
    try:
        arr = np.array(flat, dtype=np.int64)
    except ValueError:
        for ln, s in chunk:
            _ints(ln, s.split(), 3, "cell")
        raise
    if arr.size != 3 * count:
        for ln, s in chunk:
            _ints(ln, s.split(), 3, "cell")
    return arr.reshape(count, 3)


def _read_polycube(lines: _Lines) -> tuple[str, Polycube, int]:
    ln, head = lines.next("polycube block")
    words = head.split()
    if len(words) != 3 or words[0] != "polycube":
        raise FormatError("expected 'polycube <id> <cell-count>'", ln)
    (count,) = _ints(ln, words[2:], 1, "cell count")
    if count < 1:
        raise FormatError("a polycube needs at least one cell", ln)
    cells = _read_cells(lines, count, f"polycube {words[1]}")
    if len(np.unique(cells, axis=0)) != count:
        raise FormatError(f"polycube {words[1]} lists a cell twice", ln)
    return words[1], Polycube(cells), ln


def parse_polycube(text: str) -> tuple[str, Polycube]:
    lines = _Lines.of(text)
    ident, p, _ = _read_polycube(lines)
    if not lines.done():
        raise FormatError("trailing content after polycube block", lines.peek()[0])
    return ident, p


def _read_box(lines: _Lines) -> Box:
    ln, s = lines.next("box line")
    words = s.split()
    if not words or words[0] != "box":
        raise FormatError("expected 'box nx ny nz'", ln)
    dims = _ints(ln, words[1:], 3, "box")
    if min(dims) < 1:
        raise FormatError("box extents must be positive", ln)
    return Box(*dims)


# ---------------------------------------------------------------- instances


@dataclass
class PackingInstance:
    box: Box
    pieces: list[tuple[str, Polycube, int | None]]
    preplaced: list[Polycube] = field(default_factory=list)
    allow_reflections: bool = False
    partisan: bool = False

    def state(self) -> PackState:
        occ = 0
        for p in self.preplaced:
            occ |= self.box.mask_of(p)
        return PackState.new(
            self.box,
            [p for _, p, _ in self.pieces],
            [o for _, _, o in self.pieces] if self.partisan else None,
            occupied=occ,
            allow_reflections=self.allow_reflections,
            labels=[lab for lab, _, _ in self.pieces],
        )


@dataclass
class NtrisInstance:
    box: Box
    sequence: list[tuple[str, Polycube]]
    plane_clearing: bool = False

    def state(self) -> TetrisState:
        return TetrisState(self.box, tuple(p for _, p in self.sequence), 0, 0, self.plane_clearing)


def format_packing_instance(inst: PackingInstance) -> str:
    b = inst.box
    out = [
        "packing-instance\n",
        f"box {b.nx} {b.ny} {b.nz}\n",
        f"reflections {'on' if inst.allow_reflections else 'off'}\n",
        f"partisan {'on' if inst.partisan else 'off'}\n",
    ]
    for p in inst.preplaced:
        out.append(format_polycube(p, "x").replace("polycube x", "pre-placed", 1))
    for lab, p, owner in inst.pieces:
        out.append(format_polycube(p, lab))
        if inst.partisan:
            out.append(f"owner P{owner}\n")
    return "".join(out)


def parse_packing_instance(text: str) -> PackingInstance:
    lines = _Lines.of(text)
    ln, s = lines.next("header")
    if s != "packing-instance":
        raise FormatError("expected 'packing-instance'", ln)
    box = _read_box(lines)
    refl = _on_off(*lines.next("reflections line"), "reflections")
    partisan = _on_off(*lines.next("partisan line"), "partisan")
    inst = PackingInstance(box, [], [], refl, partisan)
    while not lines.done():
        ln, s = lines.peek()
        words = s.split()
        if words[0] == "pre-placed":
            lines.next("pre-placed")
            (count,) = _ints(ln, words[1:], 1, "pre-placed count")
            cells = _read_cells(lines, count, "pre-placed block")
            inst.preplaced.append(Polycube(cells))
            continue
        ident, p, pln = _read_polycube(lines)
        owner = None
        nxt = lines.peek()
        if nxt is not None and nxt[1].split()[0] == "owner":
            oln, os_ = lines.next("owner")
            ow = os_.split()
            if len(ow) != 2 or ow[1] not in ("P1", "P2"):
                raise FormatError("expected 'owner P1|P2'", oln)
            owner = int(ow[1][1])
        if partisan and owner is None:
            raise FormatError(f"piece {ident} needs an owner line in a partisan instance", pln)
        inst.pieces.append((ident, p, owner))
    for p in inst.preplaced:
        if any(not box.contains(c) for c in (p.min_corner, p.max_corner)):
            raise FormatError("pre-placed cells outside the box")
    return inst


def format_ntris_instance(inst: NtrisInstance) -> str:
    b = inst.box
    out = ["ntris-instance\n", f"box {b.nx} {b.ny} {b.nz}\n", f"clearing {'on' if inst.plane_clearing else 'off'}\n"]
    cache: dict[int, str] = {}
    for lab, p in inst.sequence:
        key = id(p)
        if key not in cache:
            cache[key] = format_polycube(p, "@").split("\n", 1)[1]
        out.append(f"polycube {lab} {len(p)}\n")
        out.append(cache[key])
    return "".join(out)


def parse_ntris_instance(text: str) -> NtrisInstance:
    lines = _Lines.of(text)
    ln, s = lines.next("header")
    if s != "ntris-instance":
        raise FormatError("expected 'ntris-instance'", ln)
    box = _read_box(lines)
    clearing = _on_off(*lines.next("clearing line"), "clearing")
    seq = []
    while not lines.done():
        ident, p, _ = _read_polycube(lines)
        seq.append((ident, p))
    return NtrisInstance(box, seq, clearing)


def parse_instance(text: str) -> PackingInstance | NtrisInstance:
    first = _Lines.of(text).peek()
    if first is None:
        raise FormatError("empty instance file", 1)
    if first[1] == "packing-instance":
        return parse_packing_instance(text)
    if first[1] == "ntris-instance":
        return parse_ntris_instance(text)
    raise FormatError("expected 'packing-instance' or 'ntris-instance'", first[0])


def read_text(path: str | Path) -> str:
    return Path(path).read_text()


# ---------------------------------------------------------------- move scripts


def parse_move_script(text: str) -> list[tuple[int, int, int]]:
    """``drop <orientation-index> <dx> <dy>`` lines."""
    out = []
    for ln, s in _Lines.of(text).items:
        words = s.split()
        if words[0] != "drop":
            raise FormatError("expected 'drop <orientation> <dx> <dy>'", ln)
        out.append(tuple(_ints(ln, words[1:], 3, "drop")))
    return out


def format_move_script(moves: Iterable) -> str:
    return "".join(f"drop {m.orientation} {m.dx} {m.dy}\n" for m in moves)


# ---------------------------------------------------------------- rendering

GLYPHS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"


def _renderable(box: Box, items: Sequence[tuple[str, Polycube]]):
    lo = np.zeros(3, dtype=np.int64)
    hi = np.array(box.dims)
    keep, skipped = [], []
    for lab, p in items:
        if (p.cells.min(0) >= lo).all() and (p.cells.max(0) < hi).all():
            keep.append((lab, p))
        else:
            skipped.append(lab)
    return keep, skipped


def render_layers(box: Box, items: Sequence[tuple[str, Polycube]], preplaced: Iterable[Polycube] = ()) -> str:
    """One ASCII grid per ``z`` layer, rows printed from high ``y`` to low.

    ``#`` is pre-placed, letters are pieces in listed order, ``*`` marks cells
    claimed by more than one piece and ``.`` is empty.  Pieces not lying inside
    the box are listed as skipped.
    """
    keep, skipped = _renderable(box, items)
    code = np.zeros(box.dims, dtype=np.int32)  # 0 empty, -1 pre-placed, -2 overlap, k piece k
    for p in preplaced:
        code[tuple(p.cells.T)] = -1
    legend = []
    for k, (lab, p) in enumerate(keep, start=1):
        glyph = GLYPHS[(k - 1) % len(GLYPHS)]
        legend.append(f"{glyph}={lab}")
        idx = tuple(p.cells.T)
        cur = code[idx]
        code[idx] = np.where(cur == 0, k, -2)
    table = {0: ".", -1: "#", -2: "*"}
    out = [f"box {box.nx} {box.ny} {box.nz}"]
    if legend:
        out.append("legend " + " ".join(legend))
    if skipped:
        out.append("skipped " + " ".join(skipped))
    for z in range(box.nz):
        out.append(f"z = {z}")
        for y in range(box.ny - 1, -1, -1):
            out.append("".join(table.get(int(c), None) or GLYPHS[(int(c) - 1) % len(GLYPHS)] for c in code[:, y, z]))
    return "\n".join(out) + "\n"


# face corners for a unit cube at the origin, outward normal order -x +x -y +y -z +z
_FACES = {
    (0, -1): ((0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)),
    (0, 1): ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),
    (1, -1): ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),
    (1, 1): ((0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)),
    (2, -1): ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),
    (2, 1): ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
}


def _surface(p: Polycube) -> list[tuple[tuple[int, int, int], tuple]]:
    """``(cell, face corners)`` for every cell face not shared with another cell."""
    g = np.pad(p.grid, 1)
    lo = np.array(p.min_corner) - 1
    found = []
    for (axis, sign), corners in _FACES.items():
        nb = np.roll(g, -sign, axis=axis)
        cells = np.argwhere(g & ~nb)
        for c in cells.tolist():
            found.append((tuple(int(a) for a in np.array(c) + lo), corners, axis, sign))
    found.sort(key=lambda t: (t[0], t[2], t[3]))
    return [(c, corners) for c, corners, _, _ in found]


def render_mesh(box: Box, items: Sequence[tuple[str, Polycube]], preplaced: Iterable[Polycube] = ()) -> str:
    """Wavefront OBJ of each piece's outer surface, two triangles per exposed unit face."""
    keep, skipped = _renderable(box, items)
    groups = [("pre-placed", p) for p in preplaced] + keep
    out = ["# polycube surface mesh"]
    if skipped:
        out.append("# skipped " + " ".join(skipped))
    index: dict[tuple[int, int, int], int] = {}
    vert_lines: list[str] = []
    face_lines: list[str] = []
    for lab, p in groups:
        face_lines.append(f"g {lab}")
        for cell, corners in _surface(p):
            ids = []
            for dx, dy, dz in corners:
                v = (cell[0] + dx, cell[1] + dy, cell[2] + dz)
                if v not in index:
                    index[v] = len(index) + 1
                    vert_lines.append(f"v {v[0]} {v[1]} {v[2]}")
                ids.append(index[v])
            a, b, c, d = ids
            face_lines.append(f"f {a} {b} {c}")
            face_lines.append(f"f {a} {c} {d}")
    return "\n".join(out + vert_lines + face_lines) + "\n"
