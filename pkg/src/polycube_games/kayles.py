"""Node Kayles and Bigraph Node Kayles.

Players alternately mark vertices; a marked vertex may not neighbor another
marked vertex and the first player unable to mark loses.  In the bigraph
(partisan) variant each player marks only vertices of their own side.
Vertices are numbered ``1..n``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = [
    "Graph",
    "KaylesPosition",
    "KaylesSolver",
    "Outcome",
    "apply_move",
    "legal_moves",
    "solve",
    "solve_naive",
]


class Outcome(enum.Enum):
    MOVER_WINS = "mover-wins"
    MOVER_LOSES = "mover-loses"

    def __bool__(self) -> bool:
        return self is Outcome.MOVER_WINS

    def flipped(self) -> "Outcome":
        return Outcome.MOVER_LOSES if self is Outcome.MOVER_WINS else Outcome.MOVER_WINS

    @classmethod
    def of(cls, mover_wins: bool) -> "Outcome":
        return cls.MOVER_WINS if mover_wins else cls.MOVER_LOSES


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices ``1..n``.

    ``edges`` keeps the listed order (it fixes the wiring rows of the packing
    reduction).  Duplicates are collapsed unless the graph was built with
    ``multigraph=True``; adjacency ignores multiplicity either way.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]], multigraph: bool = False) -> "Graph":
        out: list[tuple[int, int]] = []
        seen = set()
        for e in edges:
            u, v = (int(a) for a in e)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge {u}-{v} has an endpoint outside 1..{n}")
            pair = (min(u, v), max(u, v))
            if pair in seen and not multigraph:
                warnings.warn(f"duplicate edge {pair[0]}-{pair[1]} collapsed", stacklevel=2)
                continue
            seen.add(pair)
            out.append(pair)
        return cls(n, tuple(out))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adjacency[v]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self._adjacency[u]

    def simple_edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def incident_edges(self, v: int) -> list[int]:
        """1-based indices of the listed edges touching ``v``."""
        return [j for j, e in enumerate(self.edges, start=1) if v in e]

    @property
    def _adjacency(self) -> dict[int, frozenset[int]]:
        adj = self.__dict__.get("_adj")
        if adj is None:
            tmp: dict[int, set[int]] = {v: set() for v in self.vertices}
            for u, v in self.edges:
                tmp[u].add(v)
                tmp[v].add(u)
            adj = {v: frozenset(s) for v, s in tmp.items()}
            object.__setattr__(self, "_adj", adj)
        return adj

    def is_independent(self, vs: Iterable[int]) -> bool:
        vs = set(vs)
        return all(not (self.neighbors(v) & vs) for v in vs)


PLAYERS = (1, 2)


@dataclass(frozen=True)
class KaylesPosition:
    graph: Graph
    available: frozenset[int]
    partition: Mapping[int, int] | None = None
    mover: int = 1

    @classmethod
    def initial(cls, graph: Graph, partition: Mapping[int, int] | None = None) -> "KaylesPosition":
        if partition is not None:
            partition = dict(partition)
            if set(partition) != set(graph.vertices) or set(partition.values()) - {1, 2}:
                raise ValueError("partition must map every vertex to side 1 or 2")
            for side in PLAYERS:
                if not graph.is_independent(v for v, s in partition.items() if s == side):
                    raise ValueError(f"side {side} of the partition is not independent")
        return cls(graph, frozenset(graph.vertices), partition, 1)

    @property
    def partisan(self) -> bool:
        return self.partition is not None

    def __hash__(self) -> int:
        return hash((self.available, self.mover))


def legal_moves(pos: KaylesPosition) -> frozenset[int]:
    if pos.partition is None:
        return pos.available
    return frozenset(v for v in pos.available if pos.partition[v] == pos.mover)


def apply_move(pos: KaylesPosition, v: int) -> KaylesPosition:
    if v not in legal_moves(pos):
        raise ValueError(f"vertex {v} is not a legal move")
    avail = pos.available - {v} - pos.graph.neighbors(v)
    return KaylesPosition(pos.graph, avail, pos.partition, 3 - pos.mover)


def solve_naive(pos: KaylesPosition) -> Outcome:
    """Plain exhaustive recursion, no memo."""
    for v in sorted(legal_moves(pos)):
        if solve_naive(apply_move(pos, v)) is Outcome.MOVER_LOSES:
            return Outcome.MOVER_WINS
    return Outcome.MOVER_LOSES


class KaylesSolver:
    """Memoized perfect-play solver.

    Positions are keyed by the available set as a bit mask, plus the mover in
    the partisan game.
    """

    def __init__(self, graph: Graph, partition: Mapping[int, int] | None = None):
        self.graph = graph
        self.partition = dict(partition) if partition is not None else None
        self.table: dict = {}
        self.nodes = 0
        self._nbr = [0] * (graph.n + 1)
        for v in graph.vertices:
            self._nbr[v] = sum(1 << u for u in graph.neighbors(v)) | (1 << v)
        self._side = {}
        if self.partition:
            for side in PLAYERS:
                self._side[side] = sum(1 << v for v, s in self.partition.items() if s == side)

    def _key(self, avail: int, mover: int):
        return (avail, mover) if self.partition else avail

    def _wins(self, avail: int, mover: int) -> bool:
        key = self._key(avail, mover)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        moves = avail & self._side[mover] if self.partition else avail
        result = False
        while moves:
            low = moves & -moves
            v = low.bit_length() - 1
            moves ^= low
            if not self._wins(avail & ~self._nbr[v], 3 - mover):
                result = True
                break
        self.table[key] = result
        return result

    @staticmethod
    def _mask(vs: Iterable[int]) -> int:
        return sum(1 << v for v in vs)

    def solve(self, pos: KaylesPosition) -> Outcome:
        return Outcome.of(self._wins(self._mask(pos.available), pos.mover))

    def best_move(self, pos: KaylesPosition) -> int | None:
        """Smallest winning vertex if the mover wins, else smallest legal vertex."""
        moves = sorted(legal_moves(pos))
        for v in moves:
            if self.solve(apply_move(pos, v)) is Outcome.MOVER_LOSES:
                return v
        return moves[0] if moves else None

    def principal_variation(self, pos: KaylesPosition) -> list[int]:
        pv = []
        while True:
            v = self.best_move(pos)
            if v is None:
                return pv
            pv.append(v)
            pos = apply_move(pos, v)


def solve(pos: KaylesPosition) -> Outcome:
    return KaylesSolver(pos.graph, pos.partition).solve(pos)
