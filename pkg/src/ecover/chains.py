"""Chains at a scale, single-point moves, and homotopy certificates.

A chain is a sequence of point indices whose consecutive entries are equal or
adjacent in the scale graph. A homotopy is a sequence of moves, each adding
or removing one interior point, with every intermediate sequence a chain.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .metric import ScaleGraph

CERT_SCHEMA = "ec-cert/1"

__all__ = [
    "Chain",
    "ChainError",
    "HomotopyCertificate",
    "HomotopyMove",
    "MoveKind",
    "NotFoundWithinBudget",
    "OracleBudgetExceeded",
    "OraclePartition",
    "apply_move",
    "load_certificate",
    "normalize",
    "oracle_classes",
    "search_homotopy",
    "verify_certificate",
]


class ChainError(ValueError):
    """An invalid chain, move or certificate step."""

    def __init__(self, message: str, step: int | None = None, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.step = step
        self.pair = pair


class MoveKind(str, enum.Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class HomotopyMove:
    """``ADD`` at ``i`` inserts ``point`` between positions ``i`` and ``i+1``;
    ``REMOVE`` at ``i`` deletes the interior entry at ``i``."""

    kind: MoveKind
    position: int
    point: int | None = None

    @classmethod
    def add(cls, position: int, point: int) -> "HomotopyMove":
        return cls(MoveKind.ADD, position, point)

    @classmethod
    def remove(cls, position: int) -> "HomotopyMove":
        return cls(MoveKind.REMOVE, position)

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "position": self.position}
        if self.kind is MoveKind.ADD:
            d["point"] = self.point
        return d


@dataclass(frozen=True)
class Chain:
    graph: ScaleGraph = field(repr=False, compare=False)
    vertices: tuple[int, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ChainError("a chain needs at least one point")
        n = self.graph.n
        for v in self.vertices:
            if not 0 <= v < n:
                raise ChainError(f"point {v} out of range")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not self.graph.adjacent(a, b):
                raise ChainError(f"{{{a},{b}}} is not an edge at scale {self.graph.scale:g}", pair=(a, b))

    @classmethod
    def of(cls, graph: ScaleGraph, vertices: Iterable[int]) -> "Chain":
        return cls(graph, tuple(int(v) for v in vertices))

    def __len__(self) -> int:
        """Number of steps (one less than the number of points)."""
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def reversed(self) -> "Chain":
        return Chain(self.graph, self.vertices[::-1])

    def __add__(self, other: "Chain") -> "Chain":
        if self.end != other.start:
            raise ChainError("chains do not meet")
        return Chain(self.graph, self.vertices + other.vertices[1:])


def _apply(graph: ScaleGraph, verts: tuple[int, ...], move: HomotopyMove) -> tuple[int, ...]:
    i = move.position
    if move.kind is MoveKind.ADD:
        if not 0 <= i < len(verts) - 1:
            raise ChainError(f"add position {i} outside 0..{len(verts) - 2}")
        p = move.point
        if p is None or not 0 <= p < graph.n:
            raise ChainError(f"add needs a valid point, got {p}")
        a, b = verts[i], verts[i + 1]
        for pair in ((a, p), (p, b)):
            if not graph.adjacent(*pair):
                raise ChainError(f"{{{pair[0]},{pair[1]}}} is not an edge", pair=pair)
        return verts[: i + 1] + (p,) + verts[i + 1:]
    if move.kind is MoveKind.REMOVE:
        if i == 0 or i == len(verts) - 1:
            raise ChainError(f"remove at {i} would move an endpoint")
        if not 0 < i < len(verts) - 1:
            raise ChainError(f"remove position {i} outside 1..{len(verts) - 2}")
        a, b = verts[i - 1], verts[i + 1]
        if not graph.adjacent(a, b):
            raise ChainError(f"{{{a},{b}}} is not an edge", pair=(a, b))
        return verts[:i] + verts[i + 1:]
    raise ChainError(f"unknown move kind {move.kind!r}")


def apply_move(chain: Chain, move: HomotopyMove) -> Chain:
    return Chain(chain.graph, _apply(chain.graph, chain.vertices, move))


@dataclass(frozen=True)
class HomotopyCertificate:
    start: Chain
    moves: tuple[HomotopyMove, ...] = ()

    def __len__(self) -> int:
        return len(self.moves)

    def reversed(self, end: Chain) -> "HomotopyCertificate":
        """Certificate from ``end`` back to ``start`` (Add and Remove swap)."""
        states = [self.start.vertices]
        for mv in self.moves:
            states.append(_apply(self.start.graph, states[-1], mv))
        back = []
        for k in range(len(self.moves) - 1, -1, -1):
            mv = self.moves[k]
            if mv.kind is MoveKind.ADD:
                back.append(HomotopyMove.remove(mv.position + 1))
            else:
                back.append(HomotopyMove.add(mv.position - 1, states[k][mv.position]))
        return HomotopyCertificate(end, tuple(back))

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": CERT_SCHEMA,
            "scale": self.start.graph.scale,
            "start": list(self.start.vertices),
            "moves": [m.to_json() for m in self.moves],
        }


def verify_certificate(cert: HomotopyCertificate) -> Chain:
    """Replay the moves; raises :class:`ChainError` with the 1-based failing step."""
    graph = cert.start.graph
    verts = cert.start.vertices
    for k, mv in enumerate(cert.moves, start=1):
        try:
            verts = _apply(graph, verts, mv)
        except ChainError as exc:
            raise ChainError(f"move {k}: {exc}", step=k, pair=exc.pair) from None
    return Chain(graph, verts)


def load_certificate(graph: ScaleGraph, source: str | Path | dict[str, Any]) -> HomotopyCertificate:
    doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    if doc.get("schema") != CERT_SCHEMA:
        raise ChainError(f"unsupported certificate schema {doc.get('schema')!r}")
    moves = []
    for m in doc["moves"]:
        kind = MoveKind(m["kind"])
        moves.append(HomotopyMove(kind, int(m["position"]), m.get("point")))
    return HomotopyCertificate(Chain.of(graph, doc["start"]), tuple(moves))


def normalize(chain: Chain) -> tuple[Chain, HomotopyCertificate]:
    """Drop repeated points and immediate backtracks ``x, y, x``.

    The two-point loop ``(x, x)`` has no interior point and is left alone.
    """
    graph = chain.graph
    verts = chain.vertices
    moves: list[HomotopyMove] = []
    i = 1
    while i < len(verts) - 1:
        a, x, b = verts[i - 1], verts[i], verts[i + 1]
        if x == a or x == b or a == b:
            mv = HomotopyMove.remove(i)
            verts = _apply(graph, verts, mv)
            moves.append(mv)
            i = max(1, i - 1)
        else:
            i += 1
    return Chain(graph, verts), HomotopyCertificate(chain, tuple(moves))


# --- brute-force oracle -------------------------------------------------------


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OraclePartition:
    """Homotopy classes of chains from the basepoint to ``endpoint``.

    ``classes`` lists each class as a sorted tuple of chains (vertex tuples),
    ordered by canonical representative (the lexicographically least chain).
    """

    endpoint: int
    maxlen: int
    classes: tuple[tuple[tuple[int, ...], ...], ...]
    stable: bool

    def __len__(self) -> int:
        return len(self.classes)

    def class_of(self, verts: Sequence[int]) -> int:
        t = tuple(verts)
        for k, cl in enumerate(self.classes):
            if t in cl:
                return k
        raise KeyError(t)


def _enumerate(graph: ScaleGraph, start: int, maxlen: int, budget: int) -> list[tuple[int, ...]]:
    """All chains from ``start`` with at most ``maxlen`` steps (repeats allowed)."""
    out = [(start,)]
    frontier = [(start,)]
    for _ in range(maxlen):
        nxt = []
        for c in frontier:
            last = c[-1]
            for v in (last,) + graph.neighbors[last]:
                nxt.append(c + (v,))
        out.extend(nxt)
        if len(out) > budget:
            raise OracleBudgetExceeded(f"more than {budget} chains up to length {maxlen}")
        frontier = nxt
    return out


def _neighbours(graph: ScaleGraph, verts: tuple[int, ...], cap: int):
    """Chains one move away, with at most ``cap`` steps."""
    n = len(verts)
    for i in range(1, n - 1):
        if graph.adjacent(verts[i - 1], verts[i + 1]):
            yield verts[:i] + verts[i + 1:]
    if n - 1 < cap:
        for i in range(n - 1):
            a, b = verts[i], verts[i + 1]
            for p in (a,) + graph.neighbors[a]:
                if graph.adjacent(p, b):
                    yield verts[: i + 1] + (p,) + verts[i + 1:]


def _partition(graph: ScaleGraph, endpoint: int, maxlen: int, budget: int, slack: int):
    base = graph.basepoint
    chains = _enumerate(graph, base, maxlen + slack, budget)
    index = {c: k for k, c in enumerate(chains)}
    parent = list(range(len(chains)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c, k in index.items():
        for d in _neighbours(graph, c, maxlen + slack):
            j = index[d]
            ra, rb = find(k), find(j)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    if endpoint == base and (base, base) in index:
        # the one-point loop and (base, base) are the same ordered set of points
        ra, rb = find(index[(base,)]), find(index[(base, base)])
        parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[tuple[int, ...]]] = {}
    for c, k in index.items():
        if c[-1] == endpoint and len(c) - 1 <= maxlen:
            groups.setdefault(find(k), []).append(c)
    classes = sorted((tuple(sorted(g)) for g in groups.values()), key=lambda cl: cl[0])
    return tuple(classes)


def oracle_classes(
    graph: ScaleGraph,
    endpoint: int,
    maxlen: int,
    budget: int = 10**6,
    slack: int = 1,
) -> OraclePartition:
    """Partition chains ``basepoint -> endpoint`` of length <= ``maxlen`` by homotopy.

    Moves may pass through chains up to ``maxlen + slack`` steps long. The
    result is ``stable`` when the partition it induces on chains of length
    <= ``maxlen - 1`` matches the one computed directly at ``maxlen - 1``.
    """
    classes = _partition(graph, endpoint, maxlen, budget, slack)
    stable = True
    if maxlen >= 1:
        coarse = _partition(graph, endpoint, maxlen - 1, budget, slack)
        restricted = []
        for cl in classes:
            short = tuple(c for c in cl if len(c) - 1 <= maxlen - 1)
            if short:
                restricted.append(short)
        stable = sorted(restricted) == sorted(coarse)
    return OraclePartition(endpoint, maxlen, classes, stable)


# --- search ---------------------------------------------------------------------


class NotFoundWithinBudget(Exception):
    """Search exhausted its budget. This is inconclusive, not a proof of inequivalence."""


def search_homotopy(a: Chain, b: Chain, budget: int = 200_000, extra_length: int = 2) -> HomotopyCertificate:
    """Breadth-first search for a certificate taking ``a`` to ``b``.

    Intermediate chains are capped at ``max(len(a), len(b)) + extra_length``
    steps; at most ``budget`` chains are visited.
    """
    if a.graph is not b.graph:
        raise ChainError("chains live on different scale graphs")
    if a.start != b.start or a.end != b.end:
        raise ChainError("chains must share both endpoints")
    graph = a.graph
    target = b.vertices
    if a.vertices == target:
        return HomotopyCertificate(a, ())
    if len(a) == 0 or len(b) == 0:
        # a one-point chain has no interior and no gap to add into
        raise ChainError("a one-point chain admits no moves; write it as (p, p)")
    cap = max(len(a), len(b)) + extra_length
    prev: dict[tuple[int, ...], tuple[tuple[int, ...], HomotopyMove] | None] = {a.vertices: None}
    queue = deque([a.vertices])
    while queue:
        cur = queue.popleft()
        n = len(cur)
        succ = []
        for i in range(1, n - 1):
            if graph.adjacent(cur[i - 1], cur[i + 1]):
                succ.append((cur[:i] + cur[i + 1:], HomotopyMove.remove(i)))
        if n - 1 < cap:
            for i in range(n - 1):
                x, y = cur[i], cur[i + 1]
                for p in (x,) + graph.neighbors[x]:
                    if graph.adjacent(p, y):
                        succ.append((cur[: i + 1] + (p,) + cur[i + 1:], HomotopyMove.add(i, p)))
        for nxt, mv in succ:
            if nxt in prev:
                continue
            prev[nxt] = (cur, mv)
            if nxt == target:
                moves = []
                node = nxt
                while prev[node] is not None:
                    node, m = prev[node]
                    moves.append(m)
                return HomotopyCertificate(a, tuple(reversed(moves)))
            if len(prev) >= budget:
                raise NotFoundWithinBudget(f"no homotopy within {budget} chains")
            queue.append(nxt)
    raise NotFoundWithinBudget(f"search space exhausted at length cap {cap}")
