"""Presentations of the deck group at a single scale.

The group of chain-homotopy classes of loops at the basepoint is the edge-path
group of the scale graph with its triangles filled in: generators are the
edges off a breadth-first spanning tree, relators are triangle boundaries.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._kernels import free_reduce
from .chains import Chain, ChainError
from .groups import FPGroup, Word
from .metric import ScaleGraph, chain_connected

log = logging.getLogger(__name__)

__all__ = [
    "ChainClass",
    "DensityError",
    "MeshTooCoarse",
    "PresentationAtScale",
    "chain_class",
    "loop_class",
    "minimal_generators",
    "presentation",
    "tree_path",
]


@dataclass(frozen=True)
class ChainClass:
    """A point of the cover: the endpoint plus the loop part as a reduced word."""

    endpoint: int
    word: Word

    def label(self) -> str:
        return f"{self.endpoint}:{' '.join(map(str, self.word))}" if self.word else f"{self.endpoint}:"


@dataclass(frozen=True, eq=False)
class PresentationAtScale:
    graph: ScaleGraph
    parent: tuple[int, ...]
    depth: tuple[int, ...]
    generators: tuple[tuple[int, int], ...]
    relators: tuple[Word, ...]
    component: frozenset[int] = field(repr=False)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    @property
    def basepoint(self) -> int:
        return self.graph.basepoint

    @cached_property
    def _gen_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.generators)}

    @cached_property
    def group(self) -> FPGroup:
        return FPGroup(self.ngens, tuple(r for r in self.relators if r))

    def letter(self, u: int, v: int) -> int:
        """Signed generator for the step ``u -> v`` (0 for tree steps and repeats)."""
        if u == v:
            return 0
        key = (u, v) if u < v else (v, u)
        k = self._gen_index.get(key)
        if k is None:
            return 0
        return k + 1 if u < v else -(k + 1)

    def rank_upper(self) -> int:
        """Generators minus relators: a crude upper bound on the rank, floored at 0."""
        return max(self.ngens - len(self.relators), 0)


def presentation(graph: ScaleGraph) -> PresentationAtScale:
    n = graph.n
    base = graph.basepoint
    parent = [-1] * n
    depth = [-1] * n
    depth[base] = 0
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for v in graph.neighbors[u]:
            if depth[v] == -1:
                depth[v] = depth[u] + 1
                parent[v] = u
                queue.append(v)
    comp = frozenset(i for i in range(n) if depth[i] >= 0)
    conn = chain_connected(graph)
    if not conn.connected:
        log.warning(
            "scale %g: %d components; only the basepoint's component (%d points) is used",
            graph.scale,
            conn.n_components,
            len(comp),
        )
    edges = np.asarray(graph.edges, dtype=np.int64).reshape(-1, 2)
    par = np.asarray(parent, dtype=np.int64)
    in_comp = np.asarray(depth, dtype=np.int64) >= 0
    a, b = edges[:, 0], edges[:, 1]
    is_gen = in_comp[a] & (par[b] != a) & (par[a] != b)
    gid = np.zeros(len(edges), dtype=np.int64)
    gid[is_gen] = np.arange(1, int(is_gen.sum()) + 1)
    gens = [(int(u), int(v)) for u, v in edges[is_gen]]

    tris = np.asarray(graph.triangles, dtype=np.int64).reshape(-1, 3)
    tris = tris[in_comp[tris[:, 0]]]
    # edges are sorted by a * n + b, so each triangle side is found by bisection
    keys = a * n + b

    def side(u, v):
        return gid[np.searchsorted(keys, u * n + v)]

    # boundary a -> b -> c -> a with a < b < c: the last step runs against the edge
    letters = np.column_stack([side(tris[:, 0], tris[:, 1]), side(tris[:, 1], tris[:, 2]), -side(tris[:, 0], tris[:, 2])])
    # three distinct edges, so no free cancellation is possible
    rels = [tuple(x for x in row if x) for row in letters.tolist()]
    return PresentationAtScale(graph, tuple(parent), tuple(depth), tuple(gens), tuple(rels), comp)


def tree_path(pres: PresentationAtScale, v: int) -> tuple[int, ...]:
    """Tree path from the basepoint to ``v``."""
    if v not in pres.component:
        raise ChainError(f"point {v} is not chain connected to the basepoint")
    path = [v]
    while pres.parent[path[-1]] != -1:
        path.append(pres.parent[path[-1]])
    return tuple(reversed(path))


def _trace(pres: PresentationAtScale, verts: Sequence[int]) -> Word:
    return free_reduce([x for x in (pres.letter(u, v) for u, v in zip(verts, verts[1:])) if x])


def chain_class(pres: PresentationAtScale, chain: Chain | Sequence[int]) -> ChainClass:
    verts = chain.vertices if isinstance(chain, Chain) else tuple(int(v) for v in chain)
    if not verts or verts[0] != pres.basepoint:
        raise ChainError(f"chain must start at the basepoint {pres.basepoint}")
    if not isinstance(chain, Chain):
        Chain(pres.graph, verts)  # validates adjacency
    return ChainClass(verts[-1], _trace(pres, verts))


class MeshTooCoarse(ChainError):
    pass


def loop_class(pres: PresentationAtScale, samples: Sequence[int]) -> ChainClass:
    """Class of a sampled loop; consecutive samples must be within the scale."""
    samples = tuple(int(s) for s in samples)
    if not samples or samples[0] != pres.basepoint or samples[-1] != pres.basepoint:
        raise ChainError("a sampled loop must start and end at the basepoint")
    for u, v in zip(samples, samples[1:]):
        if not pres.graph.adjacent(u, v):
            raise MeshTooCoarse(
                f"samples {u} and {v} are {pres.graph.space.dist[u, v]:.6g} apart, not within {pres.graph.scale:g}",
                pair=(u, v),
            )
    return ChainClass(pres.basepoint, _trace(pres, samples))


class DensityError(ValueError):
    def __init__(self, message: str, witness: int):
        super().__init__(message)
        self.witness = witness


def minimal_generators(
    graph: ScaleGraph,
    dense_set: Iterable[int],
    fine_scale_check: ScaleGraph,
    pres: PresentationAtScale | None = None,
) -> tuple[Word, ...]:
    """Words of finitely many minimal loops through a dense subset.

    Each loop runs out from the basepoint along distinct dense points, around
    a cycle of distinct dense points, and back the same way. Here the cycles
    are the fundamental cycles of the scale graph restricted to the dense set;
    these are minimal loops and together they generate the group when the
    dense set is dense at a scale whose three-step chains stay within
    ``graph``'s scale.
    """
    dense = sorted(set(int(a) for a in dense_set))
    base = graph.basepoint
    if base not in dense:
        raise DensityError("the basepoint must belong to the dense set", base)
    if 3 * fine_scale_check.scale > graph.scale * (1 + 1e-12):
        raise ValueError("fine scale must be at most a third of the coarse scale")
    dist = graph.space.dist
    near = dist[:, dense].min(axis=1)
    far = [i for i in range(graph.n) if not near[i] < fine_scale_check.scale]
    if far:
        raise DensityError(f"point {far[0]} is not within {fine_scale_check.scale:g} of the dense set", far[0])
    if pres is None:
        pres = presentation(graph)
    members = set(dense)
    parent = {base: -1}
    order = deque([base])
    while order:
        u = order.popleft()
        for v in graph.neighbors[u]:
            if v in members and v not in parent:
                parent[v] = u
                order.append(v)

    def path_to(v: int) -> list[int]:
        p = [v]
        while parent[p[-1]] != -1:
            p.append(parent[p[-1]])
        return p[::-1]

    words = []
    for a, b in graph.edges:
        a, b = int(a), int(b)
        if a not in parent or b not in parent or parent[b] == a or parent[a] == b:
            continue
        loop = path_to(a) + path_to(b)[::-1]
        _check_minimal(loop)
        words.append(chain_class(pres, loop).word)
    return tuple(words)


def _check_minimal(loop: list[int]) -> None:
    """Assert the lasso shape: distinct tail, distinct cycle, tail reversed."""
    m = len(loop)
    k = 0
    while k + 1 < m - 1 - k and loop[k + 1] == loop[m - 2 - k]:
        k += 1
    tail = loop[: k + 1]
    cycle = loop[k: m - k]
    inner = cycle[:-1]
    assert len(set(tail)) == len(tail), loop
    assert len(set(inner)) == len(inner), loop
    assert not set(tail[:-1]) & set(inner), loop
