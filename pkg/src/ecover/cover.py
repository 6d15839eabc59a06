"""Truncated covers at a scale and the deck-group action on them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Sequence

from ._kernels import free_reduce
from .groups import Simplification, UncertifiedError, Word, homology_basis, invert
from .presentation import PresentationAtScale

__all__ = [
    "DiscretenessReport",
    "OUTSIDE",
    "TruncatedCover",
    "Vertex",
    "build_cover",
    "check_discreteness",
    "check_fiber_orbits",
    "check_local_injectivity",
    "deck_act",
    "reduced_words",
]

#: Cover vertex: (endpoint, reduced word in the free basis) or, in abelian
#: mode, (endpoint, exponent vector).
Vertex = tuple[int, tuple[int, ...]]


class _Outside:
    def __repr__(self) -> str:
        return "OutsideTruncation"


OUTSIDE = _Outside()


@dataclass(frozen=True, eq=False)
class TruncatedCover:
    pres: PresentationAtScale
    radius: int
    mode: str
    vertices: tuple[Vertex, ...]
    edges: frozenset[frozenset[Vertex]] = field(repr=False)
    index: dict[Vertex, int] = field(repr=False)
    deck_rank: int
    max_word_length: int

    @property
    def scale(self) -> float:
        return self.pres.graph.scale

    @property
    def base(self) -> Vertex:
        return (self.pres.basepoint, self._identity())

    def _identity(self) -> tuple[int, ...]:
        return () if self.mode == "free" else (0,) * self.deck_rank

    def __contains__(self, v: Vertex) -> bool:
        return v in self.index

    def multiply(self, word: Sequence[int], element: tuple[int, ...]) -> tuple[int, ...]:
        """Left-multiply a vertex's group part by a free-basis word."""
        if self.mode == "free":
            return free_reduce(tuple(word) + tuple(element))
        vec = list(element)
        for x in word:
            vec[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(vec)

    def to_dot(self) -> str:
        def lab(v: Vertex) -> str:
            p, w = v
            return f"{p}:{' '.join(map(str, w))}"

        lines = ["graph cover {"]
        for k, v in enumerate(self.vertices):
            extra = ", shape=doublecircle" if k == 0 else ""
            lines.append(f'  {k} [label="{lab(v)}"{extra}];')
        pairs = sorted(tuple(sorted(self.index[v] for v in e)) for e in self.edges)
        for a, b in pairs:
            lines.append(f"  {a} -- {b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def write_dot(self, path: str | Path) -> None:
        Path(path).write_text(self.to_dot())


def build_cover(
    pres: PresentationAtScale,
    simplification: Simplification,
    radius: int,
    mode: str = "free",
) -> TruncatedCover:
    """Breadth-first truncation of the cover to ``radius`` steps from the base.

    ``mode="free"`` needs a certified-free simplification and identifies
    vertices exactly. ``mode="abelian"`` identifies vertices by endpoint and
    free-part homology coordinates, an approximation of the true cover.
    """
    if mode == "free":
        if not simplification.flag.is_free:
            raise UncertifiedError(
                "cover vertices need a solvable word problem; this scale is not certified free "
                "(use mode='abelian' for the abelianized cover)"
            )
        rank = simplification.group.ngens

        def step(elem, u, v):
            x = pres.letter(u, v)
            if not x:
                return elem
            return free_reduce(elem + simplification.rewrite((x,)))

        start: tuple[int, ...] = ()
    elif mode == "abelian":
        basis = homology_basis(simplification)
        rank = basis.invariants.betti
        cols = [tuple(p[g] for p in basis.projection) for g in range(pres.ngens)]

        def step(elem, u, v):
            x = pres.letter(u, v)
            if not x:
                return elem
            c = cols[abs(x) - 1]
            s = 1 if x > 0 else -1
            return tuple(a + s * b for a, b in zip(elem, c))

        start = (0,) * rank
    else:
        raise ValueError(f"unknown cover mode {mode!r}")

    graph = pres.graph
    base = (graph.basepoint, start)
    dist = {base: 0}
    order = [base]
    queue = deque([base])
    edges = set()
    while queue:
        v = queue.popleft()
        d = dist[v]
        p, elem = v
        for q in graph.neighbors[p]:
            w = (q, step(elem, p, q))
            if w not in dist:
                if d == radius:
                    continue
                dist[w] = d + 1
                order.append(w)
                queue.append(w)
            edges.add(frozenset((v, w)))
    index = {v: k for k, v in enumerate(order)}
    maxlen = max((len(e) if mode == "free" else sum(map(abs, e))) for _, e in order)
    return TruncatedCover(pres, radius, mode, tuple(order), frozenset(edges), index, rank, maxlen)


def deck_act(cover: TruncatedCover, word: Sequence[int], vertex: Vertex):
    """Image of ``vertex`` under the deck transformation of ``word``, or ``OUTSIDE``."""
    if vertex not in cover:
        raise KeyError(f"{vertex} is not in the truncation")
    p, elem = vertex
    img = (p, cover.multiply(word, elem))
    return img if img in cover else OUTSIDE


def reduced_words(rank: int, max_length: int) -> list[Word]:
    """All nonempty reduced words of length <= ``max_length`` over ``rank`` generators."""
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    out: list[Word] = []
    frontier: list[Word] = [()]
    for _ in range(max_length):
        frontier = [w + (x,) for w, x in product(frontier, letters) if not (w and w[-1] == -x)]
        out.extend(frontier)
    return out


@dataclass
class DiscretenessReport:
    words_checked: int = 0
    pairs_checked: int = 0
    violations: list[tuple[str, Word, Vertex, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_discreteness(
    cover: TruncatedCover,
    words_up_to: int,
    act: Callable[[TruncatedCover, Sequence[int], Vertex], object] = deck_act,
) -> DiscretenessReport:
    """Free action, no deck translate adjacent to its source, fibers preserved."""
    report = DiscretenessReport()
    if cover.mode != "free":
        raise ValueError("discreteness is checked on exact (free-mode) covers")
    words = reduced_words(cover.deck_rank, words_up_to)
    report.words_checked = len(words)
    for w in words:
        for v in cover.vertices:
            img = act(cover, w, v)
            if img is OUTSIDE:
                continue
            report.pairs_checked += 1
            if img == v:
                report.violations.append(("fixed point", w, v, img))
            elif frozenset((v, img)) in cover.edges:
                report.violations.append(("adjacent translate", w, v, img))
            if img[0] != v[0]:
                report.violations.append(("fiber moved", w, v, img))
    return report


def check_fiber_orbits(cover: TruncatedCover, bound: int | None = None) -> list[tuple[Vertex, Vertex]]:
    """Pairs of vertices over one point not related by a deck word of length <= ``bound``."""
    fibers: dict[int, list[Vertex]] = {}
    for v in cover.vertices:
        fibers.setdefault(v[0], []).append(v)
    bad = []
    for vs in fibers.values():
        for v, w in product(vs, vs):
            u = free_reduce(w[1] + invert(v[1]))
            if (bound is not None and len(u) > bound) or deck_act(cover, u, v) != w:
                bad.append((v, w))
    return bad


def check_local_injectivity(cover: TruncatedCover) -> list[tuple[Vertex, Vertex, Vertex]]:
    """Distinct neighbours of one cover vertex must lie over distinct points."""
    nbrs: dict[Vertex, list[Vertex]] = {v: [] for v in cover.vertices}
    for e in cover.edges:
        a, b = tuple(e)
        nbrs[a].append(b)
        nbrs[b].append(a)
    bad = []
    for v, ns in nbrs.items():
        seen: dict[int, Vertex] = {}
        for w in ns:
            if w[0] in seen and seen[w[0]] != w:
                bad.append((v, seen[w[0]], w))
            seen[w[0]] = w
    return bad
