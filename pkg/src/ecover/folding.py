"""Stallings folding for finitely generated subgroups of free groups."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from ._kernels import free_reduce
from .groups import Word

__all__ = [
    "FoldedSubgroupGraph",
    "InjectivityProbe",
    "fold",
    "image_words",
    "member",
    "probe_injectivity",
    "surjective",
]


def _label_key(x: int) -> tuple[int, int]:
    return (abs(x), 0 if x > 0 else 1)


@dataclass(frozen=True)
class FoldedSubgroupGraph:
    """Core graph of a subgroup; state 0 is the base.

    ``transitions`` holds both orientations of every edge, so it is closed
    under inverse labels.
    """

    nstates: int
    transitions: dict[tuple[int, int], int]
    ambient_rank: int

    @property
    def nedges(self) -> int:
        return len(self.transitions) // 2

    @property
    def rank(self) -> int:
        return self.nedges - self.nstates + 1

    def signature(self) -> tuple:
        return (self.nstates, tuple(sorted(self.transitions.items())))

    def to_dot(self) -> str:
        lines = ["digraph folded {", "  0 [shape=doublecircle];"]
        for s in range(1, self.nstates):
            lines.append(f"  {s};")
        for (s, x), t in sorted(self.transitions.items()):
            if x > 0:
                lines.append(f'  {s} -> {t} [label="g{x}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def fold(words: Iterable[Sequence[int]], ambient_rank: int) -> FoldedSubgroupGraph:
    """Fold the bouquet of ``words`` into the core graph of the subgroup they generate."""
    parent: list[int] = [0]
    out: list[dict[int, int]] = [{}]

    def find(s: int) -> int:
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    def new_state() -> int:
        parent.append(len(parent))
        out.append({})
        return len(parent) - 1

    pending: deque[tuple[int, int]] = deque()

    def connect(s: int, x: int, t: int) -> None:
        s, t = find(s), find(t)
        for a, lab, b in ((s, x, t), (t, -x, s)):
            cur = out[a].get(lab)
            if cur is None:
                out[a][lab] = b
            elif find(cur) != find(b):
                pending.append((cur, b))

    def merge_all() -> None:
        while pending:
            a, b = pending.popleft()
            a, b = find(a), find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            parent[b] = a
            moved = out[b]
            out[b] = {}
            for lab, tgt in moved.items():
                cur = out[a].get(lab)
                if cur is None:
                    out[a][lab] = tgt
                elif find(cur) != find(tgt):
                    pending.append((cur, tgt))

    for w in words:
        w = free_reduce(w)
        for x in w:
            if x == 0 or abs(x) > ambient_rank:
                raise ValueError(f"letter {x} outside free group of rank {ambient_rank}")
        if not w:
            continue
        s = 0
        for k, x in enumerate(w):
            t = 0 if k == len(w) - 1 else new_state()
            connect(s, x, t)
            merge_all()
            s = t

    # resolve to representatives
    edges: dict[tuple[int, int], int] = {}
    states = {find(s) for s in range(len(parent))}
    for s in states:
        for lab, t in out[s].items():
            edges[(s, lab)] = find(t)
    # prune hanging trees, keeping the base
    while True:
        deg = {s: 0 for s in states}
        for (s, _lab) in edges:
            deg[s] += 1
        leaves = [s for s, d in deg.items() if d <= 1 and s != find(0)]
        if not leaves:
            break
        dead = set(leaves)
        states -= dead
        edges = {k: t for k, t in edges.items() if k[0] not in dead and t not in dead}
    # canonical numbering: BFS from base, labels in order 1,-1,2,-2,...
    base = find(0)
    number = {base: 0}
    queue = deque([base])
    adj: dict[int, list[tuple[int, int]]] = {s: [] for s in states}
    for (s, lab), t in edges.items():
        adj[s].append((lab, t))
    while queue:
        s = queue.popleft()
        for lab, t in sorted(adj[s], key=lambda e: _label_key(e[0])):
            if t not in number:
                number[t] = len(number)
                queue.append(t)
    trans = {(number[s], lab): number[t] for (s, lab), t in edges.items()}
    return FoldedSubgroupGraph(len(number), dict(sorted(trans.items())), ambient_rank)


def member(graph: FoldedSubgroupGraph, word: Sequence[int]) -> bool:
    s = 0
    for x in free_reduce(word):
        t = graph.transitions.get((s, x))
        if t is None:
            return False
        s = t
    return s == 0


def surjective(graph: FoldedSubgroupGraph, ambient_rank: int | None = None) -> bool:
    r = graph.ambient_rank if ambient_rank is None else ambient_rank
    return all(member(graph, (g,)) for g in range(1, r + 1))


def image_words(images: Sequence[Sequence[int]], word: Sequence[int]) -> Word:
    """Apply the homomorphism sending generator ``k`` to ``images[k-1]``."""
    out: list[int] = []
    for x in word:
        w = images[abs(x) - 1]
        out.extend(w if x > 0 else [-y for y in reversed(w)])
    return free_reduce(out)


@dataclass(frozen=True)
class InjectivityProbe:
    """``witness`` is a nontrivial kernel word, or ``None`` if none has length <= ``bound``."""

    witness: Word | None
    bound: int
    budget_hit: bool = False

    @property
    def found(self) -> bool:
        return self.witness is not None


def probe_injectivity(
    images: Sequence[Sequence[int]],
    max_word_length: int,
    budget: int = 2_000_000,
) -> InjectivityProbe:
    """Search reduced words by increasing length for one mapping to the identity."""
    rank = len(images)
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    frontier: list[Word] = [()]
    visited = 0
    for length in range(1, max_word_length + 1):
        nxt = []
        for w, x in product(frontier, letters):
            if w and w[-1] == -x:
                continue
            nxt.append(w + (x,))
        if visited + len(nxt) > budget:
            return InjectivityProbe(None, length - 1, budget_hit=True)
        for w in nxt:
            if not image_words(images, w):
                return InjectivityProbe(w, length)
        visited += len(nxt)
        frontier = nxt
    return InjectivityProbe(None, max_word_length)
