"""Pure-Python implementations of the hot kernels.

These are the reference versions; the compiled module in ``_ckernels.pyx``
must agree with them exactly.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

BACKEND = "python"


def threshold_edges(dist: np.ndarray, scale: float) -> np.ndarray:
    """Index pairs ``i < j`` with ``dist[i, j] < scale``, lexicographically sorted."""
    n = dist.shape[0]
    out = []
    for i in range(n):
        row = dist[i]
        for j in range(i + 1, n):
            if row[j] < scale:
                out.append((i, j))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def triangles(n: int, edges: np.ndarray) -> np.ndarray:
    """All 3-cliques ``i < j < k`` of the graph, lexicographically sorted."""
    upper: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        upper[int(i)].append(int(j))
    upper_sets = [set(u) for u in upper]
    out = []
    for i in range(n):
        ui = upper[i]
        for a, j in enumerate(ui):
            uj = upper_sets[j]
            for k in ui[a + 1:]:
                if k in uj:
                    out.append((i, j, k))
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def free_reduce(word: Sequence[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in word:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def cyclic_reduce(word: Sequence[int]) -> tuple[int, ...]:
    w = free_reduce(word)
    lo, hi = 0, len(w)
    while hi - lo >= 2 and w[lo] == -w[hi - 1]:
        lo += 1
        hi -= 1
    return w[lo:hi]


def exponent_sums(word: Sequence[int], ngens: int) -> list[int]:
    row = [0] * ngens
    for x in word:
        if x > 0:
            row[x - 1] += 1
        else:
            row[-x - 1] -= 1
    return row
