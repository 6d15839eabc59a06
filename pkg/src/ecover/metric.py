"""Finite pseudometric spaces and their scale graphs.

A scale graph at ``eps`` joins two distinct points when their distance is
strictly less than ``eps`` (open balls). Triangles of that graph are the
carriers of the elementary chain moves.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels

SPACE_SCHEMA = "ec-space/1"

#: Slack used when checking the triangle inequality on declared metrics.
TRIANGLE_TOL = 1e-9


class SpaceValidationError(ValueError):
    """Raised when an input space is malformed; ``indices`` names the culprit."""

    def __init__(self, message: str, indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.indices = indices


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Points with a symmetric (pseudo)metric and a basepoint."""

    dist: np.ndarray
    basepoint: int = 0
    coords: np.ndarray | None = None
    labels: tuple[str, ...] | None = None
    kind: str = "metric"

    def __post_init__(self):
        self.dist.setflags(write=False)
        if self.coords is not None:
            self.coords.setflags(write=False)

    def __len__(self) -> int:
        return self.dist.shape[0]

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    @cached_property
    def min_spacing(self) -> float:
        """Smallest positive pairwise distance (``inf`` if there is none)."""
        pos = self.dist[self.dist > 0]
        return float(pos.min()) if pos.size else float("inf")

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"schema": SPACE_SCHEMA}
        if self.coords is not None:
            doc["metric"] = "euclidean"
            doc["points"] = [[float(c) for c in row] for row in self.coords]
        else:
            doc["metric"] = "matrix"
            doc["matrix"] = [[float(d) for d in row] for row in self.dist]
            doc["kind"] = self.kind
        doc["basepoint"] = int(self.basepoint)
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        return doc


def euclidean_space(points: Any, basepoint: int = 0, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    coords = np.asarray(points, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    if coords.shape[0] == 0:
        raise SpaceValidationError("space has no points")
    if not np.all(np.isfinite(coords)):
        raise SpaceValidationError("non-finite coordinate")
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    _check_basepoint(basepoint, coords.shape[0])
    return FiniteMetricSpace(
        dist=np.ascontiguousarray(dist),
        basepoint=int(basepoint),
        coords=coords,
        labels=_check_labels(labels, coords.shape[0]),
    )


def matrix_space(
    matrix: Any,
    basepoint: int = 0,
    labels: Sequence[str] | None = None,
    kind: str = "metric",
) -> FiniteMetricSpace:
    """Validate a full distance matrix.

    ``kind="metric"`` additionally enforces the triangle inequality;
    ``kind="pseudometric"`` skips that check.
    """
    dist = np.asarray(matrix, dtype=float)
    if dist.size == 0:
        raise SpaceValidationError("space has no points")
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise SpaceValidationError(f"distance matrix must be square, got shape {dist.shape}")
    n = dist.shape[0]
    if kind not in ("metric", "pseudometric"):
        raise SpaceValidationError(f"unknown kind {kind!r}")
    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise SpaceValidationError(f"non-finite distance at ({i},{j})", (int(i), int(j)))
    bad = np.argwhere(dist != dist.T)
    if bad.size:
        i, j = sorted(bad[0])
        raise SpaceValidationError(f"asymmetric at ({i},{j})", (int(i), int(j)))
    bad = np.argwhere(dist < 0)
    if bad.size:
        i, j = bad[0]
        raise SpaceValidationError(f"negative distance at ({i},{j})", (int(i), int(j)))
    diag = np.flatnonzero(np.diag(dist) != 0)
    if diag.size:
        i = int(diag[0])
        raise SpaceValidationError(f"nonzero self-distance at ({i},{i})", (i, i))
    if kind == "metric":
        for k in range(n):
            via = dist[:, k][:, None] + dist[k, :][None, :]
            viol = np.argwhere(dist > via + TRIANGLE_TOL)
            if viol.size:
                i, j = viol[0]
                raise SpaceValidationError(
                    f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})",
                    (int(i), int(j), int(k)),
                )
    _check_basepoint(basepoint, n)
    return FiniteMetricSpace(
        dist=np.ascontiguousarray(dist),
        basepoint=int(basepoint),
        labels=_check_labels(labels, n),
        kind=kind,
    )


def _check_basepoint(basepoint: Any, n: int) -> None:
    if basepoint is None:
        raise SpaceValidationError("missing basepoint")
    if not isinstance(basepoint, (int, np.integer)) or not 0 <= basepoint < n:
        raise SpaceValidationError(f"basepoint {basepoint!r} out of range for {n} points")


def _check_labels(labels: Sequence[str] | None, n: int) -> tuple[str, ...] | None:
    if labels is None:
        return None
    if len(labels) != n:
        raise SpaceValidationError(f"{len(labels)} labels for {n} points")
    return tuple(str(s) for s in labels)


def load_space(source: str | Path | dict[str, Any]) -> FiniteMetricSpace:
    """Read an ``ec-space/1`` document from a path, JSON text, or parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpaceValidationError(f"input is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpaceValidationError("input must be a JSON object")
    schema = doc.get("schema", SPACE_SCHEMA)
    if schema != SPACE_SCHEMA:
        raise SpaceValidationError(f"unsupported schema {schema!r}")
    if "basepoint" not in doc:
        raise SpaceValidationError("missing basepoint")
    metric = doc.get("metric")
    if metric == "euclidean":
        if "points" not in doc:
            raise SpaceValidationError("euclidean input needs 'points'")
        return euclidean_space(doc["points"], doc["basepoint"], doc.get("labels"))
    if metric == "matrix":
        if "matrix" not in doc:
            raise SpaceValidationError("matrix input needs 'matrix'")
        return matrix_space(doc["matrix"], doc["basepoint"], doc.get("labels"), doc.get("kind", "metric"))
    raise SpaceValidationError(f"metric must be 'euclidean' or 'matrix', got {metric!r}")


def save_space(space: FiniteMetricSpace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(space.to_json(), indent=1) + "\n")


@dataclass(frozen=True, eq=False)
class ScaleGraph:
    """The open-ball entourage of ``space`` at ``scale`` as an undirected graph."""

    space: FiniteMetricSpace
    scale: float
    edges: np.ndarray
    triangles: np.ndarray
    neighbors: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def basepoint(self) -> int:
        return self.space.basepoint

    @cached_property
    def _nbr_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nb) for nb in self.neighbors)

    def adjacent(self, i: int, j: int) -> bool:
        """Whether ``(i, j)`` lies in the entourage (the diagonal always does)."""
        return i == j or j in self._nbr_sets[i]

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.edges]


def scale_graph(space: FiniteMetricSpace, scale: float) -> ScaleGraph:
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    edges = _kernels.threshold_edges(space.dist, float(scale))
    tris = _kernels.triangles(space.n, edges)
    nbrs: list[list[int]] = [[] for _ in range(space.n)]
    for a, b in edges:
        nbrs[a].append(int(b))
        nbrs[b].append(int(a))
    edges.setflags(write=False)
    tris.setflags(write=False)
    return ScaleGraph(
        space=space,
        scale=float(scale),
        edges=edges,
        triangles=tris,
        neighbors=tuple(tuple(sorted(nb)) for nb in nbrs),
    )


class Connectivity(NamedTuple):
    connected: bool
    labels: tuple[int, ...]
    n_components: int


def chain_connected(graph: ScaleGraph) -> Connectivity:
    """Component labelling; each point maps to the smallest index in its component."""
    labels = [-1] * graph.n
    count = 0
    for root in range(graph.n):
        if labels[root] != -1:
            continue
        count += 1
        labels[root] = root
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in graph.neighbors[u]:
                if labels[v] == -1:
                    labels[v] = root
                    queue.append(v)
    return Connectivity(count == 1, tuple(labels), count)


def power_reach(graph: ScaleGraph, x: int, n: int) -> frozenset[int]:
    """Points joined to ``x`` by a chain with at most ``n`` steps."""
    seen = {x}
    frontier = [x]
    for _ in range(n):
        nxt = []
        for u in frontier:
            for v in graph.neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return frozenset(seen)


def _connected_within(graph: ScaleGraph, members: Iterable[int]) -> bool:
    members = set(members)
    if not members:
        return True
    start = min(members)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in graph.neighbors[u]:
            if v in members and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(members)


def ball(graph: ScaleGraph, x: int) -> np.ndarray:
    return np.flatnonzero(graph.space.dist[x] < graph.scale)


def balls_chain_connected(graph: ScaleGraph, finer: ScaleGraph) -> bool:
    """True iff every open ball of ``graph`` is connected in ``finer``."""
    if finer.space is not graph.space:
        raise ValueError("graphs must share a space")
    if finer.scale > graph.scale:
        raise ValueError("finer scale exceeds coarse scale")
    return all(_connected_within(finer, ball(graph, x).tolist()) for x in range(graph.n))


def write_dot(graph: ScaleGraph, path: str | Path) -> None:
    lines = [f'graph "scale_{graph.scale:g}" {{']
    for i in range(graph.n):
        extra = ", shape=doublecircle" if i == graph.basepoint else ""
        lines.append(f'  {i} [label="{graph.space.label(i)}"{extra}];')
    for a, b in graph.edges:
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")
