"""Deterministic samplers for the earring, gasket, carpet and small fixtures.

Stage ``n`` of each fractal family is sampled from its level-``n``
pre-fractal ``X_n``:

* earring: circles of diameter ``1, 1/2, ..., 1/2**(n-1)`` tangent to the
  x-axis at the origin, plus the filled disc of diameter ``1/2**n``;
* gasket: outlines of the ``3**(n-1)`` triangles of side ``1/2**(n-1)``
  (a deformation retract of the ``3**n`` filled triangles of ``X_n``);
* carpet: outlines of the ``8**(n-1)`` squares of level ``n-1`` inside the
  square of diameter 1 (again a deformation retract of ``X_n``).

All three are homotopy equivalent to a wedge of ``expected_rank(family, n)``
circles, and at ``paper_scale(family, n)`` their deck group has that rank.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .metric import FiniteMetricSpace, euclidean_space

__all__ = [
    "Family",
    "SamplerSpec",
    "expected_rank",
    "feature_size",
    "paper_scale",
    "sample",
    "circle_points",
    "unit_square_corners",
]

#: Desk budget: deepest level accepted per family.
MAX_LEVEL = {"hawaiian": 4, "gasket": 3, "carpet": 2}


class Family(str, enum.Enum):
    CIRCLE = "circle"
    WEDGE = "wedge"
    HAWAIIAN = "hawaiian"
    GASKET = "gasket"
    CARPET = "carpet"
    SINE = "sine"
    SQUARE = "square"


@dataclass(frozen=True)
class SamplerSpec:
    """``level`` is the stage for fractal families, the circle count for
    ``wedge`` and the oscillation count for ``sine``."""

    family: Family
    level: int = 1
    density: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))


class DensityTooCoarse(ValueError):
    def __init__(self, message: str, feature: float):
        super().__init__(message)
        self.feature = feature


def expected_rank(family: Family | str, n: int) -> int:
    family = Family(family)
    if n < 0:
        raise ValueError("level must be non-negative")
    if family is Family.HAWAIIAN:
        return n
    if family is Family.GASKET:
        return sum(3**k for k in range(n))
    if family is Family.CARPET:
        return sum(8**k for k in range(n))
    raise ValueError(f"no rank formula for {family.value}")


def paper_scale(family: Family | str, n: int) -> float:
    family = Family(family)
    if family in (Family.HAWAIIAN, Family.GASKET):
        return 1.0 / 2 ** (n + 1)
    if family is Family.CARPET:
        return 0.5 / 3**n
    raise ValueError(f"no scale schedule for {family.value}")


def feature_size(family: Family | str, n: int) -> float:
    """Smallest gap of the level-``n`` geometry (twice its natural scale)."""
    family = Family(family)
    if family in (Family.HAWAIIAN, Family.GASKET, Family.CARPET):
        return 2 * paper_scale(family, n)
    if family is Family.SQUARE:
        return 1.0
    return 0.0


# --- primitives -------------------------------------------------------------------


class _PointSet:
    """Ordered point accumulator that drops exact repeats (up to 1e-12)."""

    def __init__(self):
        self.points: list[tuple[float, float]] = []
        self._seen: set[tuple[float, float]] = set()

    def add(self, x: float, y: float) -> None:
        key = (round(x, 12) + 0.0, round(y, 12) + 0.0)
        if key not in self._seen:
            self._seen.add(key)
            self.points.append((float(x), float(y)))

    def extend(self, pts: Iterable[tuple[float, float]]) -> None:
        for x, y in pts:
            self.add(x, y)


def segment_points(p, q, h: float) -> list[tuple[float, float]]:
    """Points on ``[p, q]`` including both ends, consecutive spacing <= h."""
    (x0, y0), (x1, y1) = p, q
    m = max(1, math.ceil(math.hypot(x1 - x0, y1 - y0) / h - 1e-9))
    return [(x0 + (x1 - x0) * k / m, y0 + (y1 - y0) * k / m) for k in range(m + 1)]


def circle_points(center, radius: float, h: float, start_angle: float = -math.pi / 2) -> list[tuple[float, float]]:
    """Circle samples with arc spacing <= h, starting at ``start_angle``."""
    m = max(3, math.ceil(2 * math.pi * radius / h - 1e-9))
    cx, cy = center
    return [
        (cx + radius * math.cos(start_angle + 2 * math.pi * k / m), cy + radius * math.sin(start_angle + 2 * math.pi * k / m))
        for k in range(m)
    ]


def disc_points(center, radius: float, h: float) -> list[tuple[float, float]]:
    """Concentric rings (outermost first) filling a closed disc at spacing <= h."""
    rings = max(1, math.ceil(radius / h - 1e-9))
    pts = []
    for j in range(rings, 0, -1):
        pts.extend(circle_points(center, radius * j / rings, h))
    pts.append(tuple(center))
    return pts


def _homothety(ratio: float, center, pts):
    cx, cy = center
    return [(cx + ratio * (x - cx), cy + ratio * (y - cy)) for x, y in pts]


# --- families ----------------------------------------------------------------------


def _check_density(family: Family, n: int, h: float) -> None:
    if not h > 0:
        raise ValueError("density must be positive")
    lim = MAX_LEVEL.get(family.value)
    if lim is not None and not 1 <= n <= lim:
        raise ValueError(f"{family.value} level must be in 1..{lim}, got {n}")
    feat = feature_size(family, n)
    if feat and h > feat / 4:
        raise DensityTooCoarse(f"density {h:g} too coarse: smallest feature is {feat:g}, need h <= {feat / 4:g}", feat)


def hawaiian_stage(n: int, h: float) -> FiniteMetricSpace:
    _check_density(Family.HAWAIIAN, n, h)
    ps = _PointSet()
    ps.add(0.0, 0.0)
    for k in range(n):
        r = 0.5 / 2**k
        ps.extend(circle_points((0.0, r), r, h))
    r = 0.5 / 2**n
    ps.extend(disc_points((0.0, r), r, h))
    return euclidean_space(ps.points, basepoint=0)


GASKET_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2))


def gasket_triangles(level: int) -> list[tuple[tuple[float, float], ...]]:
    """Vertex triples of the ``3**level`` triangles of the level-``level`` gasket."""
    tris = [GASKET_VERTICES]
    for _ in range(level):
        nxt = []
        for t in tris:
            for v in GASKET_VERTICES:
                # the homothety about a corner of the big triangle maps it into
                # the corner piece; applied to sub-triangles it nests the same way
                nxt.append(tuple(_homothety(0.5, v, t)))
        tris = nxt
    return tris


def gasket_level(n: int, h: float) -> FiniteMetricSpace:
    _check_density(Family.GASKET, n, h)
    ps = _PointSet()
    ps.add(0.0, 0.0)
    for t in gasket_triangles(n - 1):
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            ps.extend(segment_points(a, b, h))
    return euclidean_space(ps.points, basepoint=0)


CARPET_SIDE = 1 / math.sqrt(2)


def carpet_squares(level: int) -> list[tuple[float, float, float]]:
    """``(x, y, side)`` of the ``8**level`` squares of the level-``level`` carpet."""
    s0 = CARPET_SIDE
    corners = [(0, 0), (s0, 0), (s0, s0), (0, s0)]
    mids = [(s0 / 2, 0), (s0, s0 / 2), (s0 / 2, s0), (0, s0 / 2)]
    centers = corners + mids
    squares = [(0.0, 0.0, s0)]
    for _ in range(level):
        nxt = []
        for x, y, s in squares:
            for cx, cy in centers:
                # homothety about a centre of the unit square, applied to a
                # sub-square, nests it in the matching position
                (nx, ny), = _homothety(1 / 3, (cx, cy), [(x, y)])
                nxt.append((nx, ny, s / 3))
        squares = nxt
    return sorted(set((round(x, 12), round(y, 12), s) for x, y, s in squares))


def carpet_level(n: int, h: float) -> FiniteMetricSpace:
    _check_density(Family.CARPET, n, h)
    ps = _PointSet()
    ps.add(0.0, 0.0)
    segs = set()
    for x, y, s in carpet_squares(n - 1):
        c = [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]
        for a, b in zip(c, c[1:] + c[:1]):
            key = tuple(sorted((tuple(round(t, 12) for t in a), tuple(round(t, 12) for t in b))))
            segs.add(key)
    for a, b in sorted(segs):
        ps.extend(segment_points(a, b, h))
    return euclidean_space(ps.points, basepoint=0)


def circle(diameter: float, h: float) -> FiniteMetricSpace:
    r = diameter / 2
    return euclidean_space(circle_points((0.0, r), r, h), basepoint=0)


def circle_sample(n_points: int, radius: float = 1.0) -> FiniteMetricSpace:
    """``n_points`` equally spaced on a circle; point ``k`` at angle ``2 pi k / n``."""
    ang = 2 * np.pi * np.arange(n_points) / n_points
    return euclidean_space(np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]), basepoint=0)


def wedge_of_circles(k: int, h: float, diameter: float = 1.0) -> FiniteMetricSpace:
    """``k`` circles tangent at the origin, centres spread over the upper half plane."""
    ps = _PointSet()
    ps.add(0.0, 0.0)
    r = diameter / 2
    for j in range(k):
        theta = math.pi * (j + 1) / (k + 1)
        c = (r * math.cos(theta), r * math.sin(theta))
        ps.extend(circle_points(c, r, h, start_angle=theta + math.pi))
    return euclidean_space(ps.points, basepoint=0)


def sine_curve(oscillations: int, h: float) -> FiniteMetricSpace:
    """Closed topologist's sine curve truncated after ``oscillations`` periods.

    The graph of ``sin(1/x)`` on ``[1/(2 pi K), 1]``, the limit segment
    ``{0} x [-1, 1]``, and an outer arc joining ``(0, -1)`` to ``(1, sin 1)``.
    The basepoint is ``(0, -1)``.
    """
    if oscillations < 1:
        raise ValueError("need at least one oscillation")
    ps = _PointSet()
    ps.extend(segment_points((0.0, -1.0), (0.0, 1.0), h))
    x_min = 1 / (2 * math.pi * oscillations)
    pts = []
    x = x_min
    while x < 1:
        pts.append((x, math.sin(1 / x)))
        # step so that the chord stays below h
        dx = h / math.sqrt(1 + (math.cos(1 / x) / x**2) ** 2)
        x = min(1.0, x + dx)
    pts.append((1.0, math.sin(1.0)))
    ps.extend(pts)
    arc = [(0.0, -1.0), (0.0, -2.0), (1.5, -2.0), (1.5, math.sin(1.0)), (1.0, math.sin(1.0))]
    for a, b in zip(arc, arc[1:]):
        ps.extend(segment_points(a, b, h))
    return euclidean_space(ps.points, basepoint=0)


def unit_square_corners() -> FiniteMetricSpace:
    return euclidean_space([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], basepoint=0)


def sample(spec: SamplerSpec) -> FiniteMetricSpace:
    f, n, h = spec.family, spec.level, spec.density
    if f is Family.HAWAIIAN:
        return hawaiian_stage(n, h)
    if f is Family.GASKET:
        return gasket_level(n, h)
    if f is Family.CARPET:
        return carpet_level(n, h)
    if f is Family.CIRCLE:
        return circle(1.0, h)
    if f is Family.WEDGE:
        return wedge_of_circles(n, h)
    if f is Family.SINE:
        return sine_curve(n, h)
    if f is Family.SQUARE:
        return unit_square_corners()
    raise ValueError(f"unknown family {f}")
