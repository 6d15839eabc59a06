"""Towers of scales and the homomorphisms between their deck groups.

For scales ``coarse >= fine`` every fine chain is a coarse chain, which
induces ``theta: group(fine) -> group(coarse)``. A tower records the groups
along a decreasing schedule and the maps between consecutive scales.
"""

from __future__ import annotations

import enum
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from ._kernels import exponent_sums
from .folding import FoldedSubgroupGraph, InjectivityProbe, fold, probe_injectivity, surjective
from .groups import (
    AbelianInvariants,
    Certification,
    FPGroup,
    HomologyBasis,
    Simplification,
    Word,
    abelianize,
    homology_basis,
    smith_normal_form,
    tietze_simplify,
)
from .metric import FiniteMetricSpace, ScaleGraph, balls_chain_connected, chain_connected, scale_graph
from .presentation import PresentationAtScale, chain_class, presentation, tree_path

log = logging.getLogger(__name__)

__all__ = [
    "ScaleAnalysis",
    "ScaleTower",
    "ThetaData",
    "Universality",
    "analyze_scale",
    "default_schedule",
    "matmul",
    "run_tower",
    "theta",
    "universality_check",
]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class ScaleAnalysis:
    graph: ScaleGraph
    pres: PresentationAtScale
    simplification: Simplification
    invariants: AbelianInvariants
    connected: bool

    @property
    def scale(self) -> float:
        return self.graph.scale

    @property
    def flag(self) -> Certification:
        return self.simplification.flag

    @cached_property
    def basis(self) -> HomologyBasis:
        return homology_basis(self.simplification)

    def generator_loop(self, k: int) -> tuple[int, ...]:
        """The loop of original generator ``k``: tree path, the edge, tree path back."""
        a, b = self.pres.generators[k]
        return tree_path(self.pres, a) + tree_path(self.pres, b)[::-1]


def analyze_scale(space: FiniteMetricSpace | ScaleGraph, scale: float | None = None, pass_budget: int = 16) -> ScaleAnalysis:
    graph = space if isinstance(space, ScaleGraph) else scale_graph(space, scale)
    pres = presentation(graph)
    simp = tietze_simplify(pres.group, pass_budget)
    inv = abelianize(simp.group)
    return ScaleAnalysis(graph, pres, simp, inv, chain_connected(graph).connected)


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], inner: int | None = None) -> list[list[int]]:
    """Exact integer product; ``inner`` gives the shared dimension when a side is empty."""
    k = inner if inner is not None else (len(b) if b else 0)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(cols)] for i in range(len(a))]


@dataclass(frozen=True, eq=False)
class ThetaData:
    coarse_scale: float
    fine_scale: float
    #: coarse original-generator word of each fine original generator's loop
    generator_images: tuple[Word, ...]
    #: free-part homology matrix, coarse betti x fine betti
    matrix: tuple[tuple[int, ...], ...]
    fine_betti: int
    coarse_betti: int
    #: free-basis images of the fine free basis (only on certified-free pairs)
    free_images: tuple[Word, ...] | None
    folded: FoldedSubgroupGraph | None

    @cached_property
    def _snf(self) -> list[int]:
        return smith_normal_form([list(r) for r in self.matrix]) if self.matrix and self.fine_betti else []

    @property
    def rank(self) -> int:
        return len(self._snf)

    @property
    def kernel_rank(self) -> int:
        return self.fine_betti - self.rank

    @property
    def abelian_surjective(self) -> bool:
        return self.rank == self.coarse_betti and all(d == 1 for d in self._snf)

    @property
    def abelian_iso(self) -> bool:
        return self.abelian_surjective and self.fine_betti == self.coarse_betti

    @property
    def folded_surjective(self) -> bool | None:
        return None if self.folded is None else surjective(self.folded)

    @property
    def surjective(self) -> bool:
        f = self.folded_surjective
        return self.abelian_surjective and (f is None or f)

    def probe_kernel(self, max_word_length: int = 6) -> InjectivityProbe:
        if self.free_images is None:
            raise ValueError("kernel probing needs certified-free scales")
        return probe_injectivity(self.free_images, max_word_length)

    def to_json(self) -> dict:
        return {
            "coarse_scale": self.coarse_scale,
            "fine_scale": self.fine_scale,
            "matrix": [list(r) for r in self.matrix],
            "rank": self.rank,
            "kernel_rank": self.kernel_rank,
            "surjective": self.surjective,
            "abelian_surjective": self.abelian_surjective,
            "folded_surjective": self.folded_surjective,
        }


class ScheduleError(ValueError):
    pass


def theta(coarse: ScaleAnalysis, fine: ScaleAnalysis) -> ThetaData:
    if coarse.graph.space is not fine.graph.space:
        raise ScheduleError("scales must come from the same space")
    if fine.scale > coarse.scale:
        raise ScheduleError(f"fine scale {fine.scale:g} exceeds coarse scale {coarse.scale:g}")
    images = tuple(chain_class(coarse.pres, fine.generator_loop(k)).word for k in range(fine.pres.ngens))
    cb, fb = coarse.basis, fine.basis
    fine_cols = []
    for j in range(fb.invariants.betti):
        # coarse coordinates of the j-th fine basis class
        coords = [0] * cb.invariants.betti
        for g, c in enumerate(row[j] for row in fb.section):
            if c:
                v = cb.coordinates(images[g])
                coords = [a + c * b for a, b in zip(coords, v)]
        fine_cols.append(coords)
    matrix = tuple(tuple(fine_cols[j][i] for j in range(len(fine_cols))) for i in range(cb.invariants.betti))
    free_images = folded = None
    if coarse.flag.is_free and fine.flag.is_free:
        rewritten = []
        for g in fine.simplification.survivors:
            rewritten.append(coarse.simplification.rewrite(images[g]))
        free_images = tuple(rewritten)
        folded = fold(free_images, coarse.simplification.group.ngens)
    return ThetaData(
        coarse.scale,
        fine.scale,
        images,
        matrix,
        fb.invariants.betti,
        cb.invariants.betti,
        free_images,
        folded,
    )


class Universality(str, enum.Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class UniversalityVerdict:
    verdict: Universality
    witness: tuple[int, ...] | None = None  # a loop, as point indices
    witness_word: Word | None = None


def universality_check(analysis: ScaleAnalysis | PresentationAtScale | FPGroup) -> UniversalityVerdict:
    """Is every loop at this scale homotopic to the trivial loop?

    A refutation carries a generator whose class survives in the
    abelianization; for a scale presentation it also carries that
    generator's loop as point indices.
    """
    pres = None
    if isinstance(analysis, ScaleAnalysis):
        pres, simp, inv = analysis.pres, analysis.simplification, analysis.invariants
    else:
        if isinstance(analysis, PresentationAtScale):
            pres = analysis
        group = analysis.group if pres is not None else analysis
        simp = tietze_simplify(group)
        inv = abelianize(simp.group)
    if simp.flag is Certification.TRIVIAL:
        return UniversalityVerdict(Universality.CERTIFIED)
    if not (inv.betti or inv.torsion):
        return UniversalityVerdict(Universality.INCONCLUSIVE)
    k = _nontrivial_generator(simp, inv)
    loop = None
    if pres is not None:
        a, b = pres.generators[k]
        loop = tree_path(pres, a) + tree_path(pres, b)[::-1]
    return UniversalityVerdict(Universality.REFUTED, loop, (k + 1,))


def _nontrivial_generator(simp: Simplification, inv: AbelianInvariants) -> int:
    """An original generator with nonzero image in the abelianization."""
    n = simp.original.ngens
    if inv.betti:
        basis = homology_basis(simp)
        return next(g for g in range(n) if any(row[g] for row in basis.projection))
    # finite quotient: g is nontrivial iff killing it shrinks the quotient
    grp = simp.original
    rows = [exponent_sums(r, n) for r in grp.relators]
    base = smith_normal_form(rows) if rows else []
    for g in range(n):
        unit = [int(i == g) for i in range(n)]
        if smith_normal_form(rows + [unit]) != base:
            return g
    raise AssertionError("torsion present but no generator survives")


def default_schedule(space: FiniteMetricSpace, ratio: float = 0.5) -> list[float]:
    """Geometric from half the diameter down to twice the minimum spacing."""
    top = space.diameter / 2
    floor = 2 * space.min_spacing
    if not top > 0 or not floor < float("inf"):
        return [1.0]
    out = [top]
    while out[-1] * ratio >= floor:
        out.append(out[-1] * ratio)
    return out


@dataclass(frozen=True, eq=False)
class ScaleTower:
    space: FiniteMetricSpace
    schedule: tuple[float, ...]
    analyses: tuple[ScaleAnalysis, ...]
    maps: tuple[ThetaData, ...]
    covering_like: tuple[bool | None, ...]
    stable_window: int

    def composite(self, i: int, j: int) -> list[list[int]]:
        """Matrix ``M(schedule[i] <- schedule[j])`` as a product of consecutive maps."""
        if j < i:
            raise ValueError("need i <= j")
        betti = self.analyses[i].invariants.betti
        m = [[int(r == c) for c in range(betti)] for r in range(betti)]
        for k in range(i, j):
            m = matmul(m, [list(r) for r in self.maps[k].matrix], inner=self.analyses[k].invariants.betti)
        return m

    @property
    def critical(self) -> list[tuple[float, float]]:
        """Half-open intervals ``(fine, coarse]`` across which betti or torsion change."""
        out = []
        for a, b in zip(self.analyses, self.analyses[1:]):
            if a.invariants != b.invariants:
                out.append((b.scale, a.scale))
        return out

    @property
    def stabilization(self) -> tuple[str, int | None]:
        k = self.stable_window
        usable = [i for i, a in enumerate(self.analyses) if a.connected]
        if len(self.maps) < k:
            return ("Insufficient", None)
        tail = self.maps[-k:]
        idx = range(len(self.maps) - k, len(self.maps))
        for i, m in zip(idx, tail):
            a, b = self.analyses[i], self.analyses[i + 1]
            if i not in usable or i + 1 not in usable:
                return ("NotStable", None)
            if not (m.abelian_iso and a.flag.is_free and b.flag.is_free):
                return ("NotStable", None)
            if a.simplification.group.ngens != b.simplification.group.ngens:
                return ("NotStable", None)
        return ("Stable", self.analyses[-1].invariants.betti)

    def to_json(self) -> dict:
        state, rank = self.stabilization
        return {
            "schema": "ec-tower/1",
            "space": space_digest(self.space),
            "scales": [
                {
                    "scale": a.scale,
                    "points_in_component": len(a.pres.component),
                    "chain_connected": a.connected,
                    "generators": a.pres.ngens,
                    "relators": len(a.pres.relators),
                    "betti": a.invariants.betti,
                    "torsion": list(a.invariants.torsion),
                    "certified": a.flag.value,
                    "covering_like": cl,
                }
                for a, cl in zip(self.analyses, self.covering_like)
            ],
            "maps": [m.to_json() for m in self.maps],
            "critical": [list(c) for c in self.critical],
            "stabilization": {"state": state, "rank": rank, "window": self.stable_window},
        }


def space_digest(space: FiniteMetricSpace) -> dict:
    return {
        "points": space.n,
        "diameter": space.diameter,
        "min_spacing": space.min_spacing if space.n > 1 else 0.0,
        "basepoint": space.basepoint,
    }


def run_tower(space: FiniteMetricSpace, schedule: Sequence[float] | None = None, stable_window: int = 3) -> ScaleTower:
    if schedule is None:
        schedule = default_schedule(space)
    sched = tuple(float(s) for s in schedule)
    if any(not s > 0 for s in sched):
        raise ScheduleError("scales must be positive")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ScheduleError("schedule must be strictly decreasing")
    if space.n > 1 and sched[-1] <= space.min_spacing:
        warnings.warn(
            f"finest scale {sched[-1]:g} is at or below the minimum spacing {space.min_spacing:g}; "
            "the scale graph there has isolated points",
            stacklevel=2,
        )
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        analyses = tuple(pool.map(lambda s: analyze_scale(space, s), sched))
        maps = tuple(pool.map(lambda i: theta(analyses[i], analyses[i + 1]), range(len(sched) - 1)))
    for a in analyses:
        if not a.connected:
            log.warning("scale %g: NotChainConnected", a.scale)
    covering = []
    for i, a in enumerate(analyses):
        if i + 1 < len(analyses):
            covering.append(bool(balls_chain_connected(a.graph, analyses[i + 1].graph) and maps[i].surjective))
        else:
            covering.append(None)
    return ScaleTower(space, sched, analyses, maps, tuple(covering), stable_window)
