"""Finitely presented groups: reduction, Tietze simplification, abelianization.

Words are tuples of nonzero ints: letter ``k`` is generator ``k - 1`` and
``-k`` its inverse.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._kernels import cyclic_reduce, exponent_sums, free_reduce

Word = tuple[int, ...]

__all__ = [
    "AbelianInvariants",
    "Certification",
    "FPGroup",
    "HomologyBasis",
    "Simplification",
    "UncertifiedError",
    "abelianize",
    "cyclic_reduce",
    "free_reduce",
    "homology_basis",
    "invert",
    "smith_normal_form",
    "tietze_simplify",
    "word_equal_free",
]


class UncertifiedError(RuntimeError):
    """A free-group operation was requested on a presentation not certified free."""


class Certification(str, enum.Enum):
    FREE = "FreeCertified"
    TRIVIAL = "TrivialCertified"
    INCONCLUSIVE = "Inconclusive"

    @property
    def is_free(self) -> bool:
        return self is not Certification.INCONCLUSIVE


def invert(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def _canonical_cyclic(word: Word) -> Word:
    """Least rotation of the word or its inverse; identifies conjugate relators."""
    best = None
    for w in (word, invert(word)):
        for k in range(len(w)):
            rot = w[k:] + w[:k]
            if best is None or rot < best:
                best = rot
    return best if best is not None else ()


@dataclass(frozen=True)
class FPGroup:
    ngens: int
    relators: tuple[Word, ...] = ()

    @classmethod
    def from_relators(cls, ngens: int, relators: Iterable[Sequence[int]]) -> "FPGroup":
        """Cyclically reduce, drop empty relators and check the alphabet."""
        rels = []
        for r in relators:
            for x in r:
                if x == 0 or abs(x) > ngens:
                    raise ValueError(f"letter {x} outside alphabet of {ngens} generators")
            w = cyclic_reduce(r)
            if w:
                rels.append(tuple(w))
        return cls(ngens, tuple(rels))


@dataclass(frozen=True)
class Simplification:
    """Result of :func:`tietze_simplify`.

    ``survivors[j]`` is the original index of new generator ``j``;
    ``substitution[g]`` expresses original generator ``g`` in the new ones.
    """

    original: FPGroup
    group: FPGroup
    flag: Certification
    survivors: tuple[int, ...]
    substitution: tuple[Word, ...]
    passes: int

    def rewrite(self, word: Sequence[int]) -> Word:
        out: list[int] = []
        for x in word:
            w = self.substitution[abs(x) - 1]
            out.extend(w if x > 0 else invert(w))
        return free_reduce(out)

    def embed(self, word: Sequence[int]) -> Word:
        """Read a word in the new generators back in the original ones."""
        return tuple((self.survivors[abs(x) - 1] + 1) * (1 if x > 0 else -1) for x in word)


class _SignedUnion:
    """Union-find over generators with a sign per link; a root may be killed."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.sign = [1] * n
        self.dead = bytearray(n)

    def find(self, g: int) -> tuple[int, int]:
        """``(root, s)`` with ``g = root**s``."""
        parent, sign = self.parent, self.sign
        path = []
        while parent[g] != g:
            path.append(g)
            g = parent[g]
        s = 1
        for node in reversed(path):
            s *= sign[node]
            parent[node], sign[node] = g, s
        return g, (sign[path[0]] if path else 1)

    def rewrite(self, word: Word) -> Word:
        parent, dead, find = self.parent, self.dead, self.find
        out = []
        for x in word:
            g = (x if x > 0 else -x) - 1
            if parent[g] == g:
                if not dead[g]:
                    out.append(x)
                continue
            r, s = find(g)
            if not dead[r]:
                out.append((r + 1) * s if x > 0 else -(r + 1) * s)
        if len(out) < 2:
            return tuple(out)
        return cyclic_reduce(out)


def _short_relators(ngens: int, relators: Iterable[Word]):
    """Eliminate through relators of length one or two until none are left.

    Returns the surviving relators rewritten in the remaining generators and
    the eliminations ``(g, value)``; each value is a single live letter or empty.
    """
    uf = _SignedUnion(ngens)
    pending = sorted(relators, key=len)
    merged = True
    while merged:
        merged = False
        keep = []
        for w in pending:
            w = uf.rewrite(w)
            if len(w) == 1:
                uf.dead[abs(w[0]) - 1] = 1
                merged = True
            elif len(w) == 2 and abs(w[0]) != abs(w[1]):
                a, b = abs(w[0]) - 1, abs(w[1]) - 1
                # the later generator goes; a**sa * b**sb = 1 links either way with one sign
                child, root = max(a, b), min(a, b)
                uf.parent[child], uf.sign[child] = root, -(1 if w[0] > 0 else -1) * (1 if w[1] > 0 else -1)
                merged = True
            elif w:
                keep.append(w)
        pending = keep
    eliminated = []
    for g in range(ngens):
        r, s = uf.find(g)
        if uf.dead[r]:
            eliminated.append((g, ()))
        elif r != g:
            eliminated.append((g, ((r + 1) * s,)))
    return pending, eliminated


def tietze_simplify(group: FPGroup, pass_budget: int = 16) -> Simplification:
    """Eliminate generators that occur exactly once in some relator.

    Relators of length one or two are consumed first by a union-find sweep,
    which is the same move done in bulk. The rest are processed shortest
    first; each pass runs eliminations until none apply and then drops
    duplicate relators up to rotation and inversion.
    """
    rels: dict[int, Word] = {}
    occ: dict[int, set[int]] = {g: set() for g in range(group.ngens)}
    heap: list[tuple[int, int]] = []
    next_id = 0

    def add(word: Word) -> None:
        nonlocal next_id
        w = cyclic_reduce(word)
        if not w:
            return
        rid = next_id
        next_id += 1
        rels[rid] = w
        for x in set(abs(x) - 1 for x in w):
            occ[x].add(rid)
        heapq.heappush(heap, (len(w), rid))

    def remove(rid: int) -> Word:
        w = rels.pop(rid)
        for x in set(abs(x) - 1 for x in w):
            occ[x].discard(rid)
        return w

    short_rest, eliminated = _short_relators(group.ngens, group.relators)
    seen: set[Word] = set()
    for r in short_rest:
        key = _canonical_cyclic(r)
        if key not in seen:
            seen.add(key)
            add(r)

    alive = set(range(group.ngens)) - {g for g, _ in eliminated}
    passes = 0
    changed = True
    while changed and rels and passes < pass_budget:
        passes += 1
        changed = False
        while heap:
            length, rid = heapq.heappop(heap)
            w = rels.get(rid)
            if w is None or len(w) != length:
                continue
            counts: dict[int, int] = {}
            for x in w:
                counts[abs(x)] = counts.get(abs(x), 0) + 1
            once = [g for g, c in counts.items() if c == 1]
            if not once:
                continue
            # fewest other relators touched keeps growth down
            letter = min(once, key=lambda g: (len(occ[g - 1]), g))
            g = letter - 1
            pos = next(i for i, x in enumerate(w) if abs(x) == letter)
            rot = w[pos:] + w[:pos]
            rest = rot[1:]
            value = invert(rest) if rot[0] > 0 else rest
            remove(rid)
            alive.discard(g)
            eliminated.append((g, value))
            inv_value = invert(value)
            for other in sorted(occ[g]):
                ow = remove(other)
                new: list[int] = []
                for x in ow:
                    if abs(x) - 1 == g:
                        new.extend(value if x > 0 else inv_value)
                    else:
                        new.append(x)
                add(tuple(new))
            changed = True
        # dedupe conjugate/inverse copies
        seen: set[Word] = set()
        for rid in sorted(rels):
            key = _canonical_cyclic(rels[rid])
            if key in seen:
                remove(rid)
            else:
                seen.add(key)
        heap = [(len(w), rid) for rid, w in rels.items()]
        heapq.heapify(heap)

    survivors = tuple(sorted(alive))
    renumber = {g: j for j, g in enumerate(survivors)}
    expansion: dict[int, Word] = {g: (renumber[g] + 1,) for g in survivors}
    for g, value in reversed(eliminated):
        out: list[int] = []
        for x in value:
            e = expansion[abs(x) - 1]
            out.extend(e if x > 0 else invert(e))
        expansion[g] = free_reduce(out)
    substitution = tuple(expansion[g] for g in range(group.ngens))

    def renum(w: Word) -> Word:
        return tuple((renumber[abs(x) - 1] + 1) * (1 if x > 0 else -1) for x in w)

    simplified = FPGroup(len(survivors), tuple(renum(rels[rid]) for rid in sorted(rels)))
    if simplified.relators:
        flag = Certification.INCONCLUSIVE
    elif simplified.ngens == 0:
        flag = Certification.TRIVIAL
    else:
        flag = Certification.FREE
    return Simplification(group, simplified, flag, survivors, substitution, passes)


def word_equal_free(w1: Sequence[int], w2: Sequence[int], simplification: Simplification) -> bool:
    """Equality of two words in the group, decided in the certified free basis."""
    if not simplification.flag.is_free:
        raise UncertifiedError("word problem only decided on certified-free presentations")
    return simplification.rewrite(w1) == simplification.rewrite(w2)


# --- Smith normal form ------------------------------------------------------


def smith_normal_form(matrix: Sequence[Sequence[int]], transforms: bool = False):
    """Invariant factors of an integer matrix.

    Returns the nonzero diagonal entries ``d_1 | d_2 | ...``. With
    ``transforms=True`` returns ``(diag, U, V)`` where ``U @ A @ V`` is the
    diagonal form; ``U`` and ``V`` are unimodular.
    """
    a = [[int(x) for x in row] for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)] if transforms else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if transforms else None

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        if V is not None:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst += q * row src
        ra, rs = a[dst], a[src]
        for k in range(n):
            if rs[k]:
                ra[k] += q * rs[k]
        if U is not None:
            ua, us = U[dst], U[src]
            for k in range(m):
                if us[k]:
                    ua[k] += q * us[k]

    def add_col(dst, src, q):  # col dst += q * col src
        for row in a:
            if row[src]:
                row[dst] += q * row[src]
        if V is not None:
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // p
                    add_row(i, t, -q)
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // p
                    add_col(j, t, -q)
                    if a[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remainder into the pivot position
                best = (abs(p), t, t)
                for i in range(t + 1, m):
                    if a[i][t] and abs(a[i][t]) < best[0]:
                        best = (abs(a[i][t]), i, t)
                for j in range(t + 1, n):
                    if a[t][j] and abs(a[t][j]) < best[0]:
                        best = (abs(a[t][j]), t, j)
                swap_rows(t, best[1])
                swap_cols(t, best[2])
                continue
            # divisibility: pivot must divide the remaining block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
        t += 1
    diag = [a[i][i] for i in range(min(m, n)) if a[i][i]]
    if transforms:
        return diag, U, V
    return diag


@dataclass(frozen=True)
class AbelianInvariants:
    betti: int
    torsion: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"betti": self.betti, "torsion": list(self.torsion)}


def _sparse_unit_eliminate(rows: list[dict[int, int]], ncols: int):
    """Pivot away every unit entry; returns (units, residual rows, residual cols).

    Unit pivots contribute invariant factor 1 and leave the rest of the
    Smith form unchanged.
    """
    rows = [dict(r) for r in rows if r]
    col_rows: dict[int, set[int]] = {}
    for ri, r in enumerate(rows):
        for c in r:
            col_rows.setdefault(c, set()).add(ri)
    live = set(range(len(rows)))
    units = 0
    dead_cols: set[int] = set()
    order = sorted(live, key=lambda ri: (len(rows[ri]), ri))
    heap = [(len(rows[ri]), ri) for ri in order]
    heapq.heapify(heap)
    while heap:
        ln, ri = heapq.heappop(heap)
        if ri not in live or len(rows[ri]) != ln:
            continue
        r = rows[ri]
        if not r:
            live.discard(ri)
            continue
        piv = None
        for c, v in r.items():
            if v in (1, -1) and (piv is None or len(col_rows[c]) < len(col_rows[piv])):
                piv = c
        if piv is None:
            continue
        pv = r[piv]
        live.discard(ri)
        for c in r:
            col_rows[c].discard(ri)
        for other in sorted(col_rows[piv]):
            orow = rows[other]
            q = orow[piv] * pv  # pv is a unit so pv == 1/pv
            for c, v in r.items():
                nv = orow.get(c, 0) - q * v
                if nv:
                    if c not in orow:
                        col_rows[c].add(other)
                    orow[c] = nv
                elif c in orow:
                    del orow[c]
                    col_rows[c].discard(other)
            heapq.heappush(heap, (len(orow), other))
        dead_cols.add(piv)
        units += 1
    residual = [rows[ri] for ri in sorted(live) if rows[ri]]
    cols = sorted(set(range(ncols)) - dead_cols)
    return units, residual, cols


def abelianize(group: FPGroup) -> AbelianInvariants:
    rows = []
    for r in group.relators:
        row: dict[int, int] = {}
        for x in r:
            g = abs(x) - 1
            row[g] = row.get(g, 0) + (1 if x > 0 else -1)
        rows.append({g: v for g, v in row.items() if v})
    units, residual, cols = _sparse_unit_eliminate(rows, group.ngens)
    idx = {c: k for k, c in enumerate(cols)}
    dense = [[0] * len(cols) for _ in residual]
    for i, r in enumerate(residual):
        for c, v in r.items():
            dense[i][idx[c]] = v
    diag = smith_normal_form(dense) if dense and cols else []
    rank = units + len(diag)
    return AbelianInvariants(group.ngens - rank, tuple(d for d in diag if d != 1))


@dataclass(frozen=True)
class HomologyBasis:
    """Coordinates on the free part of the abelianization.

    ``projection`` (betti x ngens) maps an exponent-sum vector of a word in the
    original generators to free-part coordinates; ``section`` (ngens x betti)
    lifts coordinate vectors back, so ``projection @ section`` is the identity.
    """

    invariants: AbelianInvariants
    projection: tuple[tuple[int, ...], ...]
    section: tuple[tuple[int, ...], ...]

    def coordinates(self, word: Sequence[int]) -> tuple[int, ...]:
        n = len(self.section)
        v = exponent_sums(word, n)
        return tuple(sum(p[k] * v[k] for k in range(n) if v[k]) for p in self.projection)


def homology_basis(simplification: Simplification) -> HomologyBasis:
    """Free-part coordinates for the original generators of a simplified group.

    Uses the Tietze substitution, then a Smith form with transforms on the
    (small) simplified presentation.
    """
    grp = simplification.group
    k = grp.ngens
    rel_rows = [exponent_sums(r, k) for r in grp.relators]
    if rel_rows and k:
        diag, _, V = smith_normal_form(rel_rows, transforms=True)
    else:
        diag, V = [], [[int(i == j) for j in range(k)] for i in range(k)]
    rank = len(diag)
    torsion = tuple(d for d in diag if d != 1)
    # y = x V: free coordinates are y[rank:]
    Vinv = _unimodular_inverse(V)
    proj_simpl = [[V[i][j] for i in range(k)] for j in range(rank, k)]  # (betti x k)
    sec_simpl = [Vinv[j] for j in range(rank, k)]  # rows: basis vectors in x coords
    n = simplification.original.ngens
    sub_rows = [exponent_sums(simplification.substitution[g], k) for g in range(n)]
    projection = tuple(
        tuple(sum(p[c] * sub_rows[g][c] for c in range(k)) for g in range(n)) for p in proj_simpl
    )
    section_cols = []
    for vec in sec_simpl:
        col = [0] * n
        for c, v in enumerate(vec):
            if v:
                col[simplification.survivors[c]] += v
        section_cols.append(col)
    section = tuple(tuple(section_cols[b][g] for b in range(len(section_cols))) for g in range(n))
    inv = AbelianInvariants(k - rank, torsion)
    return HomologyBasis(inv, projection, section)


def _unimodular_inverse(V: list[list[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix via Gauss-Jordan over Fractions."""
    from fractions import Fraction

    n = len(V)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(V)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    out = []
    for row in aug:
        vals = row[n:]
        if any(v.denominator != 1 for v in vals):
            raise ValueError("matrix is not unimodular")
        out.append([int(v) for v in vals])
    return out
