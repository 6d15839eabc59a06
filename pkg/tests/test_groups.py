from itertools import combinations
from math import gcd

import pytest
import sympy
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from ecover._kernels import exponent_sums, free_reduce
from ecover.groups import (
    AbelianInvariants,
    Certification,
    FPGroup,
    UncertifiedError,
    abelianize,
    homology_basis,
    smith_normal_form,
    tietze_simplify,
    word_equal_free,
)
from ecover.metric import scale_graph
from ecover.presentation import presentation


def _divisor_oracle(m):
    """Invariant factors from determinantal divisors: d_k = D_k / D_{k-1}."""
    rows, cols = len(m), len(m[0]) if m else 0
    out, prev = [], 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for r in combinations(range(rows), k):
            for c in combinations(range(cols), k):
                g = gcd(g, int(sympy.Matrix([[m[i][j] for j in c] for i in r]).det()))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@pytest.mark.parametrize(
    "m, diag",
    [([[3]], [3]), ([[2, 0], [0, 3]], [1, 6]), ([[0, 0], [0, 0]], []), ([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], [2, 6, 12])],
)
def test_snf_known(m, diag):
    assert smith_normal_form(m) == diag


@seed(51)
@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_matches_determinantal_divisors(m):
    d = smith_normal_form(m)
    assert d == _divisor_oracle(m)
    assert all(x >= 1 for x in d)
    assert all(b % a == 0 for a, b in zip(d, d[1:]))


@seed(52)
@settings(max_examples=80, deadline=None)
@given(matrices)
def test_snf_matches_sympy(m):
    s = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
    theirs = [abs(int(s[i, i])) for i in range(min(s.shape)) if s[i, i] != 0]
    assert smith_normal_form(m) == theirs


@seed(53)
@settings(max_examples=80, deadline=None)
@given(matrices)
def test_snf_transforms(m):
    diag, U, V = smith_normal_form(m, transforms=True)
    D = sympy.Matrix(U) * sympy.Matrix(m) * sympy.Matrix(V)
    want = sympy.zeros(*D.shape)
    for i, x in enumerate(diag):
        want[i, i] = x
    assert D == want
    assert abs(sympy.Matrix(U).det()) == 1 and abs(sympy.Matrix(V).det()) == 1


def test_snf_big_integers():
    big = 10**30
    assert smith_normal_form([[big, 0], [0, big * 3]]) == [big, 3 * big]


def test_k4_presentation_is_trivial(k4):
    pres = presentation(k4)
    assert (pres.ngens, len(pres.relators)) == (3, 4)
    assert tietze_simplify(pres.group).flag is Certification.TRIVIAL


def test_cycle_presentation_is_free(cycle4):
    s = tietze_simplify(presentation(cycle4).group)
    assert s.flag is Certification.FREE and s.group.ngens == 1
    assert abelianize(s.group) == AbelianInvariants(1)


def test_cyclic_group_of_order_three():
    g = FPGroup(1, ((1, 1, 1),))
    s = tietze_simplify(g)
    assert s.flag is Certification.INCONCLUSIVE
    assert abelianize(g) == AbelianInvariants(0, (3,))


def test_trivial_group_that_tietze_cannot_see():
    # a b a^-1 = b^2 and b a b^-1 = a^2 present the trivial group
    g = FPGroup(2, ((1, 2, -1, -2, -2), (2, 1, -2, -1, -1)))
    assert tietze_simplify(g).flag is Certification.INCONCLUSIVE
    assert abelianize(g) == AbelianInvariants(0)


def test_torus_like_complex_has_betti_two():
    import numpy as np

    from ecover.metric import euclidean_space

    k = 9
    t = 2 * np.pi * np.arange(k) / k
    pts = [(np.cos(a), np.sin(a), np.cos(b), np.sin(b)) for a in t for b in t]
    g = scale_graph(euclidean_space(pts), 1.1)  # grid squares filled, two-step chords excluded
    s = tietze_simplify(presentation(g).group)
    assert abelianize(presentation(g).group) == AbelianInvariants(2)
    assert abelianize(s.group) == AbelianInvariants(2)
    assert s.flag is Certification.INCONCLUSIVE  # the commutator survives


def test_short_relators_chain_through_signs():
    # a = b^-1, b c = 1, c = d, d^-1 e^-1 = 1 leaves one generator
    g = FPGroup(5, ((1, 2), (2, 3), (3, -4), (-4, -5)))
    s = tietze_simplify(g)
    assert s.flag is Certification.FREE and s.survivors == (0,)
    assert [s.rewrite((k,)) for k in range(1, 6)] == [(1,), (-1,), (1,), (1,), (-1,)]


def test_short_relator_kills_a_class():
    g = FPGroup(3, ((1, -2), (2,), (3, 3)))
    s = tietze_simplify(g)
    assert s.rewrite((1,)) == s.rewrite((2,)) == ()
    assert abelianize(s.group) == AbelianInvariants(0, (2,))


def test_word_equal_free(cycle4):
    s = tietze_simplify(FPGroup(2))
    assert word_equal_free((1, 2, -2), (1,), s)
    assert not word_equal_free((1,), (2,), s)
    assert word_equal_free((2, 1, -2), (2, 1, -2), s)


def test_word_equal_needs_certificate():
    with pytest.raises(UncertifiedError):
        word_equal_free((1,), (1,), tietze_simplify(FPGroup(1, ((1, 1, 1),))))


def test_invalid_alphabet_rejected():
    with pytest.raises(ValueError):
        FPGroup.from_relators(1, [(2,)])


def _random_group(data):
    n = data.draw(st.integers(1, 5))
    letters = [x for g in range(1, n + 1) for x in (g, -g)]
    rels = data.draw(st.lists(st.lists(st.sampled_from(letters), min_size=1, max_size=5), max_size=5))
    return FPGroup.from_relators(n, [free_reduce(r) for r in rels if free_reduce(r)])


@seed(54)
@settings(max_examples=200, deadline=None)
@given(st.data())
def test_simplification_preserves_abelianization(data):
    g = _random_group(data)
    s = tietze_simplify(g)
    assert abelianize(s.group) == abelianize(g)
    if s.flag.is_free:
        assert abelianize(g) == AbelianInvariants(s.group.ngens)
    # every original relator is trivial after substitution
    if s.flag.is_free:
        assert all(not s.rewrite(r) for r in g.relators)
    # substitution and embedding are mutually inverse on the survivors
    for j in range(s.group.ngens):
        assert s.rewrite(s.embed((j + 1,))) == (j + 1,)


@seed(55)
@settings(max_examples=100, deadline=None)
@given(st.data())
def test_homology_basis_is_a_section(data):
    g = _random_group(data)
    s = tietze_simplify(g)
    b = homology_basis(s)
    assert b.invariants.betti == abelianize(g).betti
    n = g.ngens
    for i, row in enumerate(b.projection):
        for j in range(b.invariants.betti):
            assert sum(row[k] * b.section[k][j] for k in range(n)) == int(i == j)
    for r in g.relators:
        assert not any(b.coordinates(r))


def test_exponent_sum_row(cycle4):
    assert list(exponent_sums((1, -2, 1), 2)) == [2, -1]
