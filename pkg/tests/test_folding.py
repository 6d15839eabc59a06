import random

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from ecover.folding import fold, image_words, member, probe_injectivity, surjective
from ecover.groups import invert
from ecover.spaces import circle, hawaiian_stage
from ecover.tower import analyze_scale, theta


def test_single_loop():
    g = fold([(1,)], 1)
    assert (g.nstates, g.rank) == (1, 1)


def test_squares_and_cubes_generate_everything():
    g = fold([(1, 1), (1, 1, 1)], 1)
    assert member(g, (1,))
    assert surjective(g)


def test_empty_subgroup():
    g = fold([], 2)
    assert (g.nstates, g.rank) == (1, 0)
    assert member(g, ())
    assert not member(g, (1,))


def test_membership_through_products():
    assert member(fold([(1, 2), (-2,)], 2), (1,))
    assert not member(fold([(1,)], 2), (2,))


def test_index_two_is_not_surjective():
    g = fold([(1, 1)], 1)
    assert not surjective(g)
    assert g.nstates == 2


def test_all_generators_fold_to_a_bouquet():
    g = fold([(1,), (2,), (3,)], 3)
    assert surjective(g) and g.rank == 3


def test_folded_graph_is_deterministic_and_core():
    g = fold([(1, 2, -1), (1, 1, 2, -1, -1), (2, 2)], 2)
    seen = set()
    for (s, x), t in g.transitions.items():
        assert g.transitions[(t, -x)] == s
        assert (s, x) not in seen
        seen.add((s, x))
    deg = {s: 0 for s in range(g.nstates)}
    for (s, _x) in g.transitions:
        deg[s] += 1
    assert all(d >= 2 for s, d in deg.items() if s != 0)


def test_letters_outside_rank_rejected():
    with pytest.raises(ValueError):
        fold([(3,)], 2)


def test_identity_has_no_short_kernel():
    p = probe_injectivity([(1,), (2,)], 4)
    assert not p.found and p.bound == 4


def test_collapse_has_kernel():
    p = probe_injectivity([(1,), (1,)], 2)
    assert p.found
    assert image_words([(1,), (1,)], p.witness) == ()
    assert len(p.witness) == 2


def test_probe_budget_lowers_the_bound():
    p = probe_injectivity([(1,), (2,), (3,)], 8, budget=1000)
    assert p.budget_hit and p.bound < 8


def test_circle_theta_image_is_everything():
    sp = circle(2.0, 0.02)
    th = theta(analyze_scale(sp, 0.5), analyze_scale(sp, 0.1))
    assert th.folded is not None and surjective(th.folded)


def test_earring_theta_kills_the_new_circle():
    sp = hawaiian_stage(2, 1 / 32)
    th = theta(analyze_scale(sp, 1.1 / 4), analyze_scale(sp, 1.1 / 8))
    p = th.probe_kernel(3)
    assert p.found
    # the witness is a generator and maps to the identity
    assert len(p.witness) == 1
    assert member(fold([()], 1), image_words(th.free_images, p.witness))


words = st.lists(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), min_size=1, max_size=6).map(tuple), min_size=1, max_size=4)


@seed(71)
@settings(max_examples=150, deadline=None)
@given(words)
def test_fold_order_does_not_matter(ws):
    a = fold(ws, 3)
    b = fold(list(reversed(ws)), 3)
    c = fold([invert(w) for w in ws], 3)
    assert a.signature() == b.signature() == c.signature()


@seed(72)
@settings(max_examples=100, deadline=None)
@given(words)
def test_closure_spot_checks(ws):
    g = fold(ws, 3)
    rng = random.Random(hash(tuple(ws)) & 0xFFFF)
    for w in ws:
        assert member(g, w)
    for _ in range(100):
        prod = ()
        for _ in range(rng.randint(1, 4)):
            w = rng.choice(ws)
            prod += w if rng.random() < 0.5 else invert(w)
        assert member(g, prod)
    assert surjective(g) == all(member(g, (x,)) for x in (1, 2, 3))
    assert g.rank == g.nedges - g.nstates + 1
