import pytest

from ecover.cover import (
    OUTSIDE,
    TruncatedCover,
    build_cover,
    check_discreteness,
    check_fiber_orbits,
    check_local_injectivity,
    deck_act,
)
from ecover.groups import FPGroup, UncertifiedError, tietze_simplify
from ecover.metric import scale_graph
from ecover.presentation import presentation
from ecover.spaces import circle_sample


def _cover(graph, radius, mode="free"):
    pres = presentation(graph)
    return build_cover(pres, tietze_simplify(pres.group), radius, mode)


@pytest.mark.parametrize("r", [1, 2, 5, 9])
def test_cycle_cover_is_a_line(cycle4, r):
    c = _cover(cycle4, r)
    assert len(c.vertices) == 2 * r + 1
    assert len(c.edges) == 2 * r


def test_k4_cover_is_k4(k4):
    c = _cover(k4, 3)
    assert len(c.vertices) == 4 and len(c.edges) == 6


def test_single_point_cover(point):
    assert len(_cover(scale_graph(point, 1.0), 4).vertices) == 1


def test_projection_maps_edges_to_edges(cycle4):
    c = _cover(cycle4, 6)
    for e in c.edges:
        (p, _), (q, _) = tuple(e)
        assert cycle4.adjacent(p, q)


def test_deck_action_on_base_fiber(cycle4):
    c = _cover(cycle4, 9)
    assert deck_act(c, (1,), (0, ())) == (0, (1,))
    assert deck_act(c, (-1,), (0, (1,))) == (0, ())
    assert all(deck_act(c, (), v) == v for v in c.vertices)


def test_action_leaves_truncation(cycle4):
    c = _cover(cycle4, 3)
    far = max(c.vertices, key=lambda v: len(v[1]))
    g = far[1][0]
    assert deck_act(c, (g,), far) is OUTSIDE


def test_discreteness_on_cycle(cycle4):
    r = check_discreteness(_cover(cycle4, 9), 3)
    assert r.ok and r.pairs_checked > 0


def test_discreteness_vacuous_on_k4(k4):
    r = check_discreteness(_cover(k4, 3), 4)
    assert r.ok and r.words_checked == 0


def test_broken_action_is_caught(cycle4):
    c = _cover(cycle4, 9)

    def fixed(cover, word, v):
        return v

    def shifted(cover, word, v):
        # moves to a neighbour instead of along the fiber
        for e in cover.edges:
            if v in e:
                return next(iter(e - {v}))
        return OUTSIDE

    kinds = {x[0] for x in check_discreteness(c, 1, act=fixed).violations}
    assert kinds == {"fixed point"}
    kinds = {x[0] for x in check_discreteness(c, 1, act=shifted).violations}
    assert {"adjacent translate", "fiber moved"} <= kinds


def test_fibers_and_local_injectivity_on_circle():
    g = scale_graph(circle_sample(60, radius=2.0), 0.5)
    c = _cover(g, 80)
    assert not check_fiber_orbits(c)
    assert not check_local_injectivity(c)
    assert check_discreteness(c, 4).ok


def test_uncertified_scale_needs_abelian_mode(cycle4):
    pres = presentation(cycle4)
    stalled = tietze_simplify(FPGroup(1, ((1, 1, 1),)))
    with pytest.raises(UncertifiedError, match="abelian"):
        build_cover(pres, stalled, 2)


def test_abelian_mode_matches_free_mode_on_a_cycle(cycle4):
    a, b = _cover(cycle4, 6), _cover(cycle4, 6, mode="abelian")
    assert len(a.vertices) == len(b.vertices)
    assert b.deck_rank == 1


def test_dot_labels(cycle4):
    import pydot

    c = _cover(cycle4, 2)
    (g,) = pydot.graph_from_dot_data(c.to_dot())
    labels = sorted(n.get("label").strip('"') for n in g.get_nodes() if n.get("label"))
    want = sorted(f"{p}:{' '.join(map(str, w))}" for p, w in c.vertices)
    assert labels == want
    assert len(g.get_edges()) == len(c.edges)
