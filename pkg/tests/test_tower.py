import itertools
import logging

import pytest

from ecover.groups import FPGroup
from ecover.metric import balls_chain_connected, euclidean_space
from ecover.presentation import loop_class
from ecover.spaces import circle, circle_sample, hawaiian_stage, paper_scale
from ecover.tower import (
    ScheduleError,
    Universality,
    analyze_scale,
    default_schedule,
    matmul,
    run_tower,
    theta,
    universality_check,
)


def test_dense_circle_theta_is_unit():
    sp = circle(2.0, 0.02)
    th = theta(analyze_scale(sp, 0.5), analyze_scale(sp, 0.3))
    assert th.matrix in (((1,),), ((-1,),))
    assert th.abelian_iso and th.surjective


def test_earring_stage_two_kills_one_generator():
    sp = hawaiian_stage(2, 1 / 32)
    # scales just above the tangency ties of the sample
    th = theta(analyze_scale(sp, 1.1 / 4), analyze_scale(sp, 1.1 / 8))
    assert (th.coarse_betti, th.fine_betti) == (1, 2)
    assert th.abelian_surjective and th.kernel_rank == 1
    assert th.folded_surjective


def test_theta_identity(cycle4):
    a = analyze_scale(cycle4)
    th = theta(a, a)
    assert th.matrix == ((1,),)


def test_theta_rejects_unnested(square):
    with pytest.raises(ScheduleError):
        theta(analyze_scale(square, 1.2), analyze_scale(square, 1.5))


def test_theta_rejects_other_space(square, hexagon):
    with pytest.raises(ScheduleError):
        theta(analyze_scale(hexagon, 1.5), analyze_scale(square, 1.2))


def test_circle_tower_is_stable():
    t = run_tower(circle_sample(60, radius=2.0), [1.9, 1.0, 0.5, 0.25])
    assert [a.invariants.betti for a in t.analyses] == [1, 1, 1, 1]
    assert t.stabilization == ("Stable", 1)
    assert t.critical == []


def test_earring_tower_climbs_to_stage_rank():
    sp = hawaiian_stage(3, 1 / 32)
    sched = [1.1 * paper_scale("hawaiian", n) for n in range(0, 4)]
    t = run_tower(sp, sched)
    betti = [a.invariants.betti for a in t.analyses]
    assert betti[0] in (0, 1) and betti[1:] == [1, 2, 3]
    assert all(m.kernel_rank == f - c for m, c, f in zip(t.maps, betti, betti[1:]))
    assert t.stabilization[0] == "NotStable"
    assert len(t.critical) >= 2


def test_two_clusters_flagged(caplog):
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    sp = euclidean_space(pts + [(x + 10, y) for x, y in pts])
    with caplog.at_level(logging.WARNING):
        t = run_tower(sp, [20.0, 1.2])
    assert [a.connected for a in t.analyses] == [True, False]
    assert "NotChainConnected" in caplog.text


def test_schedule_validation(square):
    with pytest.raises(ScheduleError):
        run_tower(square, [1.0, 1.5])
    with pytest.raises(ScheduleError):
        run_tower(square, [1.0, -1.0])


def test_fine_scale_below_spacing_warns(square):
    with pytest.warns(UserWarning, match="minimum spacing"):
        run_tower(square, [1.5, 0.5])


def test_default_schedule():
    sp = circle(2.0, 0.05)
    s = default_schedule(sp)
    assert s[0] == pytest.approx(sp.diameter / 2)
    assert s[-1] >= 2 * sp.min_spacing > s[-1] / 2
    assert all(b == pytest.approx(a / 2) for a, b in zip(s, s[1:]))


def test_default_schedule_on_sparse_space(square):
    # half the diameter is already below twice the spacing
    assert default_schedule(square) == [pytest.approx(square.diameter / 2)]


def test_universality_k4(k4):
    assert universality_check(analyze_scale(k4)).verdict is Universality.CERTIFIED


def test_universality_cycle(cycle4):
    from ecover.presentation import presentation

    v = universality_check(presentation(cycle4))
    assert v.verdict is Universality.REFUTED
    assert v.witness_word == (1,)
    assert v.witness[0] == v.witness[-1] == 0


def test_universality_inconclusive_when_tietze_stalls():
    g = FPGroup(2, ((1, 2, -1, -2, -2), (2, 1, -2, -1, -1)))
    assert universality_check(g).verdict is Universality.INCONCLUSIVE


def test_universality_refutes_torsion():
    v = universality_check(FPGroup(2, ((1, 1, 1), (2,))))
    assert v.verdict is Universality.REFUTED and v.witness_word == (1,)


def _acceptance_towers():
    yield run_tower(circle_sample(60, radius=2.0), [1.9, 1.0, 0.5, 0.25])
    yield run_tower(hawaiian_stage(3, 1 / 32), [1.1 * paper_scale("hawaiian", n) for n in range(4)])


@pytest.fixture(scope="module")
def towers():
    return list(_acceptance_towers())


def test_functoriality(towers):
    for t in towers:
        for i, j, k in itertools.combinations(range(len(t.analyses)), 3):
            direct = theta(t.analyses[i], t.analyses[k]).matrix
            assert [list(r) for r in direct] == matmul(t.composite(i, j), t.composite(j, k), inner=t.analyses[j].invariants.betti)


def test_surjective_when_balls_connected(towers):
    for t in towers:
        for (a, b), m in zip(zip(t.analyses, t.analyses[1:]), t.maps):
            if a.flag.value == b.flag.value == "FreeCertified" and balls_chain_connected(a.graph, b.graph):
                assert m.folded_surjective


def test_coarse_rank_bounded_by_fine_generators(towers):
    for t in towers:
        for a, b in zip(t.analyses, t.analyses[1:]):
            assert a.invariants.betti <= b.pres.ngens


def test_winding_is_natural_across_scales():
    sp = circle_sample(60, radius=2.0)
    coarse, fine = analyze_scale(sp, 0.5), analyze_scale(sp, 0.25)
    th = theta(coarse, fine)
    loop = list(range(60)) + [0]
    fine_coords = fine.basis.coordinates(loop_class(fine.pres, loop).word)
    coarse_coords = coarse.basis.coordinates(loop_class(coarse.pres, loop).word)
    assert tuple(sum(r[j] * fine_coords[j] for j in range(len(fine_coords))) for r in th.matrix) == coarse_coords


def test_threads_do_not_change_the_report(monkeypatch):
    sp = circle_sample(60, radius=2.0)
    monkeypatch.setenv("EC_THREADS", "1")
    a = run_tower(sp, [1.0, 0.5, 0.25]).to_json()
    monkeypatch.setenv("EC_THREADS", "4")
    b = run_tower(sp, [1.0, 0.5, 0.25]).to_json()
    assert a == b
