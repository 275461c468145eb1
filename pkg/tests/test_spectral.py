import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bgpa import builders
from bgpa.spectral import (
    NotNonnegative, amenability_verdict, bratteli_P, bratteli_Q, finite_depth_check, graph_norm,
    matrix_norm, tree_ball_sequence, tree_norm_below_delta, tree_norm_closed_form,
)
from bgpa.symmetry import ExplicitAction, fixed_point_dim


def test_four_cycle_level_zero(diag_z2):
    bd = bratteli_P(diag_z2.graph, 0).to_dict()
    assert bd["level_n_dims"] == [1, 1] and bd["level_np1_dims"] == [1, 1, 1, 1]
    assert bd["multiplicity"] == [[1, 1, 0, 0], [0, 0, 1, 1]]


def test_parallel_edges_single_arrow():
    bd = bratteli_P(builders.multi_edge(4).graph, 0)
    assert bd.multiplicity.tolist() == [[4]] and bd.trace_consistent


def test_tree_level_one_is_radius_two_subtree():
    bd = bratteli_P(builders.biregular_tree(3, 3, 6).graph, 1)
    assert bd.multiplicity.max() == 1 and len(bd.level_np1) == 1 + 3 * 2
    assert bd.trace_consistent


@pytest.mark.parametrize("n", [0, 1, 2])
def test_trivial_group_q_equals_p(n):
    b = builders.multi_edge(3)
    p, q = bratteli_P(b.graph, n).to_dict(), bratteli_Q(b.graph, b.action, n).to_dict()
    for key in ("level_n_dims", "level_np1_dims", "multiplicity"):
        assert p[key] == q[key]


def test_diagonal_q_level_zero(diag_z2):
    bd = bratteli_Q(diag_z2.graph, diag_z2.action, 0)
    assert bd.multiplicity.tolist() == [[1, 1]] and bd.trace_consistent


@pytest.mark.parametrize("make,n_max", [(lambda: builders.diagonal("Z2"), 3), (builders.bh_s3, 3),
                                        (lambda: builders.multi_edge(3, True), 3),
                                        (lambda: builders.biregular_tree(3, 3, 6), 3)])
def test_q_summands_match_orbit_dimensions(make, n_max):
    # sum of squared summand dimensions equals the orbit count at each level
    b = make()
    for n in range(n_max):
        bd = bratteli_Q(b.graph, b.action, n)
        if len(b.action.source_reps("+")) == 1:
            assert sum(s["dim"] ** 2 for s in bd.level_np1) == fixed_point_dim(b.graph, b.action, n + 1)
        assert bd.trace_consistent
        assert (bd.multiplicity >= 0).all()


def test_tree_q_diagrams_frozen():
    b = builders.biregular_tree(3, 3, 6)
    dims = [[s["dim"] for s in bratteli_Q(b.graph, b.action, n).level_np1] for n in range(3)]
    assert dims == [[1], [1, 1, 1], [1, 1, 1, 3]]


def test_norm_examples(diag_z2):
    est = graph_norm(diag_z2.graph)
    assert abs(est.lower - 2) < 1e-9 and abs(est.upper - 2) < 1e-9
    est = graph_norm(builders.multi_edge(1).graph)
    assert abs(est.lower - 1) < 1e-9
    with pytest.raises(NotNonnegative):
        matrix_norm(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_tree_closed_form_and_ball_sequence():
    assert tree_norm_closed_form(3, 3) == pytest.approx(2 * math.sqrt(2))
    assert tree_norm_below_delta(3, 3) and not tree_norm_below_delta(2, 2)
    seq = tree_ball_sequence(3, 3, range(2, 13))
    lows = [x for _, x in seq]
    assert all(a <= b + 1e-12 for a, b in zip(lows, lows[1:]))
    assert lows[-1] < 2 * math.sqrt(2)
    assert lows[-1] == pytest.approx(2.7722226571743764, abs=1e-9)  # frozen radius-12 value


@given(st.integers(1, 4), st.integers(1, 4))
def test_ball_lower_below_closed_form(a, b):
    rp, rm = a + 1, b + 1
    (_, low), = tree_ball_sequence(rp, rm, [6])
    assert low <= tree_norm_closed_form(rp, rm) + 1e-9


@pytest.mark.parametrize("make", [lambda: builders.diagonal("Z2"), builders.bh_s3,
                                  lambda: builders.multi_edge(3, True), lambda: builders.diagonal("S3")])
def test_norm_chain_and_monotone(make):
    b = make()
    gamma = graph_norm(b.graph, b.info)
    assert abs(gamma.upper - gamma.lower) < 1e-9
    prev = 0.0
    for n in range(4):
        q = bratteli_Q(b.graph, b.action, n).norm()
        p = bratteli_P(b.graph, n).norm()
        assert q <= p + 1e-9 <= gamma.upper + 2e-9
        assert q >= prev - 1e-9
        prev = q


def test_verdicts(diag_z2):
    t = builders.biregular_tree(3, 3, 6)
    assert amenability_verdict(t.graph, t.action, t.info).verdict == "NonAmenableCertified"
    v = amenability_verdict(diag_z2.graph, diag_z2.action, diag_z2.info)
    assert v.verdict == "AmenableObserved" and abs(v.q_norms[-1][1] - 2) < 1e-6
    bad = diag_z2.graph.with_mu(diag_z2.graph.mu, delta=3)
    act = ExplicitAction(bad, diag_z2.action.generator_maps(), base_vertex="+0")
    v = amenability_verdict(bad, act, {})
    assert v.verdict == "Inconclusive" and v.explanation


def test_finite_depth_examples(diag_z2):
    rep = finite_depth_check(diag_z2.graph, diag_z2.action)
    assert rep.finite_depth and rep.double_cosets == 2
    t = builders.biregular_tree(3, 3, 10)
    counts = [finite_depth_check(builders.biregular_tree(3, 3, r).graph,
                                 builders.biregular_tree(3, 3, r).action).double_cosets
              for r in (4, 6, 8)]
    assert counts == sorted(counts) and counts[0] < counts[-1]
    assert finite_depth_check(t.graph, t.action).double_cosets >= 6
    assert finite_depth_check(t.graph, t.action).finite_depth is None
    e = builders.multi_edge(1)
    assert finite_depth_check(e.graph, e.action).double_cosets == 1
