from itertools import combinations
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from bgpa import builders
from bgpa.builders import BuilderSpec, InvalidParameters
from bgpa.graph import validate_weight
from bgpa.groups import named_group
from bgpa.scalars import QScalar
from bgpa.symmetry import check_spherical, validate_action


def _noncrossing_brute(n):
    """Perfect matchings of 2n points on a line with no two arcs interleaving."""
    pts = list(range(2 * n))

    def all_matchings(rest):
        if not rest:
            yield []
            return
        a = rest[0]
        for i in range(1, len(rest)):
            for m in all_matchings(rest[1:i] + rest[i + 1:]):
                yield [(a, rest[i])] + m

    def crossing(p, q):
        (a, b), (c, d) = sorted(p), sorted(q)
        return a < c < b < d or c < a < d < b

    return sum(1 for m in all_matchings(pts)
               if not any(crossing(p, q) for p, q in combinations(m, 2)))


@pytest.mark.parametrize("n", range(1, 6))
def test_tl_oracle_counts(n):
    assert builders.tl_dim_oracle(n) == _noncrossing_brute(n) == comb(2 * n, n) // (n + 1)


@pytest.mark.parametrize("make,delta", [
    (lambda: builders.diagonal("Z2"), QScalar(2)),
    (builders.bh_s3, QScalar(0, 1, 6)),
    (lambda: builders.biregular_tree(3, 3, 6), QScalar(3)),
    (lambda: builders.multi_edge(4), QScalar(4)),
])
def test_builder_weights(make, delta):
    b = make()
    rep = validate_weight(b.graph)
    assert rep.ok and rep.exact and b.graph.delta == delta
    g = b.graph
    assert all(g.mu_oe(2 * i) * g.mu_oe(2 * i + 1) == 1 for i in range(len(g.edges)))
    assert validate_action(g, b.action).ok


@given(st.sampled_from(["Z2", "Z3", "Z4", "S3"]))
def test_diagonal_is_spherical_and_transitive(name):
    b = builders.diagonal(name)
    order = named_group(name).order
    assert len(b.graph.even_vertices) == order == len(b.graph.odd_vertices)
    rep = validate_action(b.graph, b.action)
    assert rep.transitive_even and rep.transitive_odd and rep.order == order
    assert check_spherical(b.graph, b.action).spherical


def test_diagonal_custom_generators():
    g = named_group("Z3")
    b = builders.diagonal(g, [g.generators[0], g.generators[0], g.identity])
    assert b.graph.delta == 3 and validate_weight(b.graph).ok
    labels = sorted(e.label for e in b.graph.edges if e.source == "+0")
    assert labels == [1, 1, 2]  # the doubled generator gives a labelled parallel pair
    with pytest.raises(InvalidParameters):
        builders.diagonal(g, [g.generators[0]])


def test_group_element_action_matches_generators():
    b = builders.diagonal("S3")
    gens = b.action.generators
    for h, x in zip(b.group.generators, gens):
        assert builders.group_element_action(b, h) == x


@given(st.integers(2, 4), st.integers(2, 4), st.integers(2, 6))
def test_tree_sphere_sizes(rp, rm, radius):
    b = builders.biregular_tree(rp, rm, radius)
    g = b.graph
    dist = g.distances_from(g.index[g.center])
    counts = [0] * (radius + 1)
    for d in dist.values():
        counts[d] += 1
    assert counts == builders.tree_sphere_sizes(rp, rm, radius)
    assert validate_weight(g).ok and g.delta == QScalar.sqrt_of(rp * rm)


def test_multi_edge_group():
    b = builders.multi_edge(4, with_group=True)
    assert len(b.action.elements()) == factorial(4)
    assert validate_action(b.graph, b.action, preserve_labels=False).ok


def test_invalid_parameters():
    with pytest.raises(InvalidParameters):
        builders.multi_edge(0)
    with pytest.raises(InvalidParameters):
        builders.biregular_tree(1, 3, 4)
    with pytest.raises(InvalidParameters):
        builders.build(BuilderSpec("hexagon"))
    with pytest.raises(InvalidParameters):
        builders.tl_dim_oracle(13)


def test_build_dispatch():
    assert builders.build(BuilderSpec("bisch_haagerup")).graph.delta == QScalar(0, 1, 6)
    b = builders.build(BuilderSpec("biregular_tree", {"r_plus": 2, "r_minus": 3, "radius": 4}))
    assert b.info["r_minus"] == 3
    assert builders.build(BuilderSpec("multi_edge", {"n": 3})).graph.delta == 3
