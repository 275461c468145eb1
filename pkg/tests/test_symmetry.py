import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bgpa import builders
from bgpa.boxes import BoxElement
from bgpa.graph import Edge, WeightedGraph
from bgpa.symmetry import (
    ExplicitAction, NotTransitive, check_spherical, fixed_point_basis, fixed_point_dim, orbits,
    stabilizer_data, validate_action,
)



def apply(x: BoxElement, h) -> BoxElement:
    return BoxElement(x.graph, x.n, x.sign, {(h.path(a), h.path(b)): v for (a, b), v in x.entries.items()})


def is_invariant(x: BoxElement, s) -> bool:
    return all(apply(x, h).equals(x) for h in s.generators)


def test_diagonal_action_valid_and_transitive(diag_z2):
    rep = validate_action(diag_z2.graph, diag_z2.action)
    assert rep.ok and rep.transitive_even and rep.transitive_odd and rep.order == 2


def test_parity_violation_rejected(diag_z2):
    g = diag_z2.graph
    vmap = {"+0": "-0", "-0": "+0", "+1": "+1", "-1": "-1"}
    bad = ExplicitAction(g, [(vmap, {e.id: e.id for e in g.edges})], base_vertex="+0")
    rep = validate_action(g, bad)
    assert not rep.ok and rep.errors[0][0] == "NotAutomorphism"


def test_weight_change_rejected():
    # swapping the endpoints of a path graph x0-y-x1 is fine until the weights differ
    edges = [Edge("a", "x0", "y", 1), Edge("b", "x1", "y", 1)]
    from bgpa.scalars import QScalar
    g = WeightedGraph(["x0", "x1"], ["y"], edges, {"a": QScalar(1), "b": QScalar(2)}, delta=QScalar(3))
    act = ExplicitAction(g, [({"x0": "x1", "x1": "x0", "y": "y"}, {"a": "b", "b": "a"})])
    rep = validate_action(g, act)
    assert not rep.ok and rep.errors[0][0] == "WeightNotPreserved"


def test_identity_group_single_edge():
    b = builders.multi_edge(1)
    rep = validate_action(b.graph, b.action)
    assert rep.ok and rep.transitive_even and rep.transitive_odd and rep.order == 1


def test_diagonal_st1_orbits(diag_z2):
    t = orbits(diag_z2.graph, diag_z2.action, "st_pairs", 1)
    assert t.count == 2 and t.sizes == [2, 2]


@pytest.mark.parametrize("n", [0, 1, 2])
def test_trivial_group_orbits_are_singletons(n):
    b = builders.multi_edge(3)
    t = orbits(b.graph, b.action, "st_pairs", n)
    assert t.count == len(t.index_of) and set(t.sizes) == {1}
    for f in fixed_point_basis(b.graph, b.action, n):
        assert len(f.entries) == 1


@given(st.sampled_from(["Z2", "Z3", "S3"]), st.integers(0, 2), st.sampled_from("+-"),
       st.integers(0, 10**6))
def test_orbit_table_consistency(name, n, sign, seed):
    b = builders.diagonal(name)
    t = orbits(b.graph, b.action, "st_pairs", n, sign)
    assert sum(t.sizes) == len(t.index_of)
    members = {}
    for obj, i in t.index_of.items():
        members.setdefault(i, []).append(obj)
    for i, rep in enumerate(t.representatives):
        assert rep == min(members[i])
    rng = random.Random(seed)
    objs = list(t.index_of)
    for _ in range(5):
        x = rng.choice(objs)
        for h in b.action.elements():
            img = (h.path(x[0]), h.path(x[1]))
            assert t.index_of[img] == t.index_of[x]


@pytest.mark.parametrize("make", [lambda: builders.diagonal("Z2"), builders.bh_s3,
                                  lambda: builders.multi_edge(3, True)])
def test_fixed_point_span_closed(make):
    b = make()
    g, s = b.graph, b.action
    rng = random.Random(0)
    for n in (1, 2):
        basis = fixed_point_basis(g, s, n)
        assert len(basis) == fixed_point_dim(g, s, n)
        for _ in range(4):
            x = sum((f.scale(rng.randint(-2, 2)) for f in basis), basis[0].scale(0))
            y = sum((f.scale(rng.randint(-2, 2)) for f in basis), basis[0].scale(0))
            assert is_invariant(x * y, s) and is_invariant(x.adjoint(), s)


def test_diagonal_dims(diag_z2):
    assert [fixed_point_dim(diag_z2.graph, diag_z2.action, n) for n in (1, 2)] == [2, 8]


def test_transitive_action_has_one_dimensional_q0():
    for b in (builders.diagonal("S3"), builders.bh_s3()):
        assert fixed_point_dim(b.graph, b.action, 0, "+") == 1
        assert fixed_point_dim(b.graph, b.action, 0, "-") == 1


def _subtree_swap_orbits(radius: int, n: int) -> int:
    """Orbit count of rooted ST_n pairs under subtree-swap generators of the ball.

    Independent of the canonical-form oracle: the root stabilizer of the ball is
    generated by swapping sibling subtrees, and the orbits are found by
    union-find over those generators.
    """
    g = builders.biregular_tree(3, 3, radius).graph
    root = g.index[g.center]
    dist = g.distances_from(root)
    children = {v: sorted(g.tgt(oe) for oe in g.out_edges(v) if dist[g.tgt(oe)] == dist[v] + 1)
                for v in dist}

    def match(u, w, out):
        out[u] = w
        for cu, cw in zip(children[u], children[w]):
            match(cu, cw, out)

    gens = []
    for v, cs in children.items():
        for c1, c2 in zip(cs, cs[1:]):
            m = {}
            match(c1, c2, m)
            m.update({w: u for u, w in list(m.items())})
            gens.append(m)
    walks = [tuple(g.path_vertices(p)) for p in g.paths_from(root, n)]
    pairs = [(a, b) for a in walks for b in walks if a[-1] == b[-1]]
    parent = {p: p for p in pairs}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for m in gens:
        for a, b in pairs:
            img = (tuple(m.get(v, v) for v in a), tuple(m.get(v, v) for v in b))
            parent[find((a, b))] = find(img)
    return len({find(p) for p in pairs})


def test_tree_dims_match_subtree_swap_oracle():
    b = builders.biregular_tree(3, 3, 4)
    dims = [fixed_point_dim(b.graph, b.action, n) for n in range(1, 5)]
    assert dims == [_subtree_swap_orbits(4, n) for n in range(1, 5)]
    assert dims == [1, 3, 12, 55]  # frozen from the oracle above


def test_tree_st2_orbits():
    b = builders.biregular_tree(3, 3, 4)
    assert orbits(b.graph, b.action, "st_pairs", 2).count == 3


def test_sphericality_examples(diag_z2, bh):
    from bgpa.scalars import QScalar
    for b in (diag_z2, bh, builders.biregular_tree(3, 3, 4)):
        rep = check_spherical(b.graph, b.action)
        assert rep.spherical and rep.counting_matches_traces
    assert bh.graph.mu["e0"] == QScalar.sqrt_of(Fraction(3, 2))
    g1 = bh.graph.with_mu({e.id: 1 for e in bh.graph.edges}, delta=3)
    a1 = ExplicitAction(g1, bh.action.generator_maps(), base_vertex=bh.action.base_vertex)
    rep = check_spherical(g1, a1)
    assert not rep.spherical and rep.counting_matches_traces


def test_spherical_requires_transitivity():
    edges = [Edge("a", "x0", "y", 1), Edge("b", "x1", "y", 1)]
    g = WeightedGraph(["x0", "x1"], ["y"], edges, {"a": 1, "b": 1}, delta=2)
    with pytest.raises(NotTransitive):
        check_spherical(g, ExplicitAction(g, []))


def test_stabilizer_examples(diag_z2):
    sd = stabilizer_data(diag_z2.graph, diag_z2.action)
    assert sd.stabilizer_order == 1 and len(sd.orbit_reps) == 2 and sd.orbit_sizes == [1, 1]
    t = builders.biregular_tree(3, 3, 8)
    sd = stabilizer_data(t.graph, t.action)
    assert sd.orbit_sizes[:4] == [1, 6, 24, 96] and sd.distances[:4] == [0, 2, 4, 6]
    s3 = builders.diagonal("S3")
    assert len(stabilizer_data(s3.graph, s3.action).orbit_reps) <= len(s3.graph.even_vertices)
