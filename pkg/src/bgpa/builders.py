"""Example weighted graphs with their symmetry oracles.

* diagonal: V+ and V- are copies of a finite group G, edges v+_g -> v-_{g g_i}.
* bisch_haagerup: V+ = G/H, V- = G/K, one edge e_g joining gH and gK.
* biregular_tree: ball in the (r+, r-)-biregular tree around an even root.
* multi_edge: n parallel edges between two vertices.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Edge, GraphError, WeightedGraph, load_graph
from .groups import PermGroup, named_group, pmul
from .scalars import QScalar
from .symmetry import ExplicitAction, GroupElement, RootedTreeOracle


class InvalidParameters(GraphError):
    pass


@dataclass
class BuilderSpec:
    kind: str  # diagonal | bisch_haagerup | biregular_tree | multi_edge | custom_file
    params: dict = field(default_factory=dict)


@dataclass
class Built:
    graph: WeightedGraph
    action: object  # SymmetryOracle or None
    group: PermGroup | None = None
    info: dict = field(default_factory=dict)


# --- diagonal ----------------------------------------------------------------------

def diagonal(group: PermGroup | str, gens: list | None = None) -> Built:
    """Diagonal graph of G with g_1..g_{n+1}, g_{n+1} = 1; mu = 1, delta = n + 1.

    Without ``gens`` the group generators followed by the identity are used.
    """
    if isinstance(group, str):
        group = named_group(group)
    els = group.elements
    if gens is None:
        gens = list(group.generators) + [group.identity]
    gens = [tuple(x) for x in gens]
    if not gens or gens[-1] != group.identity:
        raise InvalidParameters("the last generator must be the identity")
    if any(x not in group for x in gens):
        raise InvalidParameters("generators must lie in the group")
    idx = group.index
    even = [f"+{i}" for i in range(len(els))]
    odd = [f"-{i}" for i in range(len(els))]
    edges = []
    count = {}
    for i, g in enumerate(els):
        for j, x in enumerate(gens):
            t = idx[pmul(g, x)]
            lab = count.get((i, t), 0) + 1
            count[(i, t)] = lab
            edges.append(Edge(f"e{i}_{j}", even[i], odd[t], lab))
    mu = {e.id: QScalar(1) for e in edges}
    g = WeightedGraph(even, odd, edges, mu, delta=QScalar(len(gens)))
    # left multiplication v_g -> v_{hg}, e_{g,j} -> e_{hg,j}
    actions = []
    for h in group.generators:
        vmap = {}
        emap = {}
        for i, x in enumerate(els):
            k = idx[pmul(h, x)]
            vmap[even[i]] = even[k]
            vmap[odd[i]] = odd[k]
            for j in range(len(gens)):
                emap[f"e{i}_{j}"] = f"e{k}_{j}"
        actions.append((vmap, emap))
    act = ExplicitAction(g, actions, base_vertex=even[0])
    return Built(g, act, group, {"kind": "diagonal", "group": group.name, "n_gens": len(gens)})


def group_element_action(built: Built, h: tuple) -> GroupElement:
    """Left multiplication by h on a diagonal builder as a GroupElement."""
    g, group = built.graph, built.group
    els, idx = group.elements, group.index
    n = len(els)
    vperm = [0] * len(g.vertices)
    for i, x in enumerate(els):
        k = idx[pmul(h, x)]
        vperm[i] = k
        vperm[n + i] = n + k
    m = built.info["n_gens"]
    eperm = [0] * len(g.edges)
    for i, x in enumerate(els):
        k = idx[pmul(h, x)]
        for j in range(m):
            eperm[g.edge_index[f"e{i}_{j}"]] = g.edge_index[f"e{k}_{j}"]
    return GroupElement(tuple(vperm), tuple(eperm))


# --- Bisch-Haagerup -------------------------------------------------------------------

def bisch_haagerup(ambient: PermGroup, h_gens, k_gens) -> Built:
    """Coset graph of G = <H, K>: V+ = G/H, V- = G/K, mu = sqrt(|K|/|H|)."""
    h = ambient.subgroup(h_gens, "H")
    k = ambient.subgroup(k_gens, "K")
    if set(h.elements) & set(k.elements) != {ambient.identity}:
        raise InvalidParameters("H and K must intersect trivially")
    group = ambient.subgroup(list(h.generators) + list(k.generators), "G")
    hc = group.left_cosets(h)
    kc = group.left_cosets(k)
    h_of = {x: i for i, c in enumerate(hc) for x in c}
    k_of = {x: i for i, c in enumerate(kc) for x in c}
    even = [f"+{i}" for i in range(len(hc))]
    odd = [f"-{i}" for i in range(len(kc))]
    edges = [Edge(f"e{i}", even[h_of[x]], odd[k_of[x]], 1) for i, x in enumerate(group.elements)]
    mu_val = QScalar.sqrt_of(Fraction(k.order, h.order))
    delta = QScalar.sqrt_of(h.order * k.order)
    g = WeightedGraph(even, odd, edges, {e.id: mu_val for e in edges}, delta=delta)
    gidx = group.index
    actions = []
    for s in group.generators:
        vmap = {}
        for i, c in enumerate(hc):
            vmap[even[i]] = even[h_of[pmul(s, c[0])]]
        for i, c in enumerate(kc):
            vmap[odd[i]] = odd[k_of[pmul(s, c[0])]]
        emap = {f"e{i}": f"e{gidx[pmul(s, x)]}" for i, x in enumerate(group.elements)}
        actions.append((vmap, emap))
    act = ExplicitAction(g, actions, base_vertex=even[h_of[group.identity]])
    return Built(g, act, group, {"kind": "bisch_haagerup", "H": h.order, "K": k.order,
                                 "G": group.order})


# --- biregular tree --------------------------------------------------------------------

def biregular_tree(r_plus: int, r_minus: int, radius: int) -> Built:
    """Ball of the (r+, r-)-biregular tree around an even root."""
    if r_plus < 2 or r_minus < 2 or radius < 2:
        raise InvalidParameters("need r+, r- >= 2 and radius >= 2")
    depth = [0]
    parent = [None]
    queue = deque([0])
    while queue:
        v = queue.popleft()
        if depth[v] == radius:
            continue
        even = depth[v] % 2 == 0
        children = (r_plus if even else r_minus) - (0 if v == 0 else 1)
        for _ in range(children):
            depth.append(depth[v] + 1)
            parent.append(v)
            queue.append(len(depth) - 1)
    name = [f"t{i}" for i in range(len(depth))]
    even_v = [name[i] for i in range(len(depth)) if depth[i] % 2 == 0]
    odd_v = [name[i] for i in range(len(depth)) if depth[i] % 2 == 1]
    edges = []
    for c in range(1, len(depth)):
        p = parent[c]
        s, t = (p, c) if depth[p] % 2 == 0 else (c, p)
        edges.append(Edge(f"a{c}", name[s], name[t], 1))
    mu_val = QScalar.sqrt_of(Fraction(r_minus, r_plus))
    delta = QScalar.sqrt_of(r_plus * r_minus)
    boundary = [name[i] for i in range(len(depth)) if depth[i] == radius]
    g = WeightedGraph(even_v, odd_v, edges, {e.id: mu_val for e in edges}, delta=delta,
                      boundary=boundary, center=name[0], radius=radius)
    return Built(g, RootedTreeOracle(g, name[0]), None,
                 {"kind": "biregular_tree", "r_plus": r_plus, "r_minus": r_minus, "radius": radius})


def tree_sphere_sizes(r_plus: int, r_minus: int, radius: int) -> list:
    """|S_d| around an even root, d = 0..radius (closed form)."""
    out = [1]
    for d in range(1, radius + 1):
        prev_even = (d - 1) % 2 == 0
        branch = (r_plus if prev_even else r_minus) - (0 if d == 1 else 1)
        out.append(out[-1] * branch)
    return out


# --- multi edge ---------------------------------------------------------------------------

def multi_edge(n: int, with_group: bool = False) -> Built:
    """n parallel edges, mu = 1, delta = n; optional S_n permuting the edges."""
    if n < 1:
        raise InvalidParameters("n must be >= 1")
    edges = [Edge(f"e{i}", "+0", "-0", i + 1) for i in range(n)]
    g = WeightedGraph(["+0"], ["-0"], edges, {e.id: QScalar(1) for e in edges}, delta=QScalar(n))
    act = None
    group = None
    if with_group:
        from .groups import symmetric
        group = symmetric(n)
        gens = [({}, {f"e{i}": f"e{p[i]}" for i in range(n)}) for p in group.generators]
        act = ExplicitAction(g, gens, base_vertex="+0")
    else:
        act = ExplicitAction(g, [], base_vertex="+0")
    return Built(g, act, group, {"kind": "multi_edge", "n": n})


# --- files and dispatch -----------------------------------------------------------------------

def from_file(path: str) -> Built:
    g, gens = load_graph(path)
    act = ExplicitAction(g, gens or [], base_vertex=g.even_vertices[0])
    return Built(g, act, None, {"kind": "custom_file", "path": path})


def build(spec: BuilderSpec) -> Built:
    p = spec.params
    if spec.kind == "diagonal":
        return diagonal(p.get("group", "Z2"), p.get("gens"))
    if spec.kind == "bisch_haagerup":
        if "ambient" in p:
            return bisch_haagerup(p["ambient"], p["h_gens"], p["k_gens"])
        return bh_s3()
    if spec.kind == "biregular_tree":
        return biregular_tree(p.get("r_plus", 3), p.get("r_minus", 3), p.get("radius", 6))
    if spec.kind == "multi_edge":
        return multi_edge(p.get("n", 2), p.get("with_group", False))
    if spec.kind == "custom_file":
        return from_file(p["path"])
    raise InvalidParameters(f"unknown builder kind {spec.kind!r}")


def bh_s3() -> Built:
    """G = S3, H = <(0 1)>, K = <(0 1 2)>."""
    from .groups import from_cycles, symmetric
    return bisch_haagerup(symmetric(3), [from_cycles(3, (0, 1))], [from_cycles(3, (0, 1, 2))])


# --- Temperley-Lieb diagram count ---------------------------------------------------------------

def tl_dim_oracle(n: int) -> int:
    """Number of non-crossing perfect matchings of 2n points, by enumeration."""
    if n > 12:
        raise InvalidParameters("tl_dim_oracle supports n <= 12")

    def matchings(points):
        if not points:
            yield ()
            return
        first = points[0]
        # partner at odd offset keeps both sides even, hence non-crossing
        for j in range(1, len(points), 2):
            for left in matchings(points[1:j]):
                for right in matchings(points[j + 1:]):
                    yield ((first, points[j]),) + left + right

    return sum(1 for _ in matchings(tuple(range(2 * n))))
