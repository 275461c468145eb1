"""Group actions on weighted graphs: orbits, fixed-point bases, sphericality.

Two kinds of oracle answer orbit questions:

* ``ExplicitAction`` holds permutation generators (vertex and edge maps).
  Group elements are produced by breadth-first closure when needed.
* ``RootedTreeOracle`` handles the full automorphism group of a biregular
  tree, seen through a ball around a root o.  Two tuples of walks from o lie
  in the same stabiliser orbit iff their vertex sequences agree after
  relabelling vertices by first appearance: any isomorphism of rooted finite
  subtrees extends to the whole (bi)regular tree.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .graph import NotTransitive, TruncationTooSmall, WeightedGraph
from .scalars import is_exact, to_float


class SymmetryError(ValueError):
    pass


class NotAutomorphism(SymmetryError):
    pass


class WeightNotPreserved(SymmetryError):
    pass


class NotSubfactorCandidate(SymmetryError):
    pass


# --- union-find ---------------------------------------------------------------

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


# --- oracles -----------------------------------------------------------------

class SymmetryOracle:
    kind = "abstract"
    graph: WeightedGraph
    base_vertex: str

    def canon_pair(self, a, b):
        raise NotImplementedError

    def source_reps(self, sign: str) -> list:
        raise NotImplementedError

    def vertex_orbits(self, graph=None) -> list:
        raise NotImplementedError


@dataclass(frozen=True)
class GroupElement:
    vperm: tuple  # vertex index -> vertex index
    eperm: tuple  # edge index -> edge index

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        # (self * other)(x) = self(other(x))
        return GroupElement(tuple(self.vperm[i] for i in other.vperm),
                            tuple(self.eperm[i] for i in other.eperm))

    def inverse(self) -> "GroupElement":
        vp = [0] * len(self.vperm)
        for i, j in enumerate(self.vperm):
            vp[j] = i
        ep = [0] * len(self.eperm)
        for i, j in enumerate(self.eperm):
            ep[j] = i
        return GroupElement(tuple(vp), tuple(ep))

    def oe(self, oe: int) -> int:
        return 2 * self.eperm[oe >> 1] + (oe & 1)

    def path(self, p: tuple) -> tuple:
        return (self.vperm[p[0]],) + tuple(2 * self.eperm[o >> 1] + (o & 1) for o in p[1:])


class ExplicitAction(SymmetryOracle):
    """Finite group given by generators acting on a finite graph."""

    kind = "explicit"

    def __init__(self, graph: WeightedGraph, generators, base_vertex: str | None = None,
                 max_order: int = 200000):
        self.graph = graph
        self.base_vertex = base_vertex or graph.even_vertices[0]
        self.generators = []
        for gen in generators:
            if isinstance(gen, GroupElement):
                self.generators.append(gen)
                continue
            vmap, emap = gen
            vperm = tuple(graph.index[vmap.get(v, v)] for v in graph.vertices)
            eperm = tuple(graph.edge_index[emap.get(e.id, e.id)] for e in graph.edges)
            self.generators.append(GroupElement(vperm, eperm))
        self.max_order = max_order
        self._elements = None

    @property
    def identity(self) -> GroupElement:
        g = self.graph
        return GroupElement(tuple(range(len(g.vertices))), tuple(range(len(g.edges))))

    def elements(self) -> list:
        """All group elements, identity first, in breadth-first order."""
        if self._elements is None:
            seen = {self.identity: None}
            order = [self.identity]
            queue = deque(order)
            while queue:
                x = queue.popleft()
                for s in self.generators:
                    y = s * x
                    if y not in seen:
                        seen[y] = None
                        order.append(y)
                        queue.append(y)
                        if len(order) > self.max_order:
                            raise SymmetryError("group closure exceeds max_order")
            self._elements = order
        return self._elements

    def generator_maps(self):
        g = self.graph
        return [({g.vid(i): g.vid(j) for i, j in enumerate(s.vperm)},
                 {g.edges[i].id: g.edges[j].id for i, j in enumerate(s.eperm)})
                for s in self.generators]

    def _orbit_partition(self, objects, act):
        idx = {o: i for i, o in enumerate(objects)}
        uf = _UnionFind(len(objects))
        for s in self.generators:
            for o in objects:
                img = act(s, o)
                if img not in idx:
                    raise SymmetryError("generator maps an object outside the enumerated set")
                uf.union(idx[o], idx[img])
        return [uf.find(i) for i in range(len(objects))]

    def vertex_orbits(self, graph=None) -> list:
        g = self.graph
        objs = list(range(len(g.vertices)))
        roots = self._orbit_partition(objs, lambda s, v: s.vperm[v])
        groups = {}
        for v, r in zip(objs, roots):
            groups.setdefault(r, []).append(g.vid(v))
        return sorted(groups.values(), key=lambda o: g.index[o[0]])

    def source_reps(self, sign: str) -> list:
        """One vertex per orbit of the given parity; the base vertex represents its orbit."""
        g = self.graph
        base = g.index[self.base_vertex]
        reps = []
        for orb in self.vertex_orbits():
            idx = [g.index[v] for v in orb]
            if g.is_even(idx[0]) != (sign == "+"):
                continue
            reps.append(base if base in idx else min(idx))
        return sorted(reps)

    def stabilizer(self, v: int) -> list:
        return [x for x in self.elements() if x.vperm[v] == v]

    def canon_pair(self, a, b):
        return min((x.path(a), x.path(b)) for x in self.elements())

    def canon_path(self, p):
        return min(x.path(p) for x in self.elements())


class RootedTreeOracle(SymmetryOracle):
    """Stabiliser of the root in the automorphism group of a biregular tree ball."""

    kind = "rooted_tree_canonical"

    def __init__(self, graph: WeightedGraph, root: str | None = None):
        self.graph = graph
        self.base_vertex = root or graph.center
        if self.base_vertex is None:
            raise SymmetryError("rooted oracle needs a root vertex")
        self.root = graph.index[self.base_vertex]
        self.dist = graph.distances_from(self.root)
        # an odd root for the minus-sign questions: the smallest neighbour
        self.odd_root = min(graph.tgt(oe) for oe in graph.out_edges(self.root))
        self.radius = graph.radius if graph.radius is not None else max(self.dist.values())

    def root_for(self, sign: str) -> int:
        return self.root if sign == "+" else self.odd_root

    def check_scope(self, n: int, sign: str = "+"):
        need = n + (0 if sign == "+" else 1)
        if need > self.radius:
            raise TruncationTooSmall(f"walks of length {n} leave the radius-{self.radius} ball")

    def canon_walks(self, *walks):
        g = self.graph
        labels = {}
        seq = []
        for w in walks:
            part = []
            for v in g.path_vertices(w):
                if v not in labels:
                    labels[v] = len(labels)
                part.append(labels[v])
            seq.append(tuple(part))
        return tuple(seq)

    def canon_pair(self, a, b):
        return self.canon_walks(a, b)

    def canon_path(self, p):
        return self.canon_walks(p)

    def source_reps(self, sign: str) -> list:
        return [self.root_for(sign)]

    def vertex_orbits(self, graph=None) -> list:
        # stabiliser orbits on vertices are the spheres around the root
        g = self.graph
        spheres = {}
        for v, d in self.dist.items():
            spheres.setdefault(d, []).append(g.vid(v))
        return [sorted(spheres[d], key=g.index.get) for d in sorted(spheres)]

    def edge_transitive(self) -> bool:
        return True


# --- validation -----------------------------------------------------------------

@dataclass
class ActionReport:
    ok: bool
    errors: list = field(default_factory=list)
    transitive_even: bool = False
    transitive_odd: bool = False
    order: int | None = None


def validate_action(g: WeightedGraph, s: SymmetryOracle, preserve_labels: bool = True) -> ActionReport:
    """Each generator must be a mu-preserving automorphism of the graph."""
    rep = ActionReport(ok=True)
    if isinstance(s, RootedTreeOracle):
        rep.transitive_even = rep.transitive_odd = True
        return rep
    for k, x in enumerate(s.generators):
        if sorted(x.vperm) != list(range(len(g.vertices))) or sorted(x.eperm) != list(range(len(g.edges))):
            rep.ok = False
            rep.errors.append(("NotAutomorphism", k, "maps are not bijections"))
            continue
        for v in range(len(g.vertices)):
            if g.is_even(v) != g.is_even(x.vperm[v]):
                rep.ok = False
                rep.errors.append(("NotAutomorphism", k, f"vertex {g.vid(v)} changes parity"))
                break
        for i, e in enumerate(g.edges):
            f = g.edges[x.eperm[i]]
            if g.index[f.source] != x.vperm[g.index[e.source]] or g.index[f.target] != x.vperm[g.index[e.target]]:
                rep.ok = False
                rep.errors.append(("NotAutomorphism", k, f"edge {e.id} incidence broken"))
                break
            if preserve_labels and f.label != e.label:
                rep.ok = False
                rep.errors.append(("NotAutomorphism", k, f"edge {e.id} label changed"))
                break
            if not _same(g.mu[e.id], g.mu[f.id], g.tol):
                rep.ok = False
                rep.errors.append(("WeightNotPreserved", k, f"edge {e.id}"))
                break
    if rep.ok:
        orbits = s.vertex_orbits()
        even = [o for o in orbits if g.index[o[0]] < g.n_even]
        odd = [o for o in orbits if g.index[o[0]] >= g.n_even]
        rep.transitive_even = len(even) == 1
        rep.transitive_odd = len(odd) == 1
        rep.order = len(s.elements())
    return rep


def _same(x, y, tol):
    if is_exact(x) and is_exact(y):
        return x == y
    return abs(to_float(x) - to_float(y)) <= tol


# --- orbit tables ---------------------------------------------------------------------

@dataclass
class OrbitTable:
    object_kind: str
    n: int
    sign: str
    representatives: list
    sizes: list
    index_of: dict
    scope: str = "global"

    @property
    def count(self) -> int:
        return len(self.representatives)


def _table_from_keys(kind, n, sign, objects, keys, scope):
    groups = {}
    for o, k in zip(objects, keys):
        groups.setdefault(k, []).append(o)
    classes = sorted((sorted(v) for v in groups.values()), key=lambda c: c[0])
    index_of = {}
    for i, c in enumerate(classes):
        for o in c:
            index_of[o] = i
    return OrbitTable(kind, n, sign, [c[0] for c in classes], [len(c) for c in classes], index_of, scope)


def orbits(g: WeightedGraph, s: SymmetryOracle, object_kind: str, n: int = 0, sign: str = "+") -> OrbitTable:
    """Partition of vertices, C_n or ST_n into orbits.

    Explicit actions see every object.  The rooted tree oracle only sees
    objects based at its root (scope "rooted"); since the full group is
    transitive on each vertex class, counts of ST orbits are unaffected.
    """
    if object_kind not in ("paths", "st_pairs", "vertices"):
        raise ValueError("object_kind must be paths, st_pairs or vertices")
    if isinstance(s, RootedTreeOracle):
        if object_kind == "vertices":
            objs = sorted(s.dist)
            return _table_from_keys("vertices", 0, sign, objs, [s.dist[v] for v in objs], "rooted")
        s.check_scope(n, sign)
        root = s.root_for(sign)
        walks = g.paths_from(root, n)
        if object_kind == "paths":
            return _table_from_keys("paths", n, sign, walks, [s.canon_walks(w) for w in walks], "rooted")
        pairs = [(a, b) for a in walks for b in walks if g.path_target(a) == g.path_target(b)]
        return _table_from_keys("st_pairs", n, sign, pairs, [s.canon_walks(a, b) for a, b in pairs], "rooted")
    if object_kind == "vertices":
        objs = list(range(len(g.vertices)))
        roots = s._orbit_partition(objs, lambda x, v: x.vperm[v])
        return _table_from_keys("vertices", 0, sign, objs, roots, "global")
    want_even = sign == "+"
    starts = [v for v in range(len(g.vertices)) if g.is_even(v) == want_even]
    walks = [p for v in starts for p in g.paths_from(v, n)]
    if object_kind == "paths":
        roots = s._orbit_partition(walks, lambda x, p: x.path(p))
        return _table_from_keys("paths", n, sign, walks, roots, "global")
    by_end = {}
    for p in walks:
        by_end.setdefault((p[0], g.path_target(p)), []).append(p)
    pairs = [(a, b) for blk in by_end.values() for a in blk for b in blk]
    roots = s._orbit_partition(pairs, lambda x, ab: (x.path(ab[0]), x.path(ab[1])))
    return _table_from_keys("st_pairs", n, sign, pairs, roots, "global")


def fixed_point_basis(g: WeightedGraph, s: SymmetryOracle, n: int, sign: str = "+"):
    """Orbit sums f_{a,b}; for the rooted oracle, their compression to the root block."""
    from .boxes import BoxElement

    table = orbits(g, s, "st_pairs", n, sign)
    members = [[] for _ in table.representatives]
    for obj, i in table.index_of.items():
        members[i].append(obj)
    return [BoxElement(g, n, sign, {ab: 1 for ab in sorted(m)}) for m in members]


def fixed_point_dim(g: WeightedGraph, s: SymmetryOracle, n: int, sign: str = "+") -> int:
    return orbits(g, s, "st_pairs", n, sign).count


# --- sphericality ---------------------------------------------------------------------

@dataclass
class SphericalityReport:
    spherical: bool
    rows: list  # (edge orbit rep id, sign, lhs, rhs, tau_l, tau_r, agree)
    counting_matches_traces: bool


def check_spherical(g: WeightedGraph, s: SymmetryOracle) -> SphericalityReport:
    """Edge-orbit counting test, cross-checked against tau_l and tau_r of f_{a,a}."""
    from .boxes import BoxElement, traces

    rep = validate_action(g, s, preserve_labels=False)
    if not (rep.transitive_even and rep.transitive_odd):
        raise NotTransitive("action must be transitive on V+ and V-")
    if isinstance(s, RootedTreeOracle):
        vp = s.root
        vm = s.odd_root
        edge_orbits = [list(range(2 * len(g.edges)))]
    else:
        vp = g.index[s.base_vertex] if g.is_even(g.index[s.base_vertex]) else g.index[g.even_vertices[0]]
        vm = g.index[g.odd_vertices[0]]
        objs = list(range(2 * len(g.edges)))
        roots = s._orbit_partition(objs, lambda x, oe: x.oe(oe))
        groups = {}
        for oe, r in zip(objs, roots):
            groups.setdefault(r, []).append(oe)
        edge_orbits = [sorted(v) for v in groups.values()]
    rows = []
    spherical = True
    agree_all = True
    for orbit in sorted(edge_orbits):
        for sign in "+-":
            members = [oe for oe in orbit if g.is_even(g.src(oe)) == (sign == "+")]
            if not members:
                continue
            a = members[0]
            v_src = vp if sign == "+" else vm
            v_tgt = vm if sign == "+" else vp
            n_src = sum(1 for oe in members if g.src(oe) == v_src)
            n_tgt = sum(1 for oe in members if g.tgt(oe) == v_tgt)
            lhs = g.mu_oe(a) * n_src
            rhs = g.mu_oe(a ^ 1) * n_tgt
            # direct evaluation on the orbit sum f_{a,a} (ST_1 diagonal part)
            f = BoxElement(g, 1, sign, {((g.src(oe), oe), (g.src(oe), oe)): 1 for oe in members})
            tl, tr, _ = traces(f)
            t_l = tl.values.get(v_tgt, 0)
            t_r = tr.values.get(v_src, 0)
            ok = _same(lhs, rhs, g.tol)
            agree = _same(t_l, rhs, g.tol) and _same(t_r, lhs, g.tol)
            spherical &= ok
            agree_all &= agree
            rows.append((g.edges[a >> 1].id, sign, lhs, rhs, t_l, t_r, agree))
    return SphericalityReport(spherical, rows, agree_all)


# --- stabilizers ------------------------------------------------------------------------

@dataclass
class StabilizerReport:
    base: str
    orbit_reps: list  # vertex ids, one per G_o-orbit on V+
    orbit_sizes: list  # [G_o : G_{o,go}]
    distances: list  # d(o, go) witnesses
    stabilizer_order: int | None
    scope: str


def stabilizer_data(g: WeightedGraph, s: SymmetryOracle, o: str | None = None) -> StabilizerReport:
    """G_o-orbits on V+ (double cosets G_o\\G/G_o) with indices and distances."""
    if isinstance(s, RootedTreeOracle):
        root = s.root
        dist = s.dist
        spheres = {}
        for v, d in dist.items():
            if g.is_even(v):
                spheres.setdefault(d, []).append(v)
        ds = sorted(spheres)
        return StabilizerReport(g.vid(root), [g.vid(min(spheres[d])) for d in ds],
                                [len(spheres[d]) for d in ds], ds, None, f"ball radius {s.radius}")
    rep = validate_action(g, s, preserve_labels=False)
    if not rep.transitive_even:
        raise NotTransitive("action must be transitive on V+")
    o = o or s.base_vertex
    ov = g.index[o]
    stab = s.stabilizer(ov)
    dist = g.distances_from(ov)
    seen = {}
    for v in range(g.n_even):
        if v in seen:
            continue
        orb = sorted({x.vperm[v] for x in stab})
        for w in orb:
            seen[w] = v
    classes = {}
    for w, r in seen.items():
        classes.setdefault(r, []).append(w)
    reps = sorted(classes, key=lambda r: (dist[r], r))
    return StabilizerReport(o, [g.vid(r) for r in reps], [len(classes[r]) for r in reps],
                            [dist[r] for r in reps], len(stab), "finite graph")
