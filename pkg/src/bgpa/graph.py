"""Weighted bipartite multigraphs, vertex weights and path enumeration.

Conventions
-----------
Vertices carry string ids and an internal index.  Edges always run from an
even vertex (V+) to an odd vertex (V-); mu is stored for that orientation
and the reverse orientation carries 1/mu.

An oriented edge is an int: ``2*i`` walks edge i forward (even -> odd),
``2*i + 1`` walks it backward.  A path is a tuple ``(v0, oe1, ..., oen)``:
its start vertex index followed by oriented edges, so length-0 paths are
just ``(v,)``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .scalars import QScalar, format_qscalar, inv, is_exact, parse_qscalar, to_float

Path = tuple


class GraphError(ValueError):
    pass


class InconsistentMu(GraphError):
    pass


class RowSumMismatch(GraphError):
    pass


class NotConnected(GraphError):
    pass


class TruncationTooSmall(GraphError):
    pass


class NotTransitive(GraphError):
    pass


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    label: int = 1


def _eq(x, y, tol: float) -> bool:
    if is_exact(x) and is_exact(y):
        return x == y
    return abs(to_float(x) - to_float(y)) <= tol * max(1.0, abs(to_float(y)))


def _q(x) -> QScalar:
    return x if isinstance(x, QScalar) else QScalar(x)


def _le(x, y, tol: float) -> bool:
    if is_exact(x) and is_exact(y):
        return _q(x) <= _q(y)
    return to_float(x) <= to_float(y) + tol * max(1.0, abs(to_float(y)))


class WeightedGraph:
    """Bipartite multigraph with edge weight mu and modulus delta.

    ``boundary`` lists vertices where the row-sum axiom is waived (the frontier
    of a truncated ball).  ``center``/``radius`` record the ball, if any.
    """

    def __init__(
        self,
        even_vertices: Iterable[str],
        odd_vertices: Iterable[str],
        edges: Iterable[Edge],
        mu: dict,
        delta=None,
        boundary: Iterable[str] = (),
        field_d: int | None = None,
        center: str | None = None,
        radius: int | None = None,
        tol: float = 1e-9,
    ):
        self.even_vertices = tuple(even_vertices)
        self.odd_vertices = tuple(odd_vertices)
        self.edges = tuple(edges)
        self.mu = dict(mu)
        self.boundary = frozenset(boundary)
        self.center = center
        self.radius = radius
        self.tol = tol
        self._path_weights = {}  # path -> (mu, 1/mu); weights are fixed after construction
        self.vertices = self.even_vertices + self.odd_vertices
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("vertex ids must be unique across V+ and V-")
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.n_even = len(self.even_vertices)
        self.edge_index = {e.id: i for i, e in enumerate(self.edges)}
        if len(self.edge_index) != len(self.edges):
            raise GraphError("edge ids must be unique")
        for e in self.edges:
            if e.source not in self.index or e.target not in self.index:
                raise GraphError(f"edge {e.id} has an unknown endpoint")
            if not self.is_even(self.index[e.source]) or self.is_even(self.index[e.target]):
                raise GraphError(f"edge {e.id} must run from V+ to V-")
            if e.id not in self.mu:
                raise GraphError(f"edge {e.id} has no weight")
        self.exact = all(is_exact(self.mu[e.id]) for e in self.edges) and (
            delta is None or is_exact(delta)
        )
        self.field_d = field_d if field_d is not None else _field(self.mu.values(), delta)
        n = len(self.vertices)
        self._src = []
        self._tgt = []
        self._mu_oe = []
        out = [[] for _ in range(n)]
        inverses = {}
        canon = {}  # equal weights share one object, so comparisons hit the identity path
        for i, e in enumerate(self.edges):
            s, t = self.index[e.source], self.index[e.target]
            m = canon.setdefault(self.mu[e.id], self.mu[e.id])
            if m not in inverses:
                r = inv(m)
                inverses[m] = canon.setdefault(r, r)
            self._src += [s, t]
            self._tgt += [t, s]
            self._mu_oe += [m, inverses[m]]
            out[s].append(2 * i)
            out[t].append(2 * i + 1)
        self._out = [tuple(o) for o in out]
        self.delta = delta if delta is not None else self._infer_delta()

    # --- basic structure -----------------------------------------------------
    def is_even(self, v: int) -> bool:
        return v < self.n_even

    def vid(self, v: int) -> str:
        return self.vertices[v]

    def out_edges(self, v: int) -> tuple:
        return self._out[v]

    def src(self, oe: int) -> int:
        return self._src[oe]

    def tgt(self, oe: int) -> int:
        return self._tgt[oe]

    def mu_oe(self, oe: int):
        return self._mu_oe[oe]

    def degree(self, v: int) -> int:
        return len(self._out[v])

    def interior(self, v: int) -> bool:
        return self.vertices[v] not in self.boundary

    @property
    def is_truncated(self) -> bool:
        return bool(self.boundary)

    def _infer_delta(self):
        for v in range(len(self.vertices)):
            if self.interior(v) and self._out[v]:
                return _sum(self.mu_oe(oe) for oe in self._out[v])
        raise GraphError("cannot infer delta: no interior vertex")

    def adjacency(self) -> np.ndarray:
        n = len(self.vertices)
        a = np.zeros((n, n))
        for i in range(len(self.edges)):
            s, t = self._src[2 * i], self._tgt[2 * i]
            a[s, t] += 1
            a[t, s] += 1
        return a

    def with_mu(self, mu: dict, delta=None) -> "WeightedGraph":
        return WeightedGraph(
            self.even_vertices, self.odd_vertices, self.edges, mu, delta,
            self.boundary, None, self.center, self.radius, self.tol,
        )

    def distances_from(self, v: int) -> dict:
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for oe in self._out[u]:
                w = self._tgt[oe]
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    # --- paths -----------------------------------------------------------------
    def path_target(self, p: Path) -> int:
        return self._tgt[p[-1]] if len(p) > 1 else p[0]

    def path_mu(self, p: Path):
        return self.path_weights(p)[0]

    def path_weights(self, p: Path) -> tuple:
        """(mu(p), 1/mu(p)), cached per path."""
        w = self._path_weights.get(p)
        if w is None:
            out = 1
            for oe in p[1:]:
                out = out * self.mu_oe(oe)
            w = self._path_weights[p] = (out, inv(out) if out != 0 else None)
        return w

    def reverse(self, p: Path) -> Path:
        return (self.path_target(p),) + tuple(oe ^ 1 for oe in reversed(p[1:]))

    def concat(self, p: Path, q: Path) -> Path:
        if self.path_target(p) != q[0]:
            raise GraphError("paths do not compose")
        return p + q[1:]

    def paths_from(self, v: int, n: int) -> list:
        """All paths of length n starting at vertex index v, in sorted order."""
        layer = [(v,)]
        for _ in range(n):
            layer = [p + (oe,) for p in layer for oe in self._out[self.path_target(p)]]
        return layer

    def path_vertices(self, p: Path) -> tuple:
        out = [p[0]]
        for oe in p[1:]:
            out.append(self._tgt[oe])
        return tuple(out)


def _sum(values):
    total = 0
    for v in values:
        total = total + v
    return total


def _field(values, delta) -> int:
    d = 1
    for v in list(values) + ([delta] if delta is not None else []):
        if isinstance(v, QScalar) and v.d != 1:
            if d not in (1, v.d):
                raise GraphError("weights live in two different quadratic fields")
            d = v.d
    return d


# --- validation ------------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    errors: list = field(default_factory=list)
    delta: object = None
    exact: bool = True
    checked_vertices: int = 0
    max_degree: int = 0
    degree_bound_ok: bool = True
    mu_bounds_ok: bool = True
    base: str | None = None

    def raise_if_failed(self):
        if not self.ok:
            kind, msg = self.errors[0]
            raise {"InconsistentMu": InconsistentMu, "RowSumMismatch": RowSumMismatch,
                   "NotConnected": NotConnected}.get(kind, GraphError)(msg)


def _propagate(g: WeightedGraph, base: int):
    """BFS vertex weights; returns (mu_V, first inconsistent edge or None)."""
    out = g.out_edges(base)
    one = g.mu_oe(out[0]) * inv(g.mu_oe(out[0])) if out else 1  # 1 in the weights' own type
    mu_v = {base: one}
    queue = deque([base])
    bad = None
    products = {}  # few distinct weights on symmetric graphs
    canon = {one: one}  # equal products share one object, so memo lookups hit identity
    while queue:
        u = queue.popleft()
        for oe in g.out_edges(u):
            w = g.tgt(oe)
            key = (mu_v[u], g.mu_oe(oe))
            val = products.get(key)
            if val is None:
                val = key[0] * key[1]
                val = products[key] = canon.setdefault(val, val)
            if w not in mu_v:
                mu_v[w] = val
                queue.append(w)
            elif bad is None and not _eq(mu_v[w], val, g.tol):
                bad = oe
    return mu_v, bad


def validate_weight(g: WeightedGraph) -> ValidationReport:
    """Check the weight axioms: path-product consistency and row sums = delta."""
    rep = ValidationReport(ok=True, delta=g.delta, exact=g.exact)
    if not g.vertices:
        rep.ok = False
        rep.errors.append(("NotConnected", "empty graph"))
        return rep
    signs = {}
    for e in g.edges:
        m = g.mu[e.id]
        if id(m) not in signs:
            signs[id(m)] = m.sign() if isinstance(m, QScalar) else (1 if to_float(m) > 0 else -1)
        if signs[id(m)] <= 0:
            rep.ok = False
            rep.errors.append(("NonPositiveMu", f"edge {e.id} has mu <= 0"))
    groups = {}
    for e in g.edges:
        groups.setdefault((e.source, e.target), []).append(e.label)
    for (s, t), labels in groups.items():
        if sorted(labels) != list(range(1, len(labels) + 1)):
            rep.ok = False
            rep.errors.append(("BadLabels", f"parallel edges {s}-{t} need labels 1..{len(labels)}"))
    base = g.index[g.center] if g.center is not None else 0
    rep.base = g.vid(base)
    mu_v, bad = _propagate(g, base)
    if len(mu_v) != len(g.vertices):
        rep.ok = False
        missing = sorted(set(g.vertices) - {g.vid(v) for v in mu_v})
        rep.errors.append(("NotConnected", f"unreachable vertices, e.g. {missing[0]}"))
        return rep
    if bad is not None:
        rep.ok = False
        e = g.edges[bad // 2]
        rep.errors.append(("InconsistentMu", f"cycle through edge {e.id} has mu-product != 1"))
    if not rep.ok:
        return rep
    delta = g.delta
    d2 = delta * delta
    row_cache, deg_cache = {}, {}
    for v in range(len(g.vertices)):
        if not g.interior(v):
            continue
        rep.checked_vertices += 1
        key = tuple(g.mu_oe(oe) for oe in g.out_edges(v))
        if key not in row_cache:
            s = _sum(key)
            row_cache[key] = (s, _eq(s, delta, g.tol))
        s, ok = row_cache[key]
        if not ok:
            rep.ok = False
            rep.errors.append(("RowSumMismatch", f"row sum at vertex {g.vid(v)} is {s}, expected {delta}"))
        deg = g.degree(v)
        rep.max_degree = max(rep.max_degree, deg)
        if deg not in deg_cache:
            deg_cache[deg] = _le(deg, d2, g.tol)
        if not deg_cache[deg]:
            rep.degree_bound_ok = False
    lo = inv(delta)
    for m in set(g.mu_oe(oe) for oe in range(2 * len(g.edges))):
        if not (_le(lo, m, g.tol) and _le(m, delta, g.tol)):
            rep.mu_bounds_ok = False
    return rep


@dataclass(frozen=True)
class VertexWeight:
    mu_V: dict  # vertex id -> scalar
    base: str

    def __getitem__(self, v):
        return self.mu_V[v]


def vertex_weights(g: WeightedGraph, base: str | None = None, check_eigen: bool = True) -> VertexWeight:
    """mu_V with mu_V(base) = 1 and mu(a) = mu_V(t(a)) / mu_V(s(a))."""
    b = g.index[base] if base is not None else (g.index[g.center] if g.center else 0)
    mu_v, bad = _propagate(g, b)
    if bad is not None:
        raise InconsistentMu(f"cycle through edge {g.edges[bad // 2].id} has mu-product != 1")
    if len(mu_v) != len(g.vertices):
        raise NotConnected("graph is not connected")
    if check_eigen:
        for v in range(len(g.vertices)):
            if not g.interior(v):
                continue
            lhs = _sum(mu_v[g.tgt(oe)] for oe in g.out_edges(v))
            if not _eq(lhs, g.delta * mu_v[v], g.tol):
                raise RowSumMismatch(f"A mu_V != delta mu_V at vertex {g.vid(v)}")
    return VertexWeight({g.vid(v): mu_v[v] for v in sorted(mu_v)}, g.vid(b))


# --- paths -------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSet:
    n: int
    sign: str
    paths: tuple
    blocks: dict  # (source, target) -> tuple of paths
    st_pairs: tuple


def enumerate_paths(g: WeightedGraph, n: int, sign: str = "+", sources=None) -> PathSet:
    """C_n^sign and ST_n^sign, grouped by (source, target) blocks.

    ``sources`` restricts the start vertices (indices); for truncated balls
    the default is the center alone, and n must not exceed the radius.
    """
    if sign not in "+-":
        raise ValueError("sign must be '+' or '-'")
    if g.is_truncated and g.radius is not None and n > g.radius:
        raise TruncationTooSmall(f"n = {n} exceeds ball radius {g.radius}")
    if sources is None:
        if g.is_truncated and g.center is not None:
            sources = [g.index[g.center]]
        else:
            sources = range(len(g.vertices))
    want_even = sign == "+"
    sources = [v for v in sources if g.is_even(v) == want_even]
    paths = []
    blocks = {}
    for v in sources:
        for p in g.paths_from(v, n):
            paths.append(p)
            blocks.setdefault((v, g.path_target(p)), []).append(p)
    blocks = {k: tuple(b) for k, b in sorted(blocks.items())}
    st = tuple((a, b) for blk in blocks.values() for a in blk for b in blk)
    return PathSet(n, sign, tuple(paths), blocks, st)


# --- unique weight from a transitive action ---------------------------------------

def infer_unique_weight(even_vertices, odd_vertices, edges, action=None, tol: float = 1e-9):
    """Weight making the fixed points spherical, for an action transitive on V+ and V-.

    Transitivity forces the Perron-Frobenius vector to be constant on each
    side, so mu = sqrt(deg_- / deg_+) and delta = sqrt(deg_+ deg_-) exactly.
    A numerical Perron-Frobenius computation is run as a cross-check on
    finite graphs.  Returns (graph, mu_exact: bool).
    """
    edges = tuple(edges)
    deg = {}
    for e in edges:
        deg[e.source] = deg.get(e.source, 0) + 1
        deg[e.target] = deg.get(e.target, 0) + 1
    unweighted = WeightedGraph(even_vertices, odd_vertices, edges,
                               {e.id: 1 for e in edges}, delta=1)
    if action is not None:
        orbits = action.vertex_orbits(unweighted)
        n_even = sum(1 for o in orbits if o[0] in set(even_vertices))
        n_odd = len(orbits) - n_even
        if n_even != 1 or n_odd != 1:
            raise NotTransitive("action is not transitive on V+ and V-")
    dp = {deg[v] for v in even_vertices}
    dm = {deg[v] for v in odd_vertices}
    if len(dp) != 1 or len(dm) != 1:
        raise NotTransitive("degrees differ within a side; no transitive action exists")
    rp, rm = dp.pop(), dm.pop()
    mu = QScalar.sqrt_of(Fraction(rm, rp))
    delta = QScalar.sqrt_of(rp * rm)
    g = WeightedGraph(even_vertices, odd_vertices, edges, {e.id: mu for e in edges}, delta=delta)
    a = g.adjacency()
    if len(a) <= 2000:
        w, v = np.linalg.eigh(a)
        if abs(w[-1] - float(delta)) > 1e-6 * max(1.0, float(delta)):
            raise GraphError("Perron-Frobenius eigenvalue disagrees with the exact modulus")
    return g


# --- JSON format ---------------------------------------------------------------------

_TOP_FIELDS = {"field_d", "even_vertices", "odd_vertices", "edges", "delta", "boundary", "group"}
_EDGE_FIELDS = {"id", "source", "target", "label", "mu"}
_GEN_FIELDS = {"vertex_map", "edge_map"}


class FormatError(ValueError):
    pass


def graph_from_dict(data: dict):
    """Parse the graph JSON object; returns (graph, generators or None)."""
    if not isinstance(data, dict):
        raise FormatError("graph file must hold a JSON object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise FormatError(f"unknown fields: {sorted(unknown)}")
    for key in ("field_d", "even_vertices", "odd_vertices", "edges"):
        if key not in data:
            raise FormatError(f"missing field {key!r}")
    d = int(data["field_d"])
    edges, mu = [], {}
    for obj in data["edges"]:
        bad = set(obj) - _EDGE_FIELDS
        if bad:
            raise FormatError(f"unknown edge fields: {sorted(bad)}")
        e = Edge(str(obj["id"]), str(obj["source"]), str(obj["target"]), int(obj.get("label", 1)))
        edges.append(e)
        m = parse_qscalar(str(obj["mu"]))
        if m.d not in (1, d):
            raise FormatError(f"edge {e.id} weight is outside Q(sqrt {d})")
        mu[e.id] = m
    delta = parse_qscalar(str(data["delta"])) if "delta" in data else None
    if delta is not None and delta.d not in (1, d):
        raise FormatError("delta is outside the declared field")
    g = WeightedGraph(
        [str(v) for v in data["even_vertices"]], [str(v) for v in data["odd_vertices"]],
        edges, mu, delta, [str(v) for v in data.get("boundary", [])], field_d=d,
    )
    gens = None
    if "group" in data:
        grp = data["group"]
        if not isinstance(grp, dict) or set(grp) - {"generators"}:
            raise FormatError("group must be an object with a 'generators' list")
        gens = []
        for gen in grp.get("generators", []):
            bad = set(gen) - _GEN_FIELDS
            if bad:
                raise FormatError(f"unknown generator fields: {sorted(bad)}")
            gens.append(({str(k): str(v) for k, v in gen["vertex_map"].items()},
                         {str(k): str(v) for k, v in gen.get("edge_map", {}).items()}))
    return g, gens


def graph_to_dict(g: WeightedGraph, generators=None) -> dict:
    def fmt(x):
        if isinstance(x, QScalar):
            return format_qscalar(x)
        if is_exact(x):
            return format_qscalar(QScalar(x))
        raise FormatError("only exact weights serialize to the graph format")

    out = {
        "field_d": g.field_d,
        "even_vertices": list(g.even_vertices),
        "odd_vertices": list(g.odd_vertices),
        "edges": [{"id": e.id, "source": e.source, "target": e.target,
                   "label": e.label, "mu": fmt(g.mu[e.id])} for e in g.edges],
        "delta": fmt(g.delta),
    }
    if g.boundary:
        out["boundary"] = sorted(g.boundary)
    if generators:
        out["group"] = {"generators": [{"vertex_map": dict(vm), "edge_map": dict(em)}
                                       for vm, em in generators]}
    return out


def load_graph(path: str):
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
