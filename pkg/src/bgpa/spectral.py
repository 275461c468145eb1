"""Bratteli diagrams of P_n and Q_n = P_n^G, graph norms and amenability verdicts.

Q_n^+ is represented on walks of length n from one vertex per source orbit:
as an algebra, Q_n is the direct sum over orbit representatives v of the
G_v-fixed points of e_v P_n e_v.  Its simple summands are found by
spectral splitting of a random self-adjoint element of Q_n: the
eigenprojections are minimal projections, and two of them lie in the same
summand iff they are linked by a random element of Q_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from .boxes import block_dims
from .graph import TruncationTooSmall, WeightedGraph, validate_weight, vertex_weights
from .scalars import to_float
from .symmetry import (NotTransitive, RootedTreeOracle, check_spherical,
                       orbits, stabilizer_data)


class SpectralError(ValueError):
    pass


class NotNonnegative(SpectralError):
    pass


class CenterSplitFailure(SpectralError):
    pass


@dataclass
class BratteliDiagram:
    level_n: list  # summand descriptors: dicts with key, dim, mult, trace
    level_np1: list
    multiplicity: np.ndarray  # m[i, j], summand i of level n into summand j of level n+1
    n: int
    exact: bool = True
    trace_consistent: bool | None = None

    def norm(self) -> float:
        return matrix_norm(self.multiplicity).lower

    def to_dict(self) -> dict:
        return {"n": self.n,
                "level_n_dims": [s["dim"] for s in self.level_n],
                "level_np1_dims": [s["dim"] for s in self.level_np1],
                "multiplicity": self.multiplicity.astype(int).tolist(),
                "exact": self.exact}


@dataclass
class NormEstimate:
    lower: float
    upper: float | None
    iterations: int = 0
    radius_used: int | None = None
    method: str = ""

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "iterations": self.iterations,
                "radius_used": self.radius_used, "method": self.method}


# --- P tower ----------------------------------------------------------------------------

def _sources(g: WeightedGraph, sign: str):
    if g.is_truncated and g.center is not None:
        c = g.index[g.center]
        if sign == "+":
            return [c]
        return [min(g.tgt(oe) for oe in g.out_edges(c))]
    return [v for v in range(len(g.vertices)) if g.is_even(v) == (sign == "+")]


def bratteli_P(g: WeightedGraph, n: int, sign: str = "+", sources=None) -> BratteliDiagram:
    """Blocks (v, w) of P_n with dimension |C_n(v, w)|; arrows w -> w' per edge."""
    if sources is None:
        sources = _sources(g, sign)
    if g.is_truncated:
        for v in sources:
            dist = g.distances_from(v)
            if any(d <= n and not g.interior(u) for u, d in dist.items()):
                raise TruncationTooSmall(f"P_{n} -> P_{n + 1} leaves the ball")
    lo = block_dims(g, n, sign, sources)
    hi = block_dims(g, n + 1, sign, sources)
    lo_keys, hi_keys = list(lo), list(hi)
    hi_idx = {k: j for j, k in enumerate(hi_keys)}
    m = np.zeros((len(lo_keys), len(hi_keys)), dtype=np.int64)
    for i, (v, w) in enumerate(lo_keys):
        for oe in g.out_edges(w):
            m[i, hi_idx[(v, g.tgt(oe))]] += 1
    mu_v = _mu_v_float(g)
    delta = to_float(g.delta)

    def desc(keys, dims, level):
        return [{"key": (g.vid(v), g.vid(w)), "dim": dims[(v, w)], "mult": 1,
                 "trace": delta ** (-level) * mu_v[w] / mu_v[v]} for v, w in keys]

    bd = BratteliDiagram(desc(lo_keys, lo, n), desc(hi_keys, hi, n + 1), m, n)
    bd.trace_consistent = _trace_consistent(bd)
    return bd


def _mu_v_float(g: WeightedGraph) -> list:
    vw = vertex_weights(g, check_eigen=False)
    return [to_float(vw.mu_V[v]) for v in g.vertices]


def _trace_consistent(bd: BratteliDiagram, tol: float = 1e-9) -> bool:
    lo = np.array([s["trace"] for s in bd.level_n])
    hi = np.array([s["trace"] for s in bd.level_np1])
    return bool(np.allclose(bd.multiplicity @ hi, lo, rtol=tol, atol=tol))


# --- Q tower ------------------------------------------------------------------------------

@dataclass
class QRepresentation:
    """Orbit-sum basis of Q_n on walks from the source reps.

    ``labels[i, j]`` is the orbit id of the pair (walk i, walk j), or -1
    when the pair is not in ST_n; basis element k is the 0/1 matrix of
    label k.
    """

    n: int
    sign: str
    walks: list
    index: dict
    labels: np.ndarray
    dim: int
    reps: list

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        """Generic complex element of Q_n."""
        c = rng.standard_normal(self.dim + 1) + 1j * rng.standard_normal(self.dim + 1)
        c[-1] = 0.0
        return c[self.labels]


def q_representation(g: WeightedGraph, s, n: int, sign: str = "+") -> QRepresentation:
    if isinstance(s, RootedTreeOracle):
        reps = [s.root_for(sign)]
    else:
        reps = s.source_reps(sign)
    table = orbits(g, s, "st_pairs", n, sign)
    walks = [p for v in reps for p in g.paths_from(v, n)]
    index = {p: i for i, p in enumerate(walks)}
    labels = np.full((len(walks), len(walks)), -1, dtype=np.int64)
    used = {}
    for (a, b), k in table.index_of.items():
        if a in index:
            labels[index[a], index[b]] = used.setdefault(k, len(used))
    return QRepresentation(n, sign, walks, index, labels, len(used), reps)


@dataclass
class Summand:
    projections: list  # minimal projections (dense)
    rank: int  # multiplicity of the representation on walk space

    @property
    def dim(self) -> int:
        return len(self.projections)

    @property
    def central(self) -> np.ndarray:
        return sum(self.projections)


def split_center(rep: QRepresentation, rng: np.random.Generator, tol: float = 1e-7) -> list:
    """Simple summands of Q_n from a random Hermitian element.

    Complex coefficients matter: a real element cannot separate a pair of
    complex-conjugate summands.
    """
    x = rep.random_element(rng)
    h = x + x.conj().T
    w, v = np.linalg.eigh(h)
    bounds = [0]
    scale = max(1.0, float(np.max(np.abs(w))))
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol * scale:
            bounds.append(i)
    bounds.append(len(w))
    spans = list(zip(bounds[:-1], bounds[1:]))
    groups = [v[:, a:c] @ v[:, a:c].conj().T for a, c in spans]
    b = rep.random_element(rng)
    b = b + rep.random_element(rng) @ b
    # p_i b p_j != 0 iff the (i, j) block of b in the eigenbasis is nonzero
    m = np.abs(v.conj().T @ b @ v)
    parent = list(range(len(groups)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, (a, c) in enumerate(spans):
        for j in range(i + 1, len(spans)):
            a2, c2 = spans[j]
            if find(i) != find(j) and m[a:c, a2:c2].max() > 1e-6:
                parent[find(j)] = find(i)
    clusters = {}
    for i in range(len(groups)):
        clusters.setdefault(find(i), []).append(groups[i])
    out = []
    for projs in clusters.values():
        ranks = {int(round(np.trace(p).real)) for p in projs}
        if len(ranks) != 1:
            raise CenterSplitFailure("minimal projections of one summand have unequal ranks")
        out.append(Summand(projs, ranks.pop()))
    total = sum(s.dim ** 2 for s in out)
    if total != rep.dim:
        raise CenterSplitFailure(f"summand dimensions {total} != dim Q_n {rep.dim}")
    out.sort(key=lambda s: (s.dim, s.rank, int(np.argmax(np.diag(s.central).real))))
    return out


def _include_dense(rep_lo: QRepresentation, rep_hi: QRepresentation, g: WeightedGraph, x: np.ndarray):
    """x (x) 1 on the walk space one level up."""
    lo_of = np.array([rep_lo.index[p[:-1]] for p in rep_hi.walks])
    last = np.array([p[-1] for p in rep_hi.walks])
    same = last[:, None] == last[None, :]
    return np.where(same, x[np.ix_(lo_of, lo_of)], 0.0)


def bratteli_Q(g: WeightedGraph, s, n: int, sign: str = "+", seed: int = 0) -> BratteliDiagram:
    """Bratteli diagram of Q_n subset of Q_{n+1}, by numerical center splitting."""
    if isinstance(s, RootedTreeOracle):
        s.check_scope(n + 1, sign)
    rng = np.random.default_rng(seed)
    lo_rep = q_representation(g, s, n, sign)
    hi_rep = q_representation(g, s, n + 1, sign)
    lo = split_center(lo_rep, rng)
    hi = split_center(hi_rep, rng)
    m = np.zeros((len(lo), len(hi)), dtype=np.int64)
    for i, a in enumerate(lo):
        p = _include_dense(lo_rep, hi_rep, g, a.projections[0])
        for j, b in enumerate(hi):
            # p and the central projection commute, so p z is a projection
            tr = float(np.einsum("ij,ji->", p, b.central).real)
            r = int(round(tr))
            if abs(tr - r) > 1e-6:
                raise CenterSplitFailure("inclusion trace is not an integer")
            q, rem = divmod(r, b.rank)
            if rem:
                raise CenterSplitFailure("inclusion rank not divisible by the multiplicity")
            m[i, j] = q
    mu_v = _mu_v_float(g)
    delta = to_float(g.delta)

    def trace_of(rep, proj, level):
        # tr_level of a projection, read at the first source rep
        v0 = rep.reps[0]
        total = 0.0
        for i, p in enumerate(rep.walks):
            if p[0] == v0:
                total += proj[i, i].real * mu_v[g.path_target(p)] / mu_v[v0]
        return delta ** (-level) * total

    def desc(summands, rep, level):
        return [{"key": k, "dim": sm.dim, "mult": sm.rank,
                 "trace": trace_of(rep, sm.projections[0], level)} for k, sm in enumerate(summands)]

    bd = BratteliDiagram(desc(lo, lo_rep, n), desc(hi, hi_rep, n + 1), m, n, exact=False)
    bd.trace_consistent = len(lo_rep.reps) > 1 or _trace_consistent(bd, 1e-7)
    return bd


def q_dims(g: WeightedGraph, s, n: int, sign: str = "+") -> int:
    return orbits(g, s, "st_pairs", n, sign).count


# --- norms ----------------------------------------------------------------------------------

def _as_sparse(a) -> sp.csr_matrix:
    m = sp.csr_matrix(a, dtype=float)
    if m.nnz and m.data.min() < 0:
        raise NotNonnegative("matrix has negative entries")
    return m


def matrix_norm(a, tol: float = 1e-12) -> NormEstimate:
    """Operator norm of a nonnegative (possibly rectangular) matrix.

    The square of the norm is the Perron root of B = A^T A.  On each
    connected component of B, the Rayleigh quotient of the computed Perron
    vector is a lower bound and the Collatz-Wielandt ratio max (Bx)_i / x_i
    an upper bound.
    """
    m = _as_sparse(a)
    if m.shape[0] == 0 or m.shape[1] == 0 or m.nnz == 0:
        return NormEstimate(0.0, 0.0, 0, None, "empty")
    b = (m.T @ m).tocsr()
    ncomp, labels = connected_components(b, directed=False)
    lower = upper = 0.0
    iters = 0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        sub = b[idx][:, idx]
        if sub.nnz == 0:
            continue
        if len(idx) <= 600:
            w, v = np.linalg.eigh(sub.toarray())
            x = np.abs(v[:, -1])
        else:
            w, v = eigsh(sub, k=1, which="LA", tol=1e-14, maxiter=20000)
            x = np.abs(v[:, 0])
            iters += 1
        x = np.maximum(x, 1e-300)
        bx = sub @ x
        lam_lo = float(x @ bx / (x @ x))
        lam_hi = float(np.max(bx / x))
        lower = max(lower, lam_lo)
        upper = max(upper, lam_hi)
    return NormEstimate(math.sqrt(lower), math.sqrt(upper), iters, None, "perron")


def ball_norm(g: WeightedGraph) -> NormEstimate:
    """Norm of the adjacency matrix of the (possibly truncated) graph."""
    est = matrix_norm(sp.csr_matrix(g.adjacency()) if len(g.vertices) < 3000 else _sparse_adj(g))
    est.radius_used = g.radius
    return est


def _sparse_adj(g: WeightedGraph) -> sp.csr_matrix:
    rows, cols = [], []
    for i in range(len(g.edges)):
        s, t = g.src(2 * i), g.tgt(2 * i)
        rows += [s, t]
        cols += [t, s]
    n = len(g.vertices)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def tree_norm_closed_form(r_plus: int, r_minus: int) -> float:
    """Norm of the (r+, r-)-biregular tree: sqrt(r+ - 1) + sqrt(r- - 1)."""
    return math.sqrt(r_plus - 1) + math.sqrt(r_minus - 1)


def tree_norm_below_delta(r_plus: int, r_minus: int) -> bool:
    """Exact test of sqrt(r+ - 1) + sqrt(r- - 1) < sqrt(r+ r-).

    Squaring: 2 sqrt((r+ - 1)(r- - 1)) < r+ r- - r+ - r- + 2, and the right
    side is (r+ - 1)(r- - 1) + 1 > 0; square again.
    """
    p = (r_plus - 1) * (r_minus - 1)
    return 4 * p < (p + 1) ** 2


def graph_norm(g: WeightedGraph, info: dict | None = None) -> NormEstimate:
    """Norm of Gamma: exact bounds on finite graphs, closed form plus ball bound on trees."""
    info = info or {}
    if g.is_truncated:
        est = ball_norm(g)
        if info.get("kind") == "biregular_tree":
            est.upper = tree_norm_closed_form(info["r_plus"], info["r_minus"])
            est.method = "ball lower bound, closed-form upper bound"
        else:
            est.upper = None
            est.method = "ball lower bound"
        return est
    est = ball_norm(g)
    est.method = "finite graph"
    return est


def tree_ball_sequence(r_plus: int, r_minus: int, radii) -> list:
    from .builders import biregular_tree
    return [(r, ball_norm(biregular_tree(r_plus, r_minus, r).graph).lower) for r in radii]


# --- verdicts --------------------------------------------------------------------------------

@dataclass
class Verdict:
    verdict: str  # NonAmenableCertified | AmenableObserved | Inconclusive | NotSubfactorPA
    delta: float
    gamma_norm: NormEstimate | None = None
    q_norms: list = field(default_factory=list)  # (n, ||Gamma(Q)_n||)
    explanation: str = ""

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "delta": self.delta,
                "gamma_norm": self.gamma_norm.to_dict() if self.gamma_norm else None,
                "q_norms": [[n, v] for n, v in self.q_norms], "explanation": self.explanation}


def amenability_verdict(g: WeightedGraph, s, info: dict | None = None, n_max: int = 4,
                        tol: float = 1e-6, seed: int = 0) -> Verdict:
    info = info or {}
    delta = to_float(g.delta)
    rep = validate_weight(g)
    if not rep.ok:
        return Verdict("Inconclusive", delta, None, [], f"weight validation failed: {rep.errors[0][1]}")
    try:
        sph = check_spherical(g, s)
    except NotTransitive as exc:
        return Verdict("NotSubfactorPA", delta, None, [], str(exc))
    if not sph.spherical:
        return Verdict("NotSubfactorPA", delta, None, [], "fixed points are not spherical")
    est = graph_norm(g, info)
    if info.get("kind") == "biregular_tree":
        rp, rm = info["r_plus"], info["r_minus"]
        if tree_norm_below_delta(rp, rm):
            return Verdict("NonAmenableCertified", delta, est, [],
                           f"||Gamma|| <= sqrt({rp}-1)+sqrt({rm}-1) < delta bounds ||Gamma(Q)||")
        return Verdict("Inconclusive", delta, est, [], "closed-form bound does not beat delta")
    if est.upper is not None and est.upper < delta - tol:
        return Verdict("NonAmenableCertified", delta, est, [], "||Gamma|| < delta")
    if g.is_truncated:
        return Verdict("Inconclusive", delta, est, [], "truncated graph gives lower bounds only")
    qn = [(n, bratteli_Q(g, s, n, seed=seed).norm()) for n in range(n_max + 1)]
    if abs(qn[-1][1] - delta) <= tol:
        return Verdict("AmenableObserved", delta, est, qn, "||Gamma(Q)_n|| reaches delta")
    return Verdict("Inconclusive", delta, est, qn, "||Gamma(Q)_n|| has not reached delta")


@dataclass
class DepthReport:
    double_cosets: int
    finite_graph: bool
    finite_depth: bool | None
    distances: list
    scope: str


def finite_depth_check(g: WeightedGraph, s, o: str | None = None) -> DepthReport:
    sd = stabilizer_data(g, s, o)
    finite = not g.is_truncated
    return DepthReport(len(sd.orbit_reps), finite, True if finite else None, sd.distances, sd.scope)
