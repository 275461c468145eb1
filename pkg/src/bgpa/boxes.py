"""Path-model box spaces P_n^+- as block multi-matrix algebras.

A BoxElement is a sparse map (a, b) -> scalar over pairs of length-n paths
with common source and target; e_{a,b} e_{c,d} = [b = c] e_{a,d}.  Scalars
may be exact (int, Fraction, QScalar) or floats; the two never mix
implicitly inside QScalar arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import TruncationTooSmall, WeightedGraph
from .scalars import conj, inv, is_exact, is_zero, to_float


class BoxError(ValueError):
    pass


class SizeMismatch(BoxError):
    pass


class SignMismatch(BoxError):
    pass


class NotUnitary(BoxError):
    pass


class ApproximateOnly(BoxError):
    pass


def _add_into(acc: dict, key, val):
    cur = acc.get(key)
    acc[key] = val if cur is None else cur + val


def _prune(entries: dict, tol: float = 0.0) -> dict:
    return {k: v for k, v in entries.items() if not is_zero(v, tol)}


class BoxElement:
    """Element of P_n^sign in the basis e_{a,b}, (a, b) in ST_n^sign."""

    __slots__ = ("graph", "n", "sign", "entries")

    def __init__(self, graph: WeightedGraph, n: int, sign: str, entries: dict | None = None,
                 check: bool = False):
        self.graph = graph
        self.n = n
        self.sign = sign
        self.entries = _prune(dict(entries or {}))
        if check:
            self.check()

    def check(self):
        g = self.graph
        for a, b in self.entries:
            if len(a) != self.n + 1 or len(b) != self.n + 1:
                raise SizeMismatch("path length differs from box size")
            if a[0] != b[0] or g.path_target(a) != g.path_target(b):
                raise BoxError("entry outside ST_n: endpoints differ")
            if g.is_even(a[0]) != (self.sign == "+"):
                raise SignMismatch("source parity does not match the sign")

    # --- vector space -----------------------------------------------------------
    def _like(self, entries):
        return BoxElement(self.graph, self.n, self.sign, entries)

    def _compatible(self, other: "BoxElement"):
        if self.n != other.n:
            raise SizeMismatch(f"box sizes {self.n} and {other.n}")
        if self.sign != other.sign:
            raise SignMismatch("signs differ")

    def __add__(self, other):
        self._compatible(other)
        acc = dict(self.entries)
        for k, v in other.entries.items():
            _add_into(acc, k, v)
        return self._like(acc)

    def __neg__(self):
        return self._like({k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._like({k: c * v for k, v in self.entries.items()})

    def __mul__(self, other):
        if isinstance(other, BoxElement):
            return box_mul(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def adjoint(self):
        return self._like({(b, a): conj(v) for (a, b), v in self.entries.items()})

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(is_zero(v, tol) for v in self.entries.values())

    def equals(self, other, tol: float = 0.0) -> bool:
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, BoxElement):
            return NotImplemented
        return self.n == other.n and self.sign == other.sign and self.equals(other)

    __hash__ = None

    def to_float(self) -> "BoxElement":
        return self._like({k: complex(v) if isinstance(v, complex) else to_float(v)
                           for k, v in self.entries.items()})

    def blocks(self) -> dict:
        out = {}
        for (a, b), v in self.entries.items():
            out.setdefault((a[0], self.graph.path_target(a)), {})[(a, b)] = v
        return out

    def __repr__(self):
        return f"BoxElement(n={self.n}, sign={self.sign!r}, nnz={len(self.entries)})"


def matrix_unit(g: WeightedGraph, a, b, sign: str | None = None) -> BoxElement:
    n = len(a) - 1
    sign = sign or ("+" if g.is_even(a[0]) else "-")
    return BoxElement(g, n, sign, {(a, b): 1}, check=True)


def unit(g: WeightedGraph, n: int, sign: str = "+", sources=None) -> BoxElement:
    """Identity of P_n^sign (restricted to the given sources, if any)."""
    if sources is None:
        sources = [v for v in range(len(g.vertices)) if g.is_even(v) == (sign == "+")]
    return BoxElement(g, n, sign, {(p, p): 1 for v in sources for p in g.paths_from(v, n)})


def box_mul(x: BoxElement, y: BoxElement) -> BoxElement:
    x._compatible(y)
    by_first = {}
    for (c, d), v in y.entries.items():
        by_first.setdefault(c, []).append((d, v))
    acc = {}
    for (a, b), u in x.entries.items():
        for d, v in by_first.get(b, ()):
            _add_into(acc, (a, d), u * v)
    return x._like(acc)


# --- zero boxes and traces -------------------------------------------------------------

@dataclass
class P0Element:
    """Function on vertices, identified with an element of P_0."""

    values: dict  # vertex index -> scalar

    def __getitem__(self, v):
        return self.values.get(v, 0)

    def equals(self, other: "P0Element", tol: float = 0.0) -> bool:
        keys = set(self.values) | set(other.values)
        return all(is_zero(self[k] - other[k], tol) for k in keys)

    def scale(self, c):
        return P0Element({k: c * v for k, v in self.values.items()})


def traces(x: BoxElement):
    """(tau_l, tau_r, tr_n) of x.

    tau_l(e_{a,b}) = [a = b] mu(a-bar) e_{t(a)}, tau_r(e_{a,b}) = [a = b] mu(a) e_{s(a)},
    tr_n = delta^{-n} tau_r.
    """
    g = x.graph
    tl, tr = {}, {}
    for (a, b), v in x.entries.items():
        if a != b:
            continue
        m, m_inv = g.path_weights(a)
        _add_into(tl, g.path_target(a), v * m_inv)
        _add_into(tr, a[0], v * m)
    scale = inv(g.delta) ** x.n if is_exact(g.delta) else to_float(g.delta) ** (-x.n)
    return P0Element(_prune(tl)), P0Element(_prune(tr)), P0Element(_prune({k: scale * v for k, v in tr.items()}))


def tau_r(x):
    return traces(x)[1]


def tau_l(x):
    return traces(x)[0]


def tr_m(x):
    return traces(x)[2]


# --- inclusion and conditional expectation -----------------------------------------------

def include(x: BoxElement) -> BoxElement:
    """P_n -> P_{n+1}: e_{a,b} -> sum over edges c leaving t(a) of e_{ac,bc}."""
    g = x.graph
    acc = {}
    for (a, b), v in x.entries.items():
        t = g.path_target(a)
        if not g.interior(t):
            raise TruncationTooSmall(f"inclusion needs the full star of boundary vertex {g.vid(t)}")
        for oe in g.out_edges(t):
            acc[(a + (oe,), b + (oe,))] = v
    return BoxElement(g, x.n + 1, x.sign, acc)


def left_include(x: BoxElement) -> BoxElement:
    """P_n^-+ -> P_{n+1}^+-: add one strand on the left, sum over edges c into s(a)."""
    g = x.graph
    acc = {}
    for (a, b), v in x.entries.items():
        s = a[0]
        if not g.interior(s):
            raise TruncationTooSmall(f"left inclusion needs the full star of {g.vid(s)}")
        for oe in g.out_edges(s):
            c = oe ^ 1  # edge from the neighbour into s
            u = g.tgt(oe)
            acc[((u, c) + a[1:], (u, c) + b[1:])] = v
    return BoxElement(g, x.n + 1, "-" if x.sign == "+" else "+", acc)


def cond_exp(x: BoxElement) -> BoxElement:
    """E_P: P_{n+1} -> P_n, e_{ac,bd} -> delta^{-1} [c = d] mu(c) e_{a,b}."""
    if x.n < 1:
        raise SizeMismatch("conditional expectation needs n >= 1")
    g = x.graph
    dinv = inv(g.delta)
    acc = {}
    for (p, q), v in x.entries.items():
        if p[-1] != q[-1]:
            continue
        _add_into(acc, (p[:-1], q[:-1]), v * dinv * g.mu_oe(p[-1]))
    return BoxElement(g, x.n - 1, x.sign, acc)


# --- Temperley-Lieb elements -----------------------------------------------------------------

def tl_element(g: WeightedGraph, n: int, position: int, sign: str = "+", kind: str = "jones",
               exact: bool = False, sources=None) -> BoxElement:
    """Jones projection e_i in P_n acting on strands i, i+1 (1-based, i+1 <= n).

    Entries e[(a c c-bar y), (a c' c'-bar y)] = delta^{-1} sqrt(mu(c) mu(c')).
    The square roots generally leave the working field, so the result is a
    float element; ``kind="cup"`` returns delta times the projection.
    """
    if exact:
        raise ApproximateOnly("Jones projections are computed in the float backend only")
    if not 1 <= position < n:
        raise SizeMismatch("need 1 <= position < n")
    if sources is None:
        sources = [v for v in range(len(g.vertices)) if g.is_even(v) == (sign == "+")]
    delta = to_float(g.delta)
    scale = 1.0 if kind == "cup" else 1.0 / delta
    acc = {}
    for v in sources:
        for a in g.paths_from(v, position - 1):
            w = g.path_target(a)
            loops = [(oe, math.sqrt(to_float(g.mu_oe(oe)))) for oe in g.out_edges(w)]
            for y in g.paths_from(w, n - position - 1):
                tail = y[1:]
                for c, sc in loops:
                    for c2, sc2 in loops:
                        acc[(a + (c, c ^ 1) + tail, a + (c2, c2 ^ 1) + tail)] = scale * sc * sc2
    return BoxElement(g, n, sign, acc)


# --- automorphism building blocks ------------------------------------------------------------

def rev(x: BoxElement) -> BoxElement:
    """Rev(e_{a,b}) = e_{a-bar, b-bar} on P_1, switching the sign."""
    if x.n != 1:
        raise SizeMismatch("Rev is defined on P_1")
    g = x.graph
    return BoxElement(g, 1, "-" if x.sign == "+" else "+",
                      {(g.reverse(a), g.reverse(b)): v for (a, b), v in x.entries.items()})


def sh(x: BoxElement, times: int = 1) -> BoxElement:
    """sh(e_{a,b}) = sum over length-2 paths c ending at s(a) of e_{ca,cb}."""
    g = x.graph
    out = x
    for _ in range(times):
        acc = {}
        for (a, b), v in out.entries.items():
            s = a[0]
            for c in _paths_into(g, s, 2):
                acc[(c + a[1:], c + b[1:])] = v
        out = BoxElement(g, out.n + 2, out.sign, acc)
    return out


def _paths_into(g: WeightedGraph, v: int, n: int) -> list:
    return [g.reverse(p) for p in g.paths_from(v, n)]


def is_unitary(u: BoxElement, sources=None, tol: float = 0.0) -> bool:
    one = unit(u.graph, u.n, u.sign, sources)
    return (u * u.adjoint()).equals(one, tol) and (u.adjoint() * u).equals(one, tol)


def unitary_tower(u: BoxElement, n: int, sign: str = "+", tol: float = 0.0) -> BoxElement:
    """u_n^sign built from a unitary u of P_1^+ by the Rev/shift recursion.

    Plus sign: x1 = u, x2 = u Rev(u), x_{2k+1} = x_{2k} sh^k(u),
    x_{2k+2} = x_{2k+1} sh^k(Rev u).  Minus sign: x1 = Rev(u), x2 = x1 u,
    x_{2k+1} = x_{2k} sh^k(Rev u), x_{2k+2} = x_{2k+1} sh^k(u).  Factors of
    the wrong parity enter through a one-strand left inclusion, smaller
    elements through the right inclusion.
    """
    if u.n != 1 or u.sign != "+":
        raise SizeMismatch("u must lie in P_1^+")
    if not is_unitary(u, tol=tol):
        raise NotUnitary("u is not unitary in P_1^+")
    g = u.graph
    if n == 0:
        return unit(g, 0, sign)
    ru = rev(u)

    def factor(k: int, base: BoxElement) -> BoxElement:
        f = sh(base, k)
        return f if f.sign == sign else left_include(f)

    first, second = (u, ru) if sign == "+" else (ru, u)
    x = first
    for m in range(2, n + 1):
        k = (m - 1) // 2
        base = second if m % 2 == 0 else first
        x = box_mul(include(x), factor(k, base))
    return x


def ad_action(u_n: BoxElement, x: BoxElement) -> BoxElement:
    return u_n * x * u_n.adjoint()


# --- dense helpers ---------------------------------------------------------------------

def dense_blocks(x: BoxElement, sources=None) -> dict:
    """(source, target) -> (path list, dense numpy matrix) for oracle checks."""
    g = x.graph
    out = {}
    if sources is None:
        sources = sorted({a[0] for a, _ in x.entries})
    for v in sources:
        paths = g.paths_from(v, x.n)
        by_t = {}
        for p in paths:
            by_t.setdefault(g.path_target(p), []).append(p)
        for t, ps in by_t.items():
            idx = {p: i for i, p in enumerate(ps)}
            m = np.zeros((len(ps), len(ps)), dtype=object)
            for (a, b), val in x.entries.items():
                if a in idx and b in idx:
                    m[idx[a], idx[b]] = val
            out[(v, t)] = (ps, m)
    return out


def block_dims(g: WeightedGraph, n: int, sign: str = "+", sources=None) -> dict:
    """(v, w) -> |C_n(v, w)| for the simple blocks of P_n^sign."""
    if sources is None:
        sources = [v for v in range(len(g.vertices)) if g.is_even(v) == (sign == "+")]
    out = {}
    for v in sources:
        for p in g.paths_from(v, n):
            key = (v, g.path_target(p))
            out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))
