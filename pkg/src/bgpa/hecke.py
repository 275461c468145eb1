"""Hecke pairs, cocycle actions and crossed products over finite data.

Groups are permutation groups (tuples, see ``groups``); cosets gH are
indexed by integers in the order of ``PermGroup.left_cosets``.  The algebra A
is a finite-dimensional multi-matrix algebra with rational entries and a
faithful tracial state; its elements are block-diagonal numpy object arrays
of rationals (ints or Fractions), so every identity is checked exactly.

A crossed-product element is stored as the full function G -> A (the groups
here have at most a few dozen elements), which keeps the printed formulas
literal: the product sums over a system of coset representatives, and
representative independence is re-checked with a random system.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .groups import PermGroup, pinv, pmul
from .symmetry import ExplicitAction


class HeckeError(ValueError):
    pass


class IndexInfinite(HeckeError):
    pass


class ScopeTooSmall(HeckeError):
    pass


class AxiomFailure(HeckeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotTracePreserving(HeckeError):
    pass


# --- Hecke pairs ------------------------------------------------------------------------

@dataclass
class HeckeContext:
    group: PermGroup
    sub: PermGroup
    coset_reps: list
    coset_of: dict  # element -> coset index
    double_cosets: list  # sorted tuples of elements
    dc_of: dict  # element -> double coset index
    indices: list  # [H : H cap gHg^-1] per double coset
    scope: str = "finite"
    info: dict = field(default_factory=dict)

    @property
    def n_cosets(self) -> int:
        return len(self.coset_reps)

    @property
    def dc_reps(self) -> list:
        return [d[0] for d in self.double_cosets]

    def coset(self, g) -> int:
        return self.coset_of[g]

    def with_random_reps(self, seed: int) -> "HeckeContext":
        """Same pair with a random system of coset representatives."""
        rng = random.Random(seed)
        cosets = self.group.left_cosets(self.sub)
        reps = [rng.choice(c) for c in cosets]
        return HeckeContext(self.group, self.sub, reps, self.coset_of, self.double_cosets,
                            self.dc_of, self.indices, self.scope, dict(self.info, reps_seed=seed))


def build_hecke(group: PermGroup, sub: PermGroup, scope: str = "finite") -> HeckeContext:
    if any(h not in group for h in sub.elements):
        raise HeckeError("H is not a subgroup of G")
    cosets = group.left_cosets(sub)
    coset_of = {x: i for i, c in enumerate(cosets) for x in c}
    dcs = group.double_cosets(sub)
    dc_of = {x: i for i, d in enumerate(dcs) for x in d}
    indices = []
    for d in dcs:
        q, r = divmod(len(d), sub.order)
        if r:
            raise IndexInfinite("double coset size is not a multiple of |H|")
        indices.append(q)
    return HeckeContext(group, sub, [c[0] for c in cosets], coset_of, dcs, dc_of, indices, scope,
                        {"G": group.order, "H": sub.order})


def build_hecke_from_action(action: ExplicitAction, o: str | None = None) -> HeckeContext:
    """(G, G_o) for a finite graph action, G acting on vertices and edges."""
    g = action.graph
    nv = len(g.vertices)
    els = action.elements()
    perm = {x: tuple(x.vperm) + tuple(nv + i for i in x.eperm) for x in els}
    degree = nv + len(g.edges)
    gens = [perm[x] for x in action.generators] or [tuple(range(degree))]
    group = PermGroup(degree, gens, "G")
    base = g.index[o or action.base_vertex]
    stab = [perm[x] for x in action.stabilizer(base)]
    sub = PermGroup(degree, stab or [tuple(range(degree))], "G_o")
    ctx = build_hecke(group, sub)
    even_orbit = {x.vperm[base] for x in els}
    ctx.info.update({"base": g.vid(base), "orbit_size": len(even_orbit),
                     "transitive_on_V+": len(even_orbit) == g.n_even})
    return ctx


def hecke_structure_constants(ctx: HeckeContext, i: int, j: int) -> list:
    """Coefficients of 1_{D_i} * 1_{D_j} on the double-coset indicators.

    (1_{D1} * 1_{D2})(g) = #{x in D1 : x^-1 g in D2}.
    """
    d1 = ctx.double_cosets[i]
    dj = ctx.double_cosets[j]
    dset = set(dj)
    out = []
    for d in ctx.double_cosets:
        g = d[0]
        out.append(sum(1 for x in d1 if pmul(pinv(x), g) in dset))
    # the convolution is constant on double cosets; check that
    for k, d in enumerate(ctx.double_cosets):
        for g in d[1:3]:
            if sum(1 for x in d1 if pmul(pinv(x), g) in dset) != out[k]:
                raise HeckeError("convolution not bi-invariant")
    return out


def hecke_table(ctx: HeckeContext) -> np.ndarray:
    r = len(ctx.double_cosets)
    t = np.zeros((r, r, r), dtype=np.int64)
    for i in range(r):
        for j in range(r):
            t[i, j] = hecke_structure_constants(ctx, i, j)
    return t


def hecke_associative(ctx: HeckeContext) -> bool:
    t = hecke_table(ctx)
    left = np.einsum("ijp,pkq->ijkq", t, t)
    right = np.einsum("jkp,ipq->ijkq", t, t)
    return bool(np.array_equal(left, right))


def normal_quotient_check(ctx: HeckeContext) -> dict:
    """For H normal: 1_{xH} * 1_{yH} = |H| 1_{xyH}, i.e. C[G/H] after scaling by 1/|H|."""
    grp, sub = ctx.group, ctx.sub
    normal = all(pmul(pmul(g, h), pinv(g)) in sub for g in grp.generators for h in sub.elements)
    t = hecke_table(ctx)
    r = len(ctx.double_cosets)
    ok = normal and r == ctx.n_cosets
    mult = {}
    for i in range(r):
        for j in range(r):
            nz = [k for k in range(r) if t[i, j, k]]
            if len(nz) != 1 or t[i, j, nz[0]] != sub.order:
                ok = False
                continue
            mult[(i, j)] = nz[0]
    if ok:
        # compare with the quotient group law on representatives
        for i, di in enumerate(ctx.double_cosets):
            for j, dj in enumerate(ctx.double_cosets):
                if ctx.dc_of[pmul(di[0], dj[0])] != mult[(i, j)]:
                    ok = False
    return {"normal": normal, "isomorphic_to_quotient_group_algebra": ok, "order": r}


# --- finite tracial algebras -------------------------------------------------------------

def _zeros(n: int) -> np.ndarray:
    a = np.empty((n, n), dtype=object)
    a.fill(0)
    return a


def _num(x):
    """Fraction -> int when integral; Python ints keep object matmuls fast."""
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _as_exact(a) -> np.ndarray:
    out = np.empty(np.shape(a), dtype=object)
    for idx, x in np.ndenumerate(np.asarray(a, dtype=object)):
        out[idx] = _num(x)
    return out


@dataclass
class TracialAlgebra:
    """A = direct sum of M_{n_i}, tau(a) = sum_i w_i Tr(a_i), tau(1) = 1."""

    blocks: tuple
    weights: tuple = None

    def __post_init__(self):
        self.blocks = tuple(int(b) for b in self.blocks)
        if self.weights is None:
            tot = sum(b * b for b in self.blocks)
            self.weights = tuple(Fraction(b, tot) for b in self.blocks)
        self.weights = tuple(Fraction(w) for w in self.weights)
        if any(w <= 0 for w in self.weights):
            raise HeckeError("trace weights must be positive (faithful trace)")
        if sum(w * b for w, b in zip(self.weights, self.blocks)) != 1:
            raise HeckeError("tau(1) must be 1")
        self.N = sum(self.blocks)
        self.offsets = [sum(self.blocks[:i]) for i in range(len(self.blocks))]
        self._basis = None

    @classmethod
    def commutative(cls, n: int) -> "TracialAlgebra":
        return cls((1,) * n)

    def zero(self):
        return _zeros(self.N)

    def one(self):
        a = _zeros(self.N)
        for i in range(self.N):
            a[i, i] = 1
        return a

    def scalar(self, c):
        return self.one() * _num(c)

    def basis(self) -> list:
        """Block matrix units, in block order."""
        if self._basis is None:
            out = []
            for off, b in zip(self.offsets, self.blocks):
                for i in range(b):
                    for j in range(b):
                        a = _zeros(self.N)
                        a[off + i, off + j] = 1
                        out.append(a)
            self._basis = out
        return self._basis

    @property
    def dim(self) -> int:
        return sum(b * b for b in self.blocks)

    def positions(self) -> list:
        return [(off + i, off + j) for off, b in zip(self.offsets, self.blocks)
                for i in range(b) for j in range(b)]

    def vec(self, a) -> list:
        return [a[p] for p in self.positions()]

    def tau(self, a):
        total = Fraction(0)
        for off, b, w in zip(self.offsets, self.blocks, self.weights):
            total += w * sum((a[off + i, off + i] for i in range(b)), Fraction(0))
        return total

    @staticmethod
    def mul(a, b):
        return a.dot(b)

    @staticmethod
    def star(a):
        return np.conj(a.T)

    @staticmethod
    def eq(a, b) -> bool:
        return a.tolist() == b.tolist()  # faster than an object ufunc on small blocks

    def is_zero(self, a) -> bool:
        return bool(np.all(a == 0))


def permutation_matrix(p: tuple) -> np.ndarray:
    m = _zeros(len(p))
    for i, j in enumerate(p):
        m[j, i] = 1
    return m


# --- cocycle actions ----------------------------------------------------------------------

@dataclass
class CocycleAction:
    """gamma(g, s) -> automorphism (callable on A), u(g, s, t) -> unitary of A.

    s, t are coset indices; the coset H itself has index ``ctx.coset(identity)``.
    """

    ctx: HeckeContext
    algebra: TracialAlgebra
    gamma: object
    u: object
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def g_apply(self, g, s, a):
        return self.gamma(g, s)(a)

    def gamma_at(self, g, s):
        key = ("gamma", g, s)
        f = self._cache.get(key)
        if f is None:
            f = self._cache[key] = self.gamma(g, s)
        return f

    def u_at(self, g, s, t):
        key = ("u", g, s, t)
        m = self._cache.get(key)
        if m is None:
            m = self._cache[key] = self.u(g, s, t)
        return m

    @property
    def one_coset(self) -> int:
        return self.ctx.coset(self.ctx.group.identity)


def ordinary_action(ctx: HeckeContext, algebra: TracialAlgebra, alpha, name: str = "ordinary") -> CocycleAction:
    """gamma_{g,s} = alpha_g, u = 1; ``alpha(g)`` returns a callable on A."""
    one = algebra.one()
    return CocycleAction(ctx, algebra, lambda g, s: alpha(g), lambda g, s, t: one, name)


def permutation_action(ctx: HeckeContext, algebra: TracialAlgebra | None = None) -> CocycleAction:
    """G acting on C^degree by permuting coordinates."""
    n = ctx.group.degree
    algebra = algebra or TracialAlgebra.commutative(n)
    if algebra.blocks != (1,) * n:
        raise HeckeError("coordinate permutation needs A = C^degree")
    def alpha(g):
        # P a P^T with P e_i = e_{g(i)}, done by indexing
        idx = np.ix_(g, g)

        def act(a):
            out = np.empty_like(a)
            out[idx] = a
            return out
        return act

    return ordinary_action(ctx, algebra, alpha, "permutation")


def trivial_action(ctx: HeckeContext, algebra: TracialAlgebra | None = None) -> CocycleAction:
    algebra = algebra or TracialAlgebra((1,))
    return ordinary_action(ctx, algebra, lambda g: (lambda a: a), "trivial")


def coboundary_twist(base: CocycleAction, v: list, name: str = "twisted") -> CocycleAction:
    """Twist an ordinary action by unitaries v_s indexed by cosets.

    gamma_{g,s} = Ad(v_{gs}) alpha_g Ad(v_s)^{-1},
    u_{g,s,t} = v_{gs} alpha_g(v_s* v_t) v_{gt}*.
    """
    ctx, alg = base.ctx, base.algebra
    star = alg.star
    cos = ctx.coset_reps
    v = [_as_exact(x) for x in v]

    def gs(g, s):
        return ctx.coset(pmul(g, cos[s]))

    def gamma(g, s):
        al = base.gamma(g, s)
        vl, vr = v[gs(g, s)], v[s]
        vls, vrs = star(vl), star(vr)
        return lambda a: vl.dot(al(vrs.dot(a).dot(vr))).dot(vls)

    def u(g, s, t):
        al = base.gamma(g, s)
        return v[gs(g, s)].dot(al(star(v[s]).dot(v[t]))).dot(star(v[gs(g, t)]))

    return CocycleAction(ctx, alg, gamma, u, name)


def corrupt(action: CocycleAction, g, s: int, t: int, factor=-1) -> CocycleAction:
    """Multiply u_{g,s,t} by a scalar at a single triple."""
    orig = action.u

    def u(g2, s2, t2):
        m = orig(g2, s2, t2)
        return m * _num(factor) if (g2, s2, t2) == (g, s, t) else m

    return CocycleAction(action.ctx, action.algebra, action.gamma, u, action.name + "+corrupt")


@dataclass
class CocycleReport:
    ok: bool
    axiom: int | None = None
    witness: dict | None = None
    checked: int = 0
    trace_preserving: bool = True

    def to_dict(self) -> dict:
        return {"ok": self.ok, "axiom": self.axiom, "witness": self.witness,
                "checked": self.checked, "trace_preserving": self.trace_preserving}


def validate_cocycle(action: CocycleAction, elements=None) -> CocycleReport:
    """Check axioms (1)-(6) in order; stop at the first violation with a witness."""
    if elements is None and "report" in action._cache:
        return action._cache["report"]
    rep = _validate(action, elements)
    if elements is None:
        action._cache["report"] = rep
    return rep


def _validate(action: CocycleAction, elements) -> CocycleReport:
    ctx, alg = action.ctx, action.algebra
    grp = ctx.group
    els = list(elements) if elements is not None else grp.elements
    cos = range(ctx.n_cosets)
    basis = alg.basis()
    ident = grp.identity
    one = alg.one()
    reps = ctx.coset_reps
    checked = 0

    def gsc(g, s):
        return ctx.coset(pmul(g, reps[s]))

    img = {}

    def gam(g, s):
        key = (g, s)
        if key not in img:
            f = action.gamma_at(g, s)
            img[key] = [f(b) for b in basis]
        return img[key]

    unit_u = {}

    def is_one(u):
        # u_at caches its matrices, so identity is decided once per object
        k = id(u)
        if k not in unit_u:
            unit_u[k] = (u, alg.eq(u, one))
        return unit_u[k][1]

    def wit(**kw):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in kw.items()}

    for g in els:
        for s in cos:
            for b, x in zip(basis, gam(g, s)):
                if alg.tau(x) != alg.tau(b):
                    return CocycleReport(False, None, wit(g=g, s=s), checked, False)
    # (1)
    for s in cos:
        checked += 1
        if any(not alg.eq(x, b) for x, b in zip(gam(ident, s), basis)):
            return CocycleReport(False, 1, wit(s=s), checked)
    # (2)
    for g in els:
        for h in els:
            gh = pmul(g, h)
            for s in cos:
                checked += 1
                f = action.gamma_at(g, gsc(h, s))
                if any(not alg.eq(x, f(y)) for x, y in zip(gam(gh, s), gam(h, s))):
                    return CocycleReport(False, 2, wit(g=g, h=h, s=s), checked)
    # (3)
    for g in els:
        for s in cos:
            for t in cos:
                checked += 1
                u = action.u_at(g, s, t)
                if is_one(u):
                    bad = any(not alg.eq(x, y) for x, y in zip(gam(g, s), gam(g, t)))
                else:
                    us = alg.star(u)
                    bad = any(not alg.eq(x, u.dot(y).dot(us)) for x, y in zip(gam(g, s), gam(g, t)))
                if bad:
                    return CocycleReport(False, 3, wit(g=g, s=s, t=t), checked)
    # (4)
    for s in cos:
        for t in cos:
            checked += 1
            if not alg.eq(action.u_at(ident, s, t), one):
                return CocycleReport(False, 4, wit(g=ident, s=s, t=t), checked)
    for g in els:
        for s in cos:
            checked += 1
            if not alg.eq(action.u_at(g, s, s), one):
                return CocycleReport(False, 4, wit(g=g, s=s, t=s), checked)
    # (5)
    for g in els:
        for s in cos:
            for t in cos:
                for r in cos:
                    checked += 1
                    lhs = action.u_at(g, s, t).dot(action.u_at(g, t, r))
                    if not alg.eq(lhs, action.u_at(g, s, r)):
                        return CocycleReport(False, 5, wit(g=g, s=s, t=t, r=r), checked)
    # (6)
    for g in els:
        for h in els:
            gh = pmul(g, h)
            for s in cos:
                hs = gsc(h, s)
                f = action.gamma_at(g, hs)
                for t in cos:
                    checked += 1
                    rhs = f(action.u_at(h, s, t))
                    right = action.u_at(g, hs, gsc(h, t))
                    if not is_one(right):
                        rhs = rhs.dot(right)
                    if not alg.eq(action.u_at(gh, s, t), rhs):
                        return CocycleReport(False, 6, wit(g=g, h=h, s=s, t=t), checked)
    return CocycleReport(True, None, None, checked)


# --- exact linear algebra helpers ------------------------------------------------------------

def _rref(rows: list) -> tuple:
    """Reduced row echelon form over Q; returns (rows, pivot columns).

    Rows are held sparsely because the matrices met here are mostly zeros.
    """
    ncols = len(rows[0]) if rows else 0
    pending = [{c: Fraction(x) for c, x in enumerate(r) if x != 0} for r in rows]
    done = {}  # pivot column -> normalized row
    for row in pending:
        for c, piv in done.items():
            f = row.get(c)
            if f:
                for k, y in piv.items():
                    v = row.get(k, 0) - f * y
                    if v:
                        row[k] = v
                    else:
                        row.pop(k, None)
        if not row:
            continue
        c = min(row)
        inv_p = 1 / row[c]
        row = {k: v * inv_p for k, v in row.items()}
        for other in done.values():
            f = other.get(c)
            if f:
                for k, y in row.items():
                    v = other.get(k, 0) - f * y
                    if v:
                        other[k] = v
                    else:
                        other.pop(k, None)
        done[c] = row
    pivots = sorted(done)
    out = []
    for c in pivots:
        dense = [0] * ncols
        for k, v in done[c].items():
            dense[k] = _num(v)
        out.append(dense)
    return out, pivots


def exact_rank(rows: list) -> int:
    return len(_rref(rows)[1]) if rows else 0


def _positive_definite(gram: list) -> bool:
    """Exact LDL^T: all pivots strictly positive."""
    a = [[Fraction(x) for x in row] for row in gram]
    n = len(a)
    for k in range(n):
        if a[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return True


# --- crossed products --------------------------------------------------------------------------

class CPElement:
    """Function G -> A (zero values omitted)."""

    __slots__ = ("values",)

    def __init__(self, values: dict):
        self.values = {g: a for g, a in values.items() if not np.all(a == 0)}

    def __call__(self, g, zero):
        return self.values.get(g, zero)


class CrossedProduct:
    """C[A; G, H] with the ordinary or twisted multiplication and involution."""

    def __init__(self, action: CocycleAction, twisted: bool, check: bool = True):
        self.action = action
        self.ctx = action.ctx
        self.alg = action.algebra
        self.twisted = twisted
        self.zero = self.alg.zero()
        grp = self.ctx.group
        self.h1 = self.ctx.coset(grp.identity)
        if check:
            rep = validate_cocycle(action)
            if not rep.trace_preserving:
                raise NotTracePreserving(f"gamma is not trace preserving at {rep.witness}")
            if twisted and not rep.ok:
                raise AxiomFailure(f"cocycle axiom ({rep.axiom}) fails", rep.witness)
            if not twisted and not rep.ok:
                raise AxiomFailure(f"action axiom ({rep.axiom}) fails", rep.witness)
        self._basis = None
        self._basis_meta = None

    # gamma_g and u shorthands
    def _gam(self, g, s):
        return self.action.gamma_at(g, s)

    def _u(self, g, s, t):
        return self.action.u_at(g, s, t)

    def _c(self, g) -> int:
        return self.ctx.coset(g)

    def mul(self, f1: CPElement, f2: CPElement, reps=None) -> CPElement:
        reps = reps or self.ctx.coset_reps
        zero = self.zero
        out = {}
        # stored values are nonzero, so absent keys are the only zeros to skip
        left = [(s, pinv(s), f1.values[s]) for s in reps if s in f1.values]
        for g in self.ctx.group.elements:
            acc = zero
            for s, si, a in left:
                x = pmul(si, g)
                b = f2.values.get(x)
                if b is None:
                    continue
                if self.twisted:
                    term = a.dot(self._gam(s, self.h1)(b)).dot(self._u(s, self.h1, self._c(x)))
                else:
                    term = a.dot(self._gam(s, self.h1)(b))
                acc = acc + term
            out[g] = acc
        return CPElement(out)

    def star(self, f: CPElement) -> CPElement:
        zero = self.zero
        out = {}
        for g in self.ctx.group.elements:
            gi = pinv(g)
            a = f(gi, zero)
            if not a.any():
                continue
            if self.twisted:
                out[g] = self._gam(g, self._c(gi))(self.alg.star(a)).dot(self._u(g, self._c(gi), self.h1))
            else:
                out[g] = self._gam(g, self.h1)(self.alg.star(a))
        return CPElement(out)

    def omega(self, f: CPElement):
        return self.alg.tau(f(self.ctx.group.identity, self.zero))

    def add(self, f1, f2, c=1):
        keys = set(f1.values) | set(f2.values)
        c = _num(c)
        return CPElement({g: f1(g, self.zero) + f2(g, self.zero) * c for g in keys})

    def scale(self, f, c):
        c = _num(c)
        return CPElement({g: a * c for g, a in f.values.items()})

    def equal(self, f1, f2) -> bool:
        keys = set(f1.values) | set(f2.values)
        return all(self.alg.eq(f1(g, self.zero), f2(g, self.zero)) for g in keys)

    def is_equivariant(self, f: CPElement) -> bool:
        """f(h g k) = gamma_{h,1}(f(g)) u_{h,1,g} for h, k in H."""
        sub = self.ctx.sub.elements
        for g in self.ctx.group.elements:
            a = f(g, self.zero)
            for h in sub:
                img = self._gam(h, self.h1)(a)
                if self.twisted:
                    img = img.dot(self._u(h, self.h1, self._c(g)))
                for k in sub:
                    if not self.alg.eq(f(pmul(pmul(h, g), k), self.zero), img):
                        return False
        return True

    def _stab_op(self, h, r):
        if self.twisted:
            u = self._u(h, self.h1, self._c(r))
            f = self._gam(h, self.h1)
            return lambda a: f(a).dot(u)
        return self._gam(h, self.h1)

    def extend(self, r, a) -> CPElement:
        """The element supported on H r H with f(r) = a."""
        sub = self.ctx.sub.elements
        out = {}
        for h in sub:
            img = self._stab_op(h, r)(a)
            for k in sub:
                out[pmul(pmul(h, r), k)] = img
        return CPElement(out)

    def basis(self) -> list:
        if self._basis is None:
            alg = self.alg
            pos = alg.positions()
            basis, meta = [], []
            for di, r in enumerate(self.ctx.dc_reps):
                stab = [h for h in self.ctx.sub.elements if self._c(pmul(h, r)) == self._c(r)]
                ops = [self._stab_op(h, r) for h in stab]
                rows = []
                for b in alg.basis():
                    acc = alg.zero()
                    for op in ops:
                        acc = acc + op(b)
                    rows.append(alg.vec(acc * Fraction(1, len(ops))))  # rref normalizes
                red, piv = _rref(rows)
                for row, p in zip(red, piv):
                    a = alg.zero()
                    for x, q in zip(row, pos):
                        a[q] = x
                    basis.append(self.extend(r, a))
                    meta.append((di, r, pos[p]))
            self._basis, self._basis_meta = basis, meta
        return self._basis

    @property
    def dim(self) -> int:
        return len(self.basis())

    def coords(self, f: CPElement) -> list:
        self.basis()
        out = []
        for _, r, p in self._basis_meta:
            out.append(f(r, self.zero)[p])
        recon = None
        for c, b in zip(out, self._basis):
            if c:
                recon = self.scale(b, c) if recon is None else self.add(recon, b, c)
        if not self.equal(recon or CPElement({}), f):
            raise HeckeError("element is not in the span of the basis (not equivariant?)")
        return out

    def unit(self) -> CPElement:
        one = self.alg.one()
        return CPElement({h: one for h in self.ctx.sub.elements})

    def j(self, a) -> CPElement:
        """f_a(g) = a for g in H; a must be H-fixed."""
        for h in self.ctx.sub.elements:
            if not self.alg.eq(self._gam(h, self.h1)(a), a):
                raise HeckeError("j needs an element of A^H")
        return CPElement({h: a for h in self.ctx.sub.elements})

    def fixed_subalgebra_basis(self) -> list:
        alg = self.alg
        rows = []
        sub = self.ctx.sub.elements
        for b in alg.basis():
            acc = alg.zero()
            for h in sub:
                acc = acc + self._gam(h, self.h1)(b)
            rows.append(alg.vec(acc * Fraction(1, len(sub))))
        red, _ = _rref(rows)
        out = []
        for row in red:
            a = alg.zero()
            for x, q in zip(row, alg.positions()):
                a[q] = x
            out.append(a)
        return out

    def structure_constants(self) -> np.ndarray:
        b = self.basis()
        d = len(b)
        c = np.empty((d, d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                c[i, j] = self.coords(self.mul(b[i], b[j]))
        return c

    def star_matrix(self) -> np.ndarray:
        b = self.basis()
        return np.array([self.coords(self.star(x)) for x in b], dtype=object).reshape(len(b), len(b))

    def gram(self) -> list:
        b = self.basis()
        stars = [self.star(x) for x in b]
        return [[self.omega(self.mul(x, y)) for y in stars] for x in b]

    def verify(self, seed: int = 0) -> dict:
        """Exhaustive *-algebra axioms on the basis."""
        b = self.basis()
        d = len(b)
        c = self.structure_constants()
        s = self.star_matrix()
        ci = _integerize(c)
        left = np.tensordot(ci, ci, axes=([2], [0]))  # (i,j,k,q)
        right = np.tensordot(ci, ci, axes=([1], [2])).transpose(0, 2, 3, 1)
        assoc = bool(np.array_equal(left, right))
        # star: involutive and anti-multiplicative (real structure constants)
        invol = all(self.equal(self.star(self.star(x)), x) for x in b)
        sc = np.tensordot(c, s, axes=([2], [0]))  # coords of (b_i b_j)^*
        anti = True
        for i in range(d):
            for j in range(d):
                rhs = np.tensordot(np.outer(s[j], s[i]), c, axes=([0, 1], [0, 1]))
                if not all(x == y for x, y in zip(sc[i, j], rhs)):
                    anti = False
        one = self.unit()
        unit = all(self.equal(self.mul(one, x), x) and self.equal(self.mul(x, one), x) for x in b)
        equiv = all(self.is_equivariant(x) for x in b)
        gram = self.gram()
        pd = _positive_definite(gram)
        omega_id = all(self.omega(self.mul(x, self.star(x))) ==
                       sum((self.alg.tau(x(r, self.zero).dot(self.alg.star(x(r, self.zero))))
                            for r in self.ctx.coset_reps), Fraction(0)) for x in b)
        other = self.ctx.with_random_reps(seed)
        rep_indep = all(self.equal(self.mul(x, y), self.mul(x, y, other.coset_reps))
                        for x in b for y in b)
        return {"dim": d, "associative": assoc, "star_involutive": invol,
                "star_antimultiplicative": anti, "unit": unit, "equivariant": equiv,
                "omega_positive_definite": pd, "omega_ffstar_identity": omega_id,
                "representative_independent": rep_indep}

    # --- phi embedding -------------------------------------------------------------------

    def phi(self, f: CPElement) -> np.ndarray:
        """sum_{s,t} gamma_{s,1}(f(t)) u_{s,1,t} (x) e_{s, st} as a block matrix."""
        m, N = self.ctx.n_cosets, self.alg.N
        out = _zeros(m * N)
        reps = self.ctx.coset_reps
        for si, s in enumerate(reps):
            for ti, t in enumerate(reps):
                a = f(t, self.zero)
                if not a.any():
                    continue
                val = self._gam(s, self.h1)(a)
                if self.twisted:
                    val = val.dot(self._u(s, self.h1, ti))
                col = self._c(pmul(s, t))
                out[si * N:(si + 1) * N, col * N:(col + 1) * N] = val
        return out

    def pi(self, g, x: np.ndarray) -> np.ndarray:
        """pi_g(a (x) e_{s,t}) = gamma_{g,s}(a) u_{g,s,t} (x) e_{gs,gt}."""
        m, N = self.ctx.n_cosets, self.alg.N
        out = _zeros(m * N)
        reps = self.ctx.coset_reps
        for s in range(m):
            gs = self._c(pmul(g, reps[s]))
            for t in range(m):
                a = x[s * N:(s + 1) * N, t * N:(t + 1) * N]
                if not a.any():
                    continue
                gt = self._c(pmul(g, reps[t]))
                out[gs * N:(gs + 1) * N, gt * N:(gt + 1) * N] = \
                    self._gam(g, s)(a).dot(self._u(g, s, t))
        return out

    def _block_vec(self, x):
        m, N = self.ctx.n_cosets, self.alg.N
        pos = self.alg.positions()
        return [x[s * N + i, t * N + j] for s in range(m) for t in range(m) for i, j in pos]

    def fixed_point_dim(self) -> int:
        """dim (A (x) M_{G/H})^G, from the kernels of pi_g - id over generators."""
        m, N = self.ctx.n_cosets, self.alg.N
        pos = self.alg.positions()
        units = []
        for s in range(m):
            for t in range(m):
                for i, j in pos:
                    e = _zeros(m * N)
                    e[s * N + i, t * N + j] = 1
                    units.append(e)
        cols = []
        gens = self.ctx.group.generators
        for e in units:
            col = []
            for g in gens:
                col += [x - y for x, y in zip(self._block_vec(self.pi(g, e)), self._block_vec(e))]
            cols.append(col)
        rows = [list(r) for r in zip(*cols)] if cols else []
        return len(units) - exact_rank(rows)

    def verify_phi(self) -> dict:
        b = self.basis()
        phis = [self.phi(x) for x in b]
        hom = all(self.alg.eq(self.phi(self.mul(x, y)), px.dot(py))
                  for x, px in zip(b, phis) for y, py in zip(b, phis))
        star = all(self.alg.eq(self.phi(self.star(x)), np.conj(px.T)) for x, px in zip(b, phis))
        injective = exact_rank([self._block_vec(p) for p in phis]) == len(b)
        # pi is a group action, so invariance under generators covers every element
        invariant = all(self.alg.eq(self.pi(g, p), p) for g in self.ctx.group.generators for p in phis)
        onto = self.fixed_point_dim() == len(b)
        unit = self.alg.eq(self.phi(self.unit()), _identity(self.ctx.n_cosets * self.alg.N))
        diag = True
        m, N = self.ctx.n_cosets, self.alg.N
        for a in self.fixed_subalgebra_basis():
            expect = _zeros(m * N)
            for si, s in enumerate(self.ctx.coset_reps):
                expect[si * N:(si + 1) * N, si * N:(si + 1) * N] = self._gam(s, self.h1)(a)
            if not self.alg.eq(self.phi(self.j(a)), expect):
                diag = False
        return {"homomorphism": hom, "star": star, "injective": injective,
                "pi_invariant": invariant, "onto_fixed_points": onto, "unit": unit,
                "diagonal_image": diag, "dim": len(b)}


def _identity(n):
    a = _zeros(n)
    for i in range(n):
        a[i, i] = 1
    return a


def _integerize(c: np.ndarray) -> np.ndarray:
    """Scale a rational array to int64 when the values allow it, else keep objects."""
    den = 1
    for x in c.flat:
        den = lcm(den, Fraction(x).denominator)
    ints = np.array([int(Fraction(x) * den) for x in c.flat], dtype=object).reshape(c.shape)
    bound = max((abs(x) for x in ints.flat), default=0)
    if bound and bound ** 2 * c.shape[0] < 2 ** 62:
        return ints.astype(np.int64)
    return ints


def crossed_product(ctx: HeckeContext, action: CocycleAction, twisted: bool) -> CrossedProduct:
    if action.ctx is not ctx:
        raise HeckeError("action was built for a different Hecke context")
    return CrossedProduct(action, twisted)


def twisted_degenerates(ctx: HeckeContext, action: CocycleAction, samples: int = 20, seed: int = 0) -> bool:
    """With u = 1 the twisted product and involution equal the ordinary ones."""
    cp_o = CrossedProduct(action, twisted=False)
    cp_t = CrossedProduct(action, twisted=True, check=False)
    b = cp_o.basis()
    rng = random.Random(seed)

    def rand():
        out = CPElement({})
        for x in b:
            out = cp_o.add(out, x, rng.randint(-3, 3))
        return out

    for _ in range(samples):
        x, y = rand(), rand()
        if not cp_o.equal(cp_o.mul(x, y), cp_t.mul(x, y)):
            return False
        if not cp_o.equal(cp_o.star(x), cp_t.star(x)):
            return False
    return True


def hecke_algebra_matches(ctx: HeckeContext) -> bool:
    """A = C, trivial action: f_{D_i} f_{D_j} = (1/|H|) sum_k c_ijk f_{D_k}."""
    cp = CrossedProduct(trivial_action(ctx), twisted=False)
    one = Fraction(1)
    ind = [cp.extend(r, cp.alg.scalar(one)) for r in ctx.dc_reps]
    h = ctx.sub.order
    for i in range(len(ind)):
        for j in range(len(ind)):
            sc = hecke_structure_constants(ctx, i, j)
            expect = CPElement({})
            for k, c in enumerate(sc):  # noqa: B007
                if c:
                    expect = cp.add(expect, ind[k], Fraction(c, h))
            if not cp.equal(cp.mul(ind[i], ind[j]), expect):
                return False
    return True


# --- named pairs and summaries ---------------------------------------------------------------

def named_pair(name: str) -> HeckeContext:
    """'S3/S2', 'Z4/Z2', 'S4/S3', 'G/1' style pairs (subgroup = point stabilizer or 2-torsion)."""
    from .groups import from_cycles, named_group
    big, small = name.split("/")
    grp = named_group(big)
    n = grp.degree
    if small in ("1", "e"):
        sub = grp.subgroup([grp.identity])
    elif small[0].upper() == "S":
        m = int(small[1:])
        gens = [from_cycles(n, (0, 1))] if m >= 2 else [grp.identity]
        if m >= 3:
            gens.append(from_cycles(n, tuple(range(m))))
        sub = grp.subgroup(gens)
    elif small[0].upper() == "Z" and big[0].upper() == "Z":
        m = int(small[1:])
        k = grp.order // m
        gen = grp.generators[0]
        x = grp.identity
        for _ in range(k):
            x = pmul(gen, x)
        sub = grp.subgroup([x])
    else:
        raise HeckeError(f"unknown pair {name!r}")
    ctx = build_hecke(grp, sub)
    ctx.info["name"] = name
    return ctx


def hecke_summary(ctx: HeckeContext) -> dict:
    r = len(ctx.double_cosets)
    table = hecke_table(ctx)
    return {"G": ctx.group.order, "H": ctx.sub.order, "cosets": ctx.n_cosets,
            "double_cosets": r, "indices": list(ctx.indices),
            "structure_constants": table.tolist(), "associative": hecke_associative(ctx),
            "matches_crossed_product": hecke_algebra_matches(ctx), "scope": ctx.scope}
