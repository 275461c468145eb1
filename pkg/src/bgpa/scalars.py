"""Exact arithmetic in a real quadratic field Q(sqrt d), plus a float fallback.

A QScalar is a + b*sqrt(d) with a, b rational.  Elements with b == 0 are
plain rationals and mix freely with any field; two irrational elements
with different d raise MixedField instead of silently degrading to floats.
Combining a QScalar with a Python float is an explicit request for the
float backend and returns a float.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

import mpmath


class MixedField(ValueError):
    pass


class NotInField(ValueError):
    pass


def squarefree_part(n: int) -> tuple[int, int]:
    """Return (c, d) with n = c*c*d and d square-free."""
    if n <= 0:
        raise ValueError("squarefree_part expects a positive integer")
    c, d, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            c *= p
        if n % p == 0:
            n //= p
            d *= p
        p += 1
    return c, d * n


_SQUAREFREE = set()


def _is_squarefree(d: int) -> bool:
    ok = d >= 1 and squarefree_part(d)[0] == 1
    if ok:
        _SQUAREFREE.add(d)
    return ok


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


@total_ordering
class QScalar:
    """Immutable element a + b*sqrt(d) of Q(sqrt d)."""

    __slots__ = ("_a", "_b", "_d", "_h")

    def __init__(self, a=0, b=0, d: int = 1):
        a = a if type(a) is Fraction else Fraction(a)
        b = b if type(b) is Fraction else Fraction(b)
        if not b:
            self._a, self._b, self._d = a, b, 1
            return
        d = int(d)
        if d > 1 and d not in _SQUAREFREE and not _is_squarefree(d):
            c, sd = squarefree_part(d)
            b, d = b * c, sd
        if d == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            d = 1
        self._a, self._b, self._d = a, b, d

    a = property(lambda self: self._a)
    b = property(lambda self: self._b)
    d = property(lambda self: self._d)

    @classmethod
    def sqrt_of(cls, n) -> "QScalar":
        """sqrt of a nonnegative rational, exact (may introduce a new field)."""
        q = Fraction(n)
        if q < 0:
            raise ValueError("square root of a negative rational")
        r = _rational_sqrt(q)
        if r is not None:
            return cls(r)
        # sqrt(p/q) = sqrt(p*q)/q
        c, d = squarefree_part(q.numerator * q.denominator)
        return cls(0, Fraction(c, q.denominator), d)

    @property
    def is_rational(self) -> bool:
        return self._b == 0

    def _coerce(self, other) -> "QScalar | None":
        if type(other) is QScalar:
            return other
        if type(other) is int:
            return QScalar(other)
        if isinstance(other, (int, Fraction, Rational)) and not isinstance(other, bool):
            return QScalar(other)
        return None

    def _field(self, other: "QScalar") -> int:
        if self._d == 1:
            return other._d
        if other._d == 1 or other._d == self._d:
            return self._d
        raise MixedField(f"cannot mix Q(sqrt {self._d}) with Q(sqrt {other._d})")

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) + other  # explicit switch to the float backend
            return NotImplemented
        d = self._field(o)
        return QScalar(self._a + o._a, self._b + o._b, d)

    __radd__ = __add__

    def __neg__(self):
        return QScalar(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) - other  # explicit switch to the float backend
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other - float(self)  # explicit switch to the float backend
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) * other  # explicit switch to the float backend
            return NotImplemented
        if not self._b and not o._b:
            return QScalar(self._a * o._a)
        d = self._field(o)
        a = self._a * o._a + self._b * o._b * d
        b = self._a * o._b + self._b * o._a
        return QScalar(a, b, d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm a^2 - d b^2."""
        return self._a * self._a - self._d * self._b * self._b

    def inverse(self) -> "QScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QScalar(self._a / n, -self._b / n, self._d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return float(self) / other  # explicit switch to the float backend
            return NotImplemented
        self._field(o)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other / float(self)  # explicit switch to the float backend
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QScalar(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "QScalar":
        # real field: complex conjugation is the identity
        return self

    def galois(self) -> "QScalar":
        return QScalar(self._a, -self._b, self._d)

    def sign(self) -> int:
        """Exact sign of a + b sqrt(d)."""
        sa = (self._a > 0) - (self._a < 0)
        sb = (self._b > 0) - (self._b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        cmp = self._a * self._a - self._b * self._b * self._d
        return sa if cmp > 0 else sb

    def sqrt(self, field: int | None = None) -> "QScalar | None":
        """sqrt(self) if it is a quadratic irrationality, else None.

        With ``field`` given, only roots inside Q(sqrt field) count; this is
        the sqrt-membership test of the working field.
        """
        r = self._sqrt()
        if r is not None and field is not None and r.d not in (1, field):
            return None
        return r

    def _sqrt(self) -> "QScalar | None":
        s = self.sign()
        if s < 0:
            return None
        if s == 0:
            return QScalar(0)
        if self._b == 0:
            return QScalar.sqrt_of(self._a)
        # (p + q sqrt d)^2 = p^2 + d q^2 + 2pq sqrt d
        disc = _rational_sqrt(self.norm())
        if disc is None:
            return None
        for z in ((self._a + disc) / 2, (self._a - disc) / 2):
            p = _rational_sqrt(z)
            if p is None or p == 0:
                continue
            q = self._b / (2 * p)
            cand = QScalar(p, q, self._d)
            if cand.sign() < 0:
                cand = -cand
            if cand * cand == self:
                return cand
        return None

    def __eq__(self, other):
        if other is self:
            return True
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        return self._a == o._a and self._b == o._b and (self._b == 0 or self._d == o._d)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            pass
        self._h = hash(self._a) if self._b == 0 else hash((self._a, self._b, self._d))
        return self._h

    def __bool__(self):
        return self._a != 0 or self._b != 0

    def __float__(self):
        return float(self._a) + float(self._b) * math.sqrt(self._d)

    def to_approx(self, extended: bool = False, tol: float = 1e-9) -> "ApproxScalar":
        if extended:
            with mpmath.workdps(EXTENDED_DPS):
                v = mpmath.mpf(self._a.numerator) / self._a.denominator + (
                    mpmath.mpf(self._b.numerator) / self._b.denominator
                ) * mpmath.sqrt(self._d)
            return ApproxScalar(v, tol)
        return ApproxScalar(float(self), tol)

    def __repr__(self):
        return f"QScalar({format_qscalar(self)!r})"

    def __str__(self):
        return format_qscalar(self)


EXTENDED_DPS = 60


@dataclass(frozen=True)
class ApproxScalar:
    """Floating value with a comparison tolerance; value may be an mpmath.mpf."""

    value: float
    tol: float = 1e-9

    def close(self, other, rel: bool = True) -> bool:
        x = float(self.value)
        y = float(other.value) if isinstance(other, ApproxScalar) else float(other)
        scale = max(1.0, abs(x), abs(y)) if rel else 1.0
        return abs(x - y) <= self.tol * scale

    def __float__(self):
        return float(self.value)


_QS_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)?\s*"
    r"(?:(?P<sgn>[+-])?\s*(?P<b>\d+(?:/\d+)?)?\s*\*?\s*sqrt\((?P<d>\d+)\))?\s*$"
)


def parse_qscalar(text: str) -> QScalar:
    """Parse "p/q" or "p/q+r/s*sqrt(d)" (also "sqrt(d)", "r/s*sqrt(d)")."""
    m = _QS_RE.match(text)
    if not m or (m.group("a") is None and m.group("d") is None):
        raise ValueError(f"bad scalar literal {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    if m.group("d") is None:
        return QScalar(a)
    b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
    if m.group("sgn") == "-":
        b = -b
    d = int(m.group("d"))
    if d < 1:
        raise ValueError("sqrt argument must be positive")
    return QScalar(a, b, d)


def format_qscalar(x: QScalar) -> str:
    a = f"{x.a.numerator}/{x.a.denominator}"
    if x.b == 0:
        return a
    sgn = "+" if x.b > 0 else "-"
    b = abs(x.b)
    return f"{a}{sgn}{b.numerator}/{b.denominator}*sqrt({x.d})"


# --- generic scalar helpers shared by the algebra modules -------------------

Scalar = "QScalar | Fraction | int | float | complex"


def is_exact(x) -> bool:
    return isinstance(x, (QScalar, Fraction, int)) and not isinstance(x, bool)


def to_float(x) -> float:
    if isinstance(x, complex):
        if abs(x.imag) > 1e-12 * max(1.0, abs(x.real)):
            raise ValueError("complex value has a nonzero imaginary part")
        return x.real
    return float(x)


def conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def inv(x):
    """Multiplicative inverse that keeps exact inputs exact."""
    if isinstance(x, QScalar):
        return x.inverse()
    if is_exact(x):
        return Fraction(1) / x
    return 1.0 / x


def is_zero(x, tol: float = 0.0) -> bool:
    if is_exact(x):
        return x == 0
    return abs(x) <= tol


def sqrt_scalar(x):
    """Exact square root when it stays in the field, else a float."""
    if is_exact(x):
        r = QScalar(x).sqrt() if not isinstance(x, QScalar) else x.sqrt()
        if r is not None:
            return r
    return math.sqrt(to_float(x))


def field_of(values) -> int:
    """Common field tag of a collection of exact scalars (1 if all rational)."""
    d = 1
    for v in values:
        if isinstance(v, QScalar) and v.d != 1:
            if d not in (1, v.d):
                raise MixedField(f"values live in Q(sqrt {d}) and Q(sqrt {v.d})")
            d = v.d
    return d
