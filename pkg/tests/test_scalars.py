import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from bgpa.scalars import (
    MixedField, QScalar, field_of, format_qscalar, is_exact, parse_qscalar, sqrt_scalar,
    squarefree_part, to_float,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def qscalars(draw, d=2):
    return QScalar(draw(rationals), draw(rationals), d)


@st.composite
def nonzero_qscalars(draw, d=2):
    x = draw(qscalars(d))
    return x if x else QScalar(1)


def test_conjugate_product():
    assert QScalar(1, 1, 2) * QScalar(1, -1, 2) == -1


def test_invert_sqrt2():
    assert QScalar(0, 1, 2).inverse() == QScalar(0, Fraction(1, 2), 2)


def test_sign_three_minus_two_sqrt2():
    # 9 > 8, so 3 - 2*sqrt(2) > 0 although it is close to zero
    assert QScalar(3, -2, 2).sign() == 1
    assert QScalar(-3, 2, 2).sign() == -1
    assert QScalar(2, -3, 2).sign() == -1


def test_mixed_field_rejected():
    with pytest.raises(MixedField):
        QScalar(0, 1, 2) + QScalar(0, 1, 3)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QScalar(0).inverse()


def test_rational_mixes_with_any_field():
    assert (QScalar(2) + QScalar(0, 1, 3)).d == 3
    assert field_of([QScalar(1), QScalar(0, 1, 6)]) == 6


def test_squarefree_normalization():
    assert squarefree_part(12) == (2, 3)
    x = QScalar(0, 1, 8)  # sqrt(8) = 2 sqrt(2)
    assert x.d == 2 and x.b == 2
    assert QScalar(0, 1, 4) == 2


def test_sqrt_membership():
    assert QScalar(3, 2, 2).sqrt(2) == QScalar(1, 1, 2)  # (1 + sqrt2)^2
    assert QScalar(2).sqrt(2) == QScalar(0, 1, 2)
    assert QScalar(1, 1, 2).sqrt() is None
    assert QScalar.sqrt_of(Fraction(3, 2)) == QScalar(0, Fraction(1, 2), 6)
    assert sqrt_scalar(QScalar(9, 4, 2)) == QScalar(1, 2, 2)
    assert not is_exact(sqrt_scalar(QScalar(1, 1, 2)))


def test_format_parse_examples():
    assert format_qscalar(QScalar(Fraction(1, 2), 3, 5)) == "1/2+3/1*sqrt(5)"
    assert parse_qscalar("sqrt(6)") == QScalar(0, 1, 6)
    assert parse_qscalar("-2/3") == Fraction(-2, 3)
    assert parse_qscalar("1/2-1/3*sqrt(2)") == QScalar(Fraction(1, 2), Fraction(-1, 3), 2)


@given(qscalars(), qscalars(), qscalars())
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x - x == 0


@given(nonzero_qscalars(), qscalars())
def test_inverses(x, y):
    assert x * x.inverse() == 1
    assert (y / x) * x == y


@given(qscalars(), qscalars())
def test_compare_matches_float(x, y):
    diff = to_float(x) - to_float(y)
    if abs(diff) > 1e-9:
        assert (x < y) == (diff < 0)
    assert (x - y).sign() == (0 if x == y else (1 if y < x else -1))


@given(qscalars())
def test_approx_round_trip(x):
    direct = float(x.a) + float(x.b) * math.sqrt(2)
    assert x.to_approx().close(direct)
    ext = x.to_approx(extended=True)
    with mpmath.workdps(60):
        exact = mpmath.mpf(x.a.numerator) / x.a.denominator + (
            mpmath.mpf(x.b.numerator) / x.b.denominator) * mpmath.sqrt(2)
        assert abs(ext.value - exact) <= mpmath.mpf(10) ** -50 * max(1, abs(exact))


@given(qscalars(d=6))
def test_text_round_trip(x):
    assert parse_qscalar(format_qscalar(x)) == x


@given(qscalars())
def test_square_has_root_in_field(x):
    r = (x * x).sqrt(2)
    assert r is not None and r * r == x * x and r.sign() >= 0
