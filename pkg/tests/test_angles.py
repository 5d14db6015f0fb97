import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdilation.angles import (
    IntervalEstimate,
    RationalAngle,
    angle_distance,
    convergents,
    cos_turns,
    distance_upper,
    turn_distance,
    unit_root,
)
from qdilation.errors import DomainError, InvalidDenominatorError

fractions = st.tuples(st.integers(-500, 500), st.integers(1, 500))


def test_reduction_and_normalization():
    a = RationalAngle(4, 6)
    assert (a.p, a.n) == (2, 3)
    assert RationalAngle(-1, 3) == RationalAngle(2, 3)
    assert RationalAngle(7, 7) == RationalAngle(0, 1)
    assert str(RationalAngle(3, 8)) == "3/8"


def test_invalid_denominator():
    with pytest.raises(InvalidDenominatorError):
        RationalAngle(1, 0)
    with pytest.raises(InvalidDenominatorError):
        RationalAngle(1, -3)


@pytest.mark.parametrize("text", ["0.333", "1/3.0", "pi", "", "1//3"])
def test_parse_rejects_inexact(text):
    with pytest.raises(DomainError):
        RationalAngle.parse(text)


def test_parse_and_json_roundtrip():
    a = RationalAngle.parse(" 5 / 13 ")
    assert a == RationalAngle(5, 13)
    assert RationalAngle.from_json(a.to_json()) == a
    assert RationalAngle.from_json("5/13") == a


@given(fractions)
def test_angle_is_reduced(pn):
    a = RationalAngle(*pn)
    assert 0 <= a.p < a.n
    assert math.gcd(a.p, a.n) == 1
    assert a.fraction == Fraction(pn[0], pn[1]) % 1


@given(fractions, fractions)
def test_angle_group_law(x, y):
    a, b = RationalAngle(*x), RationalAngle(*y)
    assert (a + b) - b == a
    assert a + (-a) == RationalAngle(0, 1)
    assert a.conjugate().conjugate() == a


@given(st.integers(-10**6, 10**6), st.integers(1, 10**4))
def test_unit_root_matches_exact_phase(k, n):
    z = unit_root(k, n)
    with mpmath.workdps(40):
        exact = complex(mpmath.expjpi(mpmath.mpf(2 * k) / n))
    assert abs(z - exact) < 6e-16
    assert abs(abs(z) - 1) < 6e-16


def test_cos_turns_exact_points():
    vals = cos_turns([0, 1, 2, 3, 4, 6], 4)
    assert vals[[0, 2, 4, 5]].tolist() == [1.0, -1.0, 1.0, -1.0]
    assert abs(vals[1]) < 1e-16 and abs(vals[3]) < 1e-16


def test_distances_wrap_around():
    a, b = RationalAngle(1, 10), RationalAngle(9, 10)
    assert turn_distance(a, b) == Fraction(1, 5)
    assert angle_distance(a, b) == pytest.approx(2 * math.pi / 5)


def test_silver_convergents():
    cf = convergents(mpmath.sqrt(2) - 1, 6000)
    assert [str(a) for a in cf.convergents] == ["1/2", "2/5", "5/12", "12/29", "29/70", "70/169", "169/408", "408/985", "985/2378", "2378/5741"]
    assert all(q == 2 for q in cf.partial_quotients[1:])


def test_golden_convergents():
    cf = convergents((mpmath.sqrt(5) - 1) / 2, 13)
    assert [str(a) for a in cf.convergents] == ["1/2", "2/3", "3/5", "5/8", "8/13"]


def test_convergents_terminate_on_rationals():
    cf = convergents(Fraction(7, 19), 1000)
    assert cf.convergents[-1] == RationalAngle(7, 19)
    assert cf.next_denominators[-1] is None
    assert cf.error_bound(len(cf.convergents) - 1) == 0.0


def test_convergents_domain():
    with pytest.raises(DomainError):
        convergents(1.5, 100)
    with pytest.raises(DomainError):
        convergents(0.5, 0)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(10**6 - 1, 10**6)), st.integers(2, 10**5))
def test_convergent_error_bound_holds(x, cap):
    if x == Fraction(1, 2) or x.denominator == 1:
        return
    cf = convergents(x, cap)
    for k, a in enumerate(cf.convergents):
        assert abs(x - a.fraction) <= Fraction(cf.error_bound(k))
        assert distance_upper(x, a) >= abs(x - a.fraction)


def test_distance_upper_high_precision():
    x = mpmath.sqrt(2) - 1
    a = RationalAngle(2378, 5741)
    d = distance_upper(x, a)
    with mpmath.workdps(80):
        exact = abs(mpmath.sqrt(2) - 1 - mpmath.mpf(2378) / 5741)
    assert d >= exact
    assert d < exact * (1 + 1e-12)


finite = st.floats(-1e6, 1e6, allow_nan=False)
radii = st.floats(0, 1e3, allow_nan=False)


@given(finite, radii, finite, radii)
def test_interval_arithmetic_encloses(c1, r1, c2, r2):
    a, b = IntervalEstimate(c1, r1), IntervalEstimate(c2, r2)
    for s in (-1.0, 0.0, 1.0):
        x = c1 + s * r1
        y = c2 - s * r2
        xf, yf = Fraction(x), Fraction(y)
        assert (a + b).lo <= float(xf + yf) <= (a + b).hi or abs(float(xf + yf)) == math.inf
        prod = a * b
        assert Fraction(prod.lo) <= xf * yf <= Fraction(prod.hi)


@given(st.floats(0.5, 100), st.floats(0, 0.4))
def test_interval_reciprocal_encloses(c, frac):
    a = IntervalEstimate(c, c * frac)
    inv = a.reciprocal()
    for x in (a.center - a.radius, a.center, a.center + a.radius):
        assert Fraction(inv.lo) <= 1 / Fraction(x) <= Fraction(inv.hi)


def test_interval_validation():
    with pytest.raises(DomainError):
        IntervalEstimate(0.0, -1.0)
    with pytest.raises(DomainError):
        IntervalEstimate(0.0, 1.0).reciprocal()
    with pytest.raises(DomainError):
        IntervalEstimate.from_bounds(2.0, 1.0)
