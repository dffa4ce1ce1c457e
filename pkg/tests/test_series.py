from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.series import (
    DepthError,
    FractionalSeries,
    Q,
    cyclotomic,
    format_scalar,
    parse_scalar,
    parse_series,
    rational_sqrt,
    root_sum,
)

from conftest import rationals, series, units

F = FractionalSeries


def same(a, b):
    return not (a - b).terms()


def test_scalar_round_trip():
    assert parse_scalar("-3/4") == Q(-3, 4)
    assert format_scalar(Q(6, 4)) == "3/2"
    assert format_scalar(Q(5)) == "5"


@given(rationals)
def test_scalar_text_is_stable(q):
    assert parse_scalar(format_scalar(q)) == q


def test_rational_sqrt():
    assert rational_sqrt(Q(9, 4)) == Q(3, 2)
    assert rational_sqrt(Q(2)) is None


@given(series(e=2), series(e=2), series(e=2))
def test_ring_axioms(a, b, c):
    assert same(a * (b + c), a * b + a * c)
    assert same((a * b) * c, a * (b * c))
    assert same(a * b, b * a)


@given(units(e=3))
def test_inverse_within_depth(a):
    inv = a.invert(12)
    prod = a * inv
    # one-term units invert exactly; otherwise the depth is what was asked
    assert prod.hi == (None if len(a.terms()) == 1 else 12)
    assert prod.terms() == [(0, Q(1))]


def test_inverse_of_pole():
    a = F.make(2, {-1: 1, 0: 2, 3: Q(1, 3)})
    inv = a.invert(8)
    assert inv.valuation() == 1
    assert (a * inv).terms() == [(0, Q(1))]


def test_sqrt_unit_oracle():
    # binomial series of sqrt(1 + z)
    s = F.make(1, {0: 1, 1: 1}).sqrt_unit(5)
    assert s.as_dict() == {0: 1, 1: Q(1, 2), 2: Q(-1, 8), 3: Q(1, 16), 4: Q(-5, 128)}


@given(units(e=1))
def test_sqrt_squares_back(a):
    if rational_sqrt(a.coefficient(0)) is None:
        return
    r = a.sqrt_unit(10)
    assert (r * r - a.truncate(10)).is_zero()


def test_truncated_coefficients_refuse():
    s = F.make(1, {0: 1}, hi=3)
    with pytest.raises(DepthError):
        s.coefficient(3)
    with pytest.raises(DepthError):
        s.truncate(5)


def test_residue_uses_z_exponent():
    assert F.make(1, {-1: 4}).residue() == 4
    assert F.make(2, {-2: 5, -1: 7}).residue() == 5


@given(series(e=1), series(e=1))
def test_leibniz(a, b):
    assert same((a * b).derivative(), a.derivative() * b + a * b.derivative())


def test_compose_polynomials():
    x = F.make(1, {1: 1, 2: 1})
    assert x.compose(x).as_dict() == {1: 1, 2: 2, 3: 2, 4: 1}


def test_compose_needs_truncation_for_poles():
    with pytest.raises(DepthError):
        F.make(1, {-1: 1}).compose(F.make(1, {1: 1, 2: 1}))


@given(series(e=2, lo=-3), units(e=2))
def test_compose_is_multiplicative(a, unit):
    ubar = unit.shift(1)
    comp = F.make(2, a.as_dict(), hi=10).compose(ubar)
    sq = F.make(2, (a * a).as_dict(), hi=10).compose(ubar)
    assert (comp * comp - sq).is_zero()


def test_literal_round_trip():
    s = F.make(2, {1: 1, 3: Q(-2, 3)}, 5)
    assert str(s) == "e=2; 1*z^1/2 + -2/3*z^3/2; O(z^5/2)"
    assert parse_series(str(s)) == s


@pytest.mark.parametrize("text", ["e=0; 0", "e=2; 1*z^1/3", "e=2; 1*z^7/2; O(z^5/2)", "garbage"])
def test_literal_errors(text):
    with pytest.raises(ValueError):
        parse_series(text)


@pytest.mark.parametrize("e,coeffs", [(1, [-1, 1]), (2, [1, 1]), (3, [1, 1, 1]), (4, [1, 0, 1]), (6, [1, -1, 1])])
def test_cyclotomic(e, coeffs):
    assert cyclotomic(e) == coeffs


@given(st.integers(1, 8), st.integers(-20, 20))
def test_power_sums_of_roots(e, m):
    # sum over all e-th roots of xi^(i m) is e when e | m else 0
    classes = {}
    for i in range(e):
        c = (i * m) % e
        classes[c] = classes.get(c, 0) + Q(1)
    assert root_sum(e, classes) == (e if m % e == 0 else 0)


def test_irrational_root_sum_refused():
    with pytest.raises(ValueError):
        root_sum(3, {1: Q(1)})


def test_fraction_inputs_accepted():
    assert F.make(1, {0: Fraction(1, 2)}).coefficient(0) == Q(1, 2)
