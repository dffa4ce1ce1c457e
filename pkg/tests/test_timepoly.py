import pytest
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.series import Q
from satohurwitz.timepoly import TimePoly, parse_timepoly, tvar

from conftest import rationals

VARS = [tvar(1, 1, 1), tvar(1, 1, 2), tvar(2, 1, 1, "s")]


@st.composite
def polys(draw, D=4):
    out = TimePoly.const(draw(rationals), D)
    for _ in range(draw(st.integers(0, 3))):
        term = TimePoly.const(draw(rationals), D)
        for v in draw(st.lists(st.sampled_from(VARS), max_size=3)):
            term = term * TimePoly.var(v, D)
        out = out + term
    return out


def test_truncation_by_weight():
    D = 3
    x, y = TimePoly.var(VARS[0], D), TimePoly.var(VARS[1], D)
    assert not (y * y)  # weight 4
    assert (x * y).terms
    assert not (x * x * y)


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a


@given(polys())
def test_inverse(a):
    if a.constant_term() == 0:
        with pytest.raises(ZeroDivisionError):
            a.inverse()
        return
    assert a * a.inverse() == TimePoly.const(1, a.D)


@given(polys())
def test_text_round_trip(a):
    assert parse_timepoly(a.to_literal(), a.D) == a


def test_parse_rejects_bad_factor():
    with pytest.raises(ValueError):
        parse_timepoly("1*q[1,1,1]", 3)


def test_literal_form():
    p = TimePoly.var(VARS[0], 3, Q(1, 2)) + 1
    assert parse_timepoly(p.to_literal(), 3) == p
