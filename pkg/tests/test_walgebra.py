import pytest
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.series import FractionalSeries
from satohurwitz.walgebra import (
    RamificationData,
    VElement,
    WElement,
    embed_v_in_w,
    format_w,
    pair_T2,
    parse_w,
    symmetrize,
    trace,
)

from conftest import rationals

RAM = RamificationData.of([[2, 1], [3]])


@st.composite
def w_elements(draw, ram=RAM):
    parts = []
    for key in ram.keys:
        terms = draw(st.dictionaries(st.integers(-4, 4), rationals, max_size=4))
        parts.append(FractionalSeries.make(ram.e(key), terms))
    return WElement(ram, tuple(parts))


def same(a, b):
    return all(not (x - y).terms() for x, y in zip(a.parts, b.parts))


def test_ramification_data():
    assert RAM.keys == ((1, 1), (1, 2), (2, 1))
    assert (RAM.n, RAM.r, RAM.rbar, RAM.lcm) == (3, 2, 3, 6)
    assert RAM.header() == "E = [[2,1],[3]]"


@pytest.mark.parametrize("parts", [[], [[2], [3]], [[0, 2]]])
def test_ramification_rejects(parts):
    with pytest.raises(ValueError):
        RamificationData.of(parts)


def test_trace_by_hand():
    w = WElement.monomials(RAM, {(1, 1): -1, (1, 2): 2, (2, 1): 3})
    t = trace(w)
    assert t.branch(1).as_dict() == {2: 1}  # u^-1 on the e = 2 sheet drops out
    assert t.branch(2).as_dict() == {1: 3}


@given(w_elements(), w_elements())
def test_trace_is_linear(a, b):
    assert same(trace(a + b), trace(a) + trace(b))


@given(w_elements())
def test_trace_of_embedded_v_is_n_times(a):
    v = VElement.of([FractionalSeries.make(1, {0: 1, 1: 2}), FractionalSeries.make(1, {-1: 3})])
    # tr(v w) = v tr(w) for v in V
    assert same(trace(embed_v_in_w(v, RAM) * a), v * trace(a))
    assert same(trace(embed_v_in_w(v, RAM)), v.scale(RAM.n))


@given(w_elements(), w_elements())
def test_pairing_is_symmetric(a, b):
    assert pair_T2(a, b) == pair_T2(b, a)


@pytest.mark.parametrize("e", [1, 2, 3])
def test_pairing_monomials(e):
    ram = RamificationData.of([[e]])
    key = ram.keys[0]
    for a in range(-6, 7):
        for b in range(-6, 7):
            want = e if a + b == -e else 0
            assert pair_T2(WElement.monomial(ram, key, a), WElement.monomial(ram, key, b)) == want


@given(st.integers(1, 5), st.dictionaries(st.integers(-10, 10), rationals, max_size=6))
def test_symmetrize_matches_filter(e, terms):
    f = FractionalSeries.make(e, terms)
    want = {m // e: c * e for m, c in f.terms() if m % e == 0}
    assert symmetrize(f).as_dict() == want


@given(w_elements())
def test_text_round_trip(w):
    assert parse_w(format_w(w)) == w


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_w("E = [[2]]\ne=2; 1*z^1/2\ne=2; 0")
    with pytest.raises(ValueError):
        parse_w("E = nonsense\ne=1; 0")
