import pytest
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.grassmannian import (
    SlotOrdering,
    act_gamma_point,
    contains,
    format_point,
    index,
    intersect_V,
    inverse_different,
    is_algebra_point,
    is_hurwitz_point,
    normalizer,
    parse_point,
    perp,
    polynomial_point,
    restrict_window,
    same_point,
    trace_point,
    vacuum_point,
    vm_element,
)
from satohurwitz.report import INCONCLUSIVE, NO, YES
from satohurwitz.series import DepthError, FractionalSeries
from satohurwitz.walgebra import RamificationData, WElement

RAMS = [RamificationData.of(p) for p in ([[1]], [[2], [2]], [[2, 1], [3]], [[3], [1, 2]])]


def test_slot_ordering_levels():
    ram = RamificationData.of([[2, 1], [3]])
    o = SlotOrdering(ram)
    assert o.L == 6
    # z has level L on every sheet, and slots >= 0 are exactly W+
    for kidx, key in enumerate(ram.keys):
        e = ram.e(key)
        assert o.level(kidx, e) == 6
        assert o.slot(kidx, 0) >= 0 > o.slot(kidx, -1)
    for s in range(-20, 20):
        assert o.slot(*o.monomial(s)) == s


@pytest.mark.parametrize("ram", RAMS, ids=str)
def test_reference_indices(ram):
    assert index(vacuum_point(ram, 12)) == 0
    assert index(polynomial_point(ram, 12)) == ram.rbar


@pytest.mark.parametrize("ram", RAMS, ids=str)
def test_polynomial_point_is_hurwitz_algebra(ram):
    U = polynomial_point(ram, 12)
    assert is_algebra_point(U).status == "PASS"
    assert is_hurwitz_point(U).status == "PASS"
    assert contains(U, WElement.one(ram)) == YES


def test_vacuum_is_not_an_algebra():
    ram = RAMS[1]
    assert contains(vacuum_point(ram, 12), WElement.one(ram)) == NO
    assert is_algebra_point(vacuum_point(ram, 12)).status == "FAIL"


def test_contains_below_window_is_inconclusive():
    ram = RAMS[0]
    U = vacuum_point(ram, 6)
    deep = WElement.monomial(ram, (1, 1), -40) + WElement.monomial(ram, (1, 1), 2)
    assert contains(U, deep) == INCONCLUSIVE


@pytest.mark.parametrize("ram", RAMS, ids=str)
def test_perp_of_reference_points(ram):
    for U in (vacuum_point(ram, 12), polynomial_point(ram, 12)):
        P = perp(U)
        assert index(P) == ram.rbar - ram.r * ram.n - index(U)
        assert same_point(perp(P), U)


@given(st.sampled_from(RAMS[1:]), st.data())
def test_monomial_action_shifts_index(ram, data):
    exps = {k: data.draw(st.integers(-2, 2)) for k in ram.keys}
    gamma = WElement.monomials(ram, exps)
    # depth in levels; each round trip costs a few multiples of L
    U = polynomial_point(ram, 12 * SlotOrdering(ram).L)
    V = act_gamma_point(gamma, U)
    assert index(V) == index(U) + sum(exps.values())
    back = act_gamma_point(WElement.monomials(ram, {k: -x for k, x in exps.items()}), V)
    assert same_point(back, U)


@given(st.sampled_from(RAMS), st.integers(-6, 6))
def test_vm_element_shift(ram, m):
    assert sum(s.valuation() for s in vm_element(ram, m).parts) == m


def test_inverse_different_shift():
    ram = RamificationData.of([[2, 1], [3]])
    assert sum(s.valuation() for s in inverse_different(ram).parts) == ram.rbar - ram.r * ram.n


def test_normalizer_reaches_big_cell(laurent3):
    v, X = normalizer(laurent3)
    assert v is not None
    assert index(X) == 0


def test_trace_point_equals_intersection(laurent2, elliptic):
    for U in (laurent2, elliptic):
        assert same_point(trace_point(U), intersect_V(U))


def test_point_text_round_trip(laurent3):
    U = restrict_window(laurent3, 10, 12)
    V = parse_point(format_point(U))
    assert same_point(U, V) and (V.S, V.H) == (10, 12)


def test_point_file_errors(laurent2):
    text = format_point(restrict_window(laurent2, 6, 8))
    with pytest.raises(ValueError, match="rows"):
        parse_point(text.replace("rows = ", "rows = 1"))
    with pytest.raises(ValueError, match="ordering"):
        parse_point(text.replace("level-key/1", "other"))
    lines = text.splitlines()
    lines[-1] = lines[-1].replace("1*", "2*", 1)
    with pytest.raises(ValueError, match="echelon"):
        parse_point("\n".join(lines))


def test_restrict_window_is_idempotent(laurent2):
    U = restrict_window(laurent2, 8, 10)
    assert same_point(restrict_window(U, 8, 10), U)
    assert same_point(U, laurent2)


def test_gamma_point_requires_exact_multiplier():
    ram = RAMS[0]
    gamma = WElement(ram, (FractionalSeries.make(1, {0: 1}, hi=5),))
    with pytest.raises(DepthError):
        act_gamma_point(gamma, polynomial_point(ram, 8))
