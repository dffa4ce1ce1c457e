import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.grassmannian import SlotOrdering, index, act_gamma_point, point_from_vecs, polynomial_point, vacuum_point
from satohurwitz.krichever import HyperellipticCover, LaurentMonomialCover, build_point
from satohurwitz.series import FractionalSeries, Q
from satohurwitz.tau_ba import (
    adjoint_ba,
    ba,
    ba_direct,
    ba_expansion_check,
    det_timepoly,
    g_coefficients,
    tau,
)
from satohurwitz.timepoly import TimePoly
from satohurwitz.walgebra import RamificationData, WElement

from conftest import rationals

KP = RamificationData.of([[1]])
T = sympy.symbols("t1:8")


def to_sympy(p):
    out = 0
    for mono, c in p.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for v, k in mono:
            term *= T[v[3] - 1] ** k
        out += term
    return sympy.expand(out)


def complete_h(j):
    """h_j(t) from exp(sum t_i x^i), by sympy series expansion."""
    if j < 0:
        return 0
    x = sympy.Symbol("x")
    gen = sympy.exp(sum(T[i - 1] * x**i for i in range(1, j + 1)))
    return sympy.expand(sympy.series(gen, x, 0, j + 1).removeO().coeff(x, j))


def schur(lam):
    """Jacobi-Trudi determinant det(h_{lam_i - i + j})."""
    n = len(lam)
    return sympy.expand(sympy.Matrix(n, n, lambda i, j: complete_h(lam[i] - i + j)).det())


def hook_point(k, j, c, S=12):
    """Vacuum with the row at u^-k replaced by u^-k + c u^j."""
    o = SlotOrdering(KP)
    vecs = {s: {s: Q(1)} for s in range(-S, 0)}
    vecs[-k] = {-k: Q(1), j: Q(c)}
    return point_from_vecs(o, S, S, vecs)


def test_g_coefficients():
    h = g_coefficients((1, 1), 4)
    for j in range(5):
        assert to_sympy(h[j]) == complete_h(j)


@pytest.mark.parametrize("k,j", [(1, 0), (1, 1), (2, 0), (2, 1), (3, 0), (1, 2)])
def test_tau_of_hook_points_is_a_schur_function(k, j):
    # Plucker coordinate c at the hook (j + 1, 1^(k - 1)), sign (-1)^(k - 1)
    c = Q(5, 3)
    lam = [j + 1] + [1] * (k - 1)
    want = 1 + sympy.Rational(5, 3) * (-1) ** (k - 1) * schur(lam)
    assert to_sympy(tau(hook_point(k, j, c), 4).poly) == sympy.expand(want)


@pytest.mark.parametrize("parts", [[[1]], [[2], [2]], [[2, 1], [3]]])
def test_vacuum_tau_is_one(parts):
    ram = RamificationData.of(parts)
    assert tau(vacuum_point(ram, 6 * ram.lcm), 3).poly.to_literal() == "1"


def test_tau_is_stable_in_the_window(laurent3):
    a = tau(laurent3, 3)
    assert tau(laurent3, 3, a.N + 4).poly == a.poly


def test_tau_rejects_short_window(laurent2):
    with pytest.raises(ValueError):
        tau(laurent2, 3, 1)


def truncate_weight(expr, D=3):
    poly = sympy.Poly(sympy.expand(expr), *T[:D])
    return sum(c * sympy.prod([T[i] ** k for i, k in enumerate(m)])
               for m, c in poly.terms() if sum((i + 1) * k for i, k in enumerate(m)) <= D)


@pytest.mark.parametrize("a", [Q(2), Q(-1, 3)])
def test_positive_unit_multiplies_tau_by_the_cocycle(a):
    # gamma = 1 + a u = exp(sum a_i u^i) gives tau -> exp(sum i a_i t_i) tau
    X = hook_point(1, 1, Q(1), S=20)
    gamma = WElement(KP, (FractionalSeries.make(1, {0: 1, 1: a}),))
    got = to_sympy(tau(act_gamma_point(gamma, X), 3).poly)
    A = sympy.Rational(int(a.numerator), int(a.denominator))
    lin = sum((-1) ** (i + 1) * A ** i * T[i - 1] for i in range(1, 4))  # i a_i = (-1)^(i+1) a^i
    want = truncate_weight(sympy.series(sympy.exp(lin * sympy.Symbol("e")), sympy.Symbol("e"), 0, 4)
                           .removeO().subs(sympy.Symbol("e"), 1) * to_sympy(tau(X, 3).poly))
    assert sympy.expand(got - want) == 0


@given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_matches_sympy(rows):
    want = sympy.Matrix([[sympy.Rational(int(x.numerator), int(x.denominator)) for x in r] for r in rows]).det()
    got = det_timepoly(rows, 2)
    assert to_sympy(got) == want


def test_det_with_nilpotent_block():
    D = 4
    t1 = TimePoly.var(("t", 1, 1, 1), D)
    t2 = TimePoly.var(("t", 1, 1, 2), D)
    M = [[t1, t2], [t2, t1]]  # no unit entries: the minor expansion path
    assert to_sympy(det_timepoly(M, D)) == sympy.expand(T[0] ** 2 - T[1] ** 2)


@pytest.mark.parametrize("spec", [LaurentMonomialCover(2), HyperellipticCover()], ids=lambda s: s.label)
def test_ba_formulas_agree(spec):
    U = build_point(spec, 16)
    for ab in U.ram.keys:
        assert ba(U, ab, 2).equals(ba_direct(U, ab, 2))


def test_ba_of_vacuum_is_the_inverse_time_exponential():
    X = vacuum_point(KP, 12)
    psi = ba(X, (1, 1), 3)
    h = g_coefficients((1, 1), 3, sign=-1)
    # psi = g(t)^-1 u (u^-1) on the vacuum: the u^-j coefficient is h_j(-t)
    for j in range(4):
        assert psi.parts[0].coefficient(-j) == h[j]


def test_ba_expansion_check(laurent2, laurent3):
    for U in (laurent2, laurent3):
        assert ba_expansion_check(U, 3).status == "PASS"


def test_ba_expansion_check_detects_wrong_functions(laurent2):
    # BA functions of a different point cannot expand in this one
    other = polynomial_point(laurent2.ram, laurent2.S)
    other = act_gamma_point(WElement.monomials(other.ram, {(1, 1): -1, (2, 1): -1}), other)
    psis = [ba(other, ab, 2) for ab in other.ram.keys]
    assert ba_expansion_check(laurent2, 2, psis).status == "FAIL"


def test_adjoint_ba_normalization(laurent2):
    psi = adjoint_ba(laurent2, (1, 1), 2)
    assert psi.adjoint
    # v* = delta / v with delta = u^(1 - e) per sheet and v of shift index(U)
    ram = laurent2.ram
    assert sum(psi.v.values()) == ram.rbar - ram.r * ram.n - index(laurent2)
