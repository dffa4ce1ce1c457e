import random

import pytest

from satohurwitz.grassmannian import echelonize, index, same_point
from satohurwitz.groups import GVElement, GVWElement, lift_automorphism
from satohurwitz.krichever import HyperellipticCover, LaurentMonomialCover
from satohurwitz.picard import (
    PicPoint,
    SemidirectElement,
    act_semidirect,
    act_semidirect_w,
    build_pic_point,
    certify_pic_transitivity,
    check_stabilizer,
    format_pic,
    module_check,
    parse_divisor,
    parse_pic,
    semidirect_mul,
    stabilizer,
    verify_pic_point,
)
from satohurwitz.series import DepthError, FractionalSeries, Q
from satohurwitz.walgebra import RamificationData, WElement

N2 = LaurentMonomialCover(2)


@pytest.fixture(scope="module")
def pic_n2():
    return {d: build_pic_point(N2, {Q(1): d} if d else {}, 24) for d in (0, 1, 2)}


@pytest.mark.parametrize("d", [0, 1, 2])
def test_riemann_roch(pic_n2, d):
    # genus 0: chi = 1 + deg
    assert pic_n2[d].chi == 1 + d == index(pic_n2[d].L)


@pytest.mark.parametrize("d", [0, 1, 2])
def test_verify_and_stabilizer(pic_n2, d):
    p = pic_n2[d]
    assert verify_pic_point(p).status == "PASS"
    assert check_stabilizer(p).status == "PASS"


def test_trivial_divisor_is_A(pic_n2):
    p = pic_n2[0]
    assert same_point(p.A, p.L)


def test_stabilizer_is_A(pic_n2):
    p = pic_n2[1]
    st = stabilizer(p.L)
    assert st.leads and set(st.leads) <= set(p.A.leads) | set(range(-p.A.S, p.A.S))


def test_module_check_rejects_a_non_module(pic_n2):
    A, L = pic_n2[0].A, pic_n2[1].L
    # drop the constant-level row of L: u^-1-type sections still multiply into it
    rows = [r for s, r in zip(L.leads, L.rows) if L.lead_level(s) != 0]
    broken = echelonize(rows, L.ram, L.S, L.H)
    assert module_check(A, broken).status == "FAIL"


def test_wrong_chi_is_reported(pic_n2):
    p = pic_n2[1]
    assert verify_pic_point(PicPoint(p.A, p.L, p.chi + 1)).status == "FAIL"


def test_hyperelliptic_degree_one():
    spec = HyperellipticCover()
    point = (Q(3, 2), Q(3, 4))
    assert spec.on_curve(*point)
    p = build_pic_point(spec, {point: 1}, 20)
    assert p.chi == 1 - spec.genus + 1
    assert verify_pic_point(p).status == "PASS"


def test_divisor_errors():
    with pytest.raises(ValueError):
        build_pic_point(N2, {Q(0): 1}, 20)
    with pytest.raises(ValueError):
        build_pic_point(N2, {Q(1): -1}, 20)
    with pytest.raises(ValueError):
        build_pic_point(HyperellipticCover(), {(Q(5), Q(1)): 1}, 20)


def test_parse_divisor():
    assert parse_divisor("1:2, -1/2") == {Q(1): 2, Q(-1, 2): 1}
    assert parse_divisor("2;3:1") == {(Q(2), Q(3)): 1}
    assert parse_divisor("") == {}
    assert parse_divisor("1:1,1:2") == {Q(1): 3}


def test_pic_round_trip(pic_n2):
    p = pic_n2[1]
    q = parse_pic(format_pic(p))
    assert q.chi == p.chi and same_point(q.A, p.A) and same_point(q.L, p.L)
    with pytest.raises(ValueError):
        parse_pic("chi = x\n=== A\n")
    with pytest.raises(ValueError):
        parse_pic("nothing here")


def _random_element(rng, ram, hi=24):
    maps = [FractionalSeries.make(1, {1: 1, 2: Q(rng.randint(-3, 3), rng.randint(1, 3))}) for _ in range(ram.r)]
    g = lift_automorphism(GVElement(tuple(maps)), ram, hi=hi)
    parts = [FractionalSeries.make(ram.e(k), {0: 1, rng.randint(1, 3): Q(rng.randint(-4, 4))}) for k in ram.keys]
    return SemidirectElement(g, WElement(ram, tuple(parts)))


def _agree(x, y, level=10):
    return (x - y).truncate_levels(level).is_zero()


@pytest.mark.parametrize("seed", range(4))
def test_semidirect_law(seed):
    rng = random.Random(seed)
    ram = RamificationData.of([[2]])
    w = WElement(ram, (FractionalSeries.make(2, {-3: 1, 1: 2}),))
    x1, x2, x3 = (_random_element(rng, ram) for _ in range(3))
    assert _agree(act_semidirect_w(semidirect_mul(x2, x1, 24), w),
                  act_semidirect_w(x2, act_semidirect_w(x1, w)))
    a = semidirect_mul(semidirect_mul(x3, x2, 24), x1, 24)
    b = semidirect_mul(x3, semidirect_mul(x2, x1, 24), 24)
    assert _agree(a.gamma, b.gamma)
    assert _agree(WElement(ram, a.g.sheets), WElement(ram, b.g.sheets))


def test_identity_element():
    ram = RamificationData.of([[2]])
    e = SemidirectElement.identity(ram)
    w = WElement(ram, (FractionalSeries.make(2, {-1: 3, 2: 1}),))
    assert _agree(act_semidirect_w(e, w), w)
    with pytest.raises(ValueError):
        semidirect_mul(e, SemidirectElement.identity(RamificationData.of([[3]])))


def test_action_preserves_module_pairs(pic_n2):
    p = build_pic_point(N2, {Q(1): 1}, 10)
    # the lift must be known far enough past the deepest pole to keep the window
    x = _random_element(random.Random(5), p.A.ram, hi=4 * p.A.H)
    g_only = SemidirectElement(x.g, WElement.one(p.A.ram))
    moved = PicPoint(act_semidirect(g_only, p.A), act_semidirect(x, p.L), p.chi)
    assert moved.L.H >= 10 and index(moved.L) == p.chi
    assert verify_pic_point(moved).status == "PASS"


def test_transitivity_and_negative_control(pic_n2):
    p = pic_n2[1]
    rep = certify_pic_transitivity(p)
    assert rep.status == "PASS", rep.render()
    d = rep.data
    assert d["middle_rank"] == d["middle_dimension"] > 0
    neg = certify_pic_transitivity(p, with_gamma=False)
    assert neg.status == "FAIL"
    assert neg.data["middle_rank"] < neg.data["middle_dimension"]


def test_coarse_substitution_is_refused(pic_n2):
    p = pic_n2[1]
    x = _random_element(random.Random(5), p.A.ram, hi=12)
    with pytest.raises(DepthError):
        act_semidirect(x, p.L)


def test_gvw_identity_acts_trivially(pic_n2):
    p = pic_n2[1]
    x = SemidirectElement(GVWElement.identity(p.A.ram), WElement.one(p.A.ram))
    assert same_point(act_semidirect(x, p.L), p.L)
