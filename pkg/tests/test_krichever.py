import pytest

from satohurwitz.grassmannian import index, is_algebra_point, is_hurwitz_point, same_point
from satohurwitz.krichever import (
    GeneralSpec,
    HyperellipticCover,
    HyperFunction,
    LaurentMonomialCover,
    build_point,
    catalog,
    expand_function,
    format_cover,
    hurwitz_genus,
    parse_cover,
    perturbed_laurent,
    verify_krichever,
)
from satohurwitz.series import Q
from satohurwitz.walgebra import RamificationData, WElement


@pytest.mark.parametrize("n,g,r,rbar,want", [
    (2, 0, 2, 2, 0),   # Laurent covers are rational
    (3, 0, 2, 2, 0),
    (2, 0, 4, 4, 1),   # double cover branched at four points
    (2, 0, 6, 6, 2),
    (3, 1, 1, 1, 2),
    (1, 5, 3, 3, 5),   # the identity cover keeps the genus
])
def test_hurwitz_genus(n, g, r, rbar, want):
    assert hurwitz_genus(n, g, r, rbar) == want


def test_hurwitz_genus_parity():
    with pytest.raises(ValueError):
        hurwitz_genus(2, 0, 3, 3)


def test_curve_equation_on_every_branch():
    spec = HyperellipticCover()
    H = 16
    y = expand_function(spec, HyperFunction.monomial(ey=1), H)
    inv = expand_function(spec, HyperFunction.monomial(poles=[(a, 1) for a in spec.a]), H)
    # y^2 / prod(z - a_k) = c
    prod = (y * y * inv).truncate_levels(H - 4)
    assert (prod - WElement.one(spec.ram).scale(spec.c)).truncate_levels(H - 4).is_zero()


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.label)
def test_catalog_points(spec):
    U = build_point(spec, 16)
    assert index(U) == 1 - spec.genus
    assert verify_krichever(spec, 16).status == "PASS"


def test_point_is_stable_in_depth():
    spec = LaurentMonomialCover(3)
    assert same_point(build_point(spec, 12), build_point(spec, 24))


def test_perturbed_point_is_algebra_but_not_hurwitz():
    B = build_point(perturbed_laurent(S=20), 20)
    assert is_algebra_point(B).status == "PASS"
    assert is_hurwitz_point(B).status == "FAIL"


def test_general_spec_rejects_wrong_genus():
    ram = RamificationData.of([[1]])
    gen = WElement.monomial(ram, (1, 1), -1)
    spec = GeneralSpec(ram, (gen,), declared=(3, 0))
    assert verify_krichever(spec, 8).status == "FAIL"


@pytest.mark.parametrize("spec", catalog() + [perturbed_laurent(S=4)], ids=lambda s: s.label)
def test_cover_text_round_trip(spec):
    back = parse_cover(format_cover(spec))
    assert format_cover(back) == format_cover(spec)


def test_cover_errors():
    with pytest.raises(ValueError):
        parse_cover("cover = torus\n")
    with pytest.raises(ValueError):
        HyperellipticCover(a=(0, 1, 1, 2))
    assert HyperellipticCover().on_curve(Q(3, 2), Q(3, 4))
