import pytest

from satohurwitz.grassmannian import act_gamma_point, vacuum_point
from satohurwitz.hierarchy import bilinear_residue, brute_force_ekp, brute_force_pairing, ekp_scan
from satohurwitz.krichever import HyperellipticCover, LaurentMonomialCover, build_point, perturbed_laurent
from satohurwitz.series import FractionalSeries
from satohurwitz.walgebra import RamificationData, WElement


def split(mono):
    alpha = tuple((v, k) for v, k in mono if v[0] == "t")
    beta = tuple((("t",) + v[1:], k) for v, k in mono if v[0] == "s")
    return alpha, beta


@pytest.fixture(scope="module")
def points():
    return [build_point(spec, 16) for spec in (LaurentMonomialCover(2), LaurentMonomialCover(3), HyperellipticCover())]


def test_bilinear_identity_on_catalog(points):
    for U in points:
        rep = bilinear_residue(U, U, 2)
        assert rep.zero, rep.render()
        assert len(rep.rows) == len(U.ram.keys) ** 2


def test_bilinear_identity_separates_points():
    ram = RamificationData.of([[1]])
    U = vacuum_point(ram, 16)
    U2 = act_gamma_point(WElement(ram, (FractionalSeries.make(1, {0: 1, 1: 2}),)), U)
    rep = bilinear_residue(U2, U, 2)
    row = next(r for r in rep.rows if not r.zero)
    mono, coeff = row.witness()
    alpha, beta = split(mono)
    assert brute_force_pairing(U2, U, row.ab, row.cd, alpha, beta, rep.internal_degree) == coeff


def test_bilinear_rejects_mismatched_spaces(points):
    with pytest.raises(ValueError):
        bilinear_residue(points[0], points[2], 2)


def test_ekp_on_catalog(points):
    for U in points:
        assert ekp_scan(U, 2).zero
        # the root-of-unity sum and the exponent filter give the same traces
        assert ekp_scan(U, 2, method="roots").zero
        assert ekp_scan(U, 2, same_times=True).zero


def test_ekp_needs_a_variable_per_branch(points):
    # one shared z across the four branches of the elliptic cover breaks the identity
    assert ekp_scan(points[2], 2, merge_branches=True).status == "FAIL"


def test_literal_second_factor_is_not_zero(points):
    # psi_cd in place of its adjoint: nonzero even on Hurwitz points
    assert ekp_scan(points[0], 2, variant="literal").status == "FAIL"


def test_ekp_witness_on_perturbed_point():
    B = build_point(perturbed_laurent(S=30), 30)
    rep = ekp_scan(B, 2)
    row = next(r for r in rep.rows if not r.zero)
    mono, coeff = row.witness()
    alpha, beta = split(mono)
    assert brute_force_ekp(B, row.ab, row.cd, alpha, beta, rep.internal_degree) == coeff


def test_report_table(points):
    rep = ekp_scan(points[0], 1)
    lines = rep.render().splitlines()
    assert lines[0].startswith("ekp_residue: PASS")
    assert lines[1].split("\t")[0] == "a,b,c,d"
    assert len(lines) == 2 + 4
