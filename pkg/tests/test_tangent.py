import sympy
from hypothesis import given
from hypothesis import strategies as st

from satohurwitz.grassmannian import is_algebra_point, is_hurwitz_point
from satohurwitz.groups import monomial_field
from satohurwitz.series import Q
from satohurwitz.tangent import (
    TangentVector,
    Window,
    certify_local_transitivity,
    certify_restriction_injectivity,
    default_windows,
    deformed_point,
    derivation_constraints,
    field_image,
    projected_dimension,
    trace_constraints,
    virasoro_tangent_map,
)

from conftest import rationals

COLS = list(range(8))


@st.composite
def systems(draw):
    eqs = draw(st.lists(st.dictionaries(st.sampled_from(COLS), rationals, max_size=4), max_size=6))
    eqs = [{k: v for k, v in e.items() if v} for e in eqs]
    observed = draw(st.lists(st.sampled_from(COLS), unique=True, max_size=5))
    return eqs, observed


def oracle(eqs, observed):
    """Rank of the projection of a sympy nullspace basis."""
    rows = [[sympy.Rational(int(e.get(c, 0).numerator), int(e.get(c, 0).denominator)) if c in e else 0
             for c in COLS] for e in eqs]
    basis = sympy.Matrix(rows).nullspace() if rows else [sympy.eye(len(COLS))[:, i] for i in COLS]
    if not basis or not observed:
        return 0
    proj = sympy.Matrix([[vec[c] for c in observed] for vec in basis])
    return proj.rank()


@given(systems())
def test_projected_dimension_matches_oracle(sys_):
    eqs, observed = sys_
    want = oracle(eqs, observed)
    assert projected_dimension(COLS, eqs, observed) == want
    # the modular variant is an upper bound, equal here
    assert projected_dimension(COLS, eqs, observed, bound=True) == want


@given(systems())
def test_functionals_match_coordinates(sys_):
    eqs, observed = sys_
    as_dicts = [{c: Q(1)} for c in observed]
    assert projected_dimension(COLS, eqs, as_dicts) == projected_dimension(COLS, eqs, observed)


def test_windows(laurent3):
    system, observe = default_windows(laurent3)
    L = laurent3.ordering.L
    assert (system.depth, system.height, observe.depth, observe.height) == (2 * L, 10 * L, L, 6 * L)


def test_field_images_solve_the_constraints(laurent2):
    window = default_windows(laurent2)[0]
    full = trace_constraints(laurent2, window)
    for k in (-3, 0, 2):
        col = field_image(laurent2, monomial_field(laurent2.ram, 1, k), window)
        assert full.satisfied_by(col)
    noise = {full.columns[0]: Q(1)}
    assert not full.satisfied_by(noise) and full.violations(noise) > 0


def test_solution_basis(laurent2):
    system = derivation_constraints(laurent2)
    basis = system.solution_basis()
    assert basis and all(system.satisfied_by(v) for v in basis)


def test_trace_constraints_cut_down(laurent2):
    der = derivation_constraints(laurent2)
    full = trace_constraints(laurent2, base=derivation_constraints(laurent2))
    assert len(full.solution_basis()) < len(der.solution_basis())


def test_local_transitivity(laurent2):
    rep = certify_local_transitivity(laurent2, 12)
    assert rep.status == "PASS", rep.render()
    assert rep.data["rank"] == rep.data["dimension"] > 0


def test_local_transitivity_negative_controls(laurent2):
    # too few fields, or the larger space without the trace condition
    assert certify_local_transitivity(laurent2, 1).status == "FAIL"
    assert certify_local_transitivity(laurent2, 12, with_trace=False).status == "FAIL"


def test_restriction_injectivity(laurent3):
    rep = certify_restriction_injectivity(laurent3, 12)
    assert rep.status == "PASS", rep.render()
    assert rep.data["kernel"] == 0


def test_tangent_map_drops_deep_fields(laurent2):
    tmap = virasoro_tangent_map(laurent2, 40, Window(4, 20))
    assert tmap.dropped and len(tmap.labels) + len(tmap.dropped) == 2 * 81


def test_deformations_by_field_images(laurent2):
    window = default_windows(laurent2)[0]
    col = field_image(laurent2, monomial_field(laurent2.ram, 2, 1), window)
    tv = TangentVector.from_solution(laurent2, col, window)
    assert tv.is_reduced()
    P = deformed_point(laurent2, tv)
    assert is_algebra_point(P).status == "PASS"
    assert is_hurwitz_point(P).status == "PASS"
