"""Shared fixtures and hypothesis strategies."""

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from satohurwitz.krichever import HyperellipticCover, LaurentMonomialCover, build_point
from satohurwitz.series import FractionalSeries, Q

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

rationals = st.builds(Q, st.integers(-20, 20), st.integers(1, 6))
nonzero_rationals = rationals.filter(lambda q: q != 0)


@st.composite
def series(draw, e=None, lo=-4, hi_span=8, exact=True):
    """A finite Laurent series in ``u = z^(1/e)``."""
    e = e or draw(st.integers(1, 4))
    terms = draw(st.dictionaries(st.integers(lo, lo + hi_span), rationals, max_size=6))
    return FractionalSeries.make(e, terms)


@st.composite
def units(draw, e=1, span=5):
    """Exact series with nonzero constant term and no negative powers."""
    c0 = draw(nonzero_rationals)
    terms = draw(st.dictionaries(st.integers(1, span), rationals, max_size=4))
    terms[0] = c0
    return FractionalSeries.make(e, terms)


@pytest.fixture(scope="session")
def laurent2():
    return build_point(LaurentMonomialCover(2), 20)


@pytest.fixture(scope="session")
def laurent3():
    return build_point(LaurentMonomialCover(3), 20)


@pytest.fixture(scope="session")
def elliptic():
    return build_point(HyperellipticCover(), 20)
