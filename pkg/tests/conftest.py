import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from eqformal.exactpoly import Polynomial


def random_poly(rng, nvars, max_deg=3, nterms=4, weights=None, homogeneous_degree=None):
    terms = {}
    for _ in range(nterms):
        if homogeneous_degree is None:
            e = tuple(rng.randint(0, max_deg) for _ in range(nvars))
        else:
            e = [0] * nvars
            for _ in range(homogeneous_degree):
                e[rng.randrange(nvars)] += 1
            e = tuple(e)
        terms[e] = terms.get(e, 0) + Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return Polynomial(terms, nvars, weights)


@st.composite
def polynomials(draw, nvars=2, max_exp=3, max_terms=4):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, max_exp)) for _ in range(nvars))
        c = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        terms[e] = terms.get(e, 0) + c
    return Polynomial(terms, nvars)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in summary_lines():
            terminalreporter.write_line(line)
