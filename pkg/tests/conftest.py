from __future__ import annotations

from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lamejump.clifford import Multivector
from lamejump.polyfield import LameParams, PolyField, StructuralSet

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def multivectors(draw, m: int) -> Multivector:
    masks = draw(st.lists(st.integers(0, (1 << m) - 1), max_size=1 << m, unique=True))
    return Multivector(m, {k: draw(small_fractions) for k in masks}, exact=True)


@st.composite
def frames(draw, m: int) -> StructuralSet:
    return StructuralSet.random(m, draw(st.integers(0, 10_000)))


@st.composite
def polyfields(draw, m: int, max_degree: int = 3) -> PolyField:
    n = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n):
        powers = tuple(draw(st.integers(0, max_degree)) for _ in range(m))
        if sum(powers) > max_degree:
            continue
        mask = draw(st.integers(0, (1 << m) - 1))
        terms[(powers, mask)] = terms.get((powers, mask), 0) + draw(small_fractions)
    return PolyField(m, terms)


@st.composite
def lame_params(draw) -> LameParams:
    mu = draw(st.fractions(min_value=Fraction(1, 10), max_value=5, max_denominator=10))
    ratio = draw(st.fractions(min_value=Fraction(-3, 5), max_value=5, max_denominator=10))
    return LameParams(mu, ratio * mu)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
