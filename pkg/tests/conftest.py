from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from solgame.solenoid import Point, PrimeSet

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PRIMES = st.sampled_from([2, 3, 5, 7, 11, 13, 97])
PRIME_SETS = st.sampled_from([(2,), (3,), (2, 3), (2, 5), (2, 3, 5)])


def rationals(max_num=10**4, max_den=10**3, nonzero=False):
    q = st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))
    return q.filter(lambda v: v != 0) if nonzero else q


def positive_rationals(max_num=10**4, max_den=10**4):
    return st.builds(Fraction, st.integers(1, max_num), st.integers(1, max_den))


@st.composite
def points(draw, primes):
    P = PrimeSet(primes)
    return Point(P, draw(rationals(50, 36)), tuple(draw(rationals(50, 36)) for _ in primes))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
