import numpy as np
import pytest
from hypothesis import strategies as st

from restime.lane import Lane

ACCEPTANCE_LINES = []


@st.composite
def lanes(draw, min_L=2, max_L=40, lo=0.05, hi=0.95):
    L = draw(st.integers(min_L, max_L))
    p = draw(st.lists(st.floats(lo, hi), min_size=L - 1, max_size=L - 1))
    return Lane(L, np.array(p))


def random_lanes(n, seed, max_L=200, lo=0.05, hi=0.95):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        L = int(rng.integers(2, max_L + 1))
        out.append(Lane(L, rng.uniform(lo, hi, L - 1)))
    return out


@pytest.fixture
def acceptance_report():
    def report(number, ok, detail):
        line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
