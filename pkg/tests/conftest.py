import numpy as np
import pytest
from hypothesis import strategies as st

from fclear.model import build_system

CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = report.user_properties and dict(report.user_properties).get("criterion")
    if crit:
        num, title = crit
        CRITERIA[num] = (title, "PASS" if report.passed else "FAIL")


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        title, verdict = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {verdict}: {title}")


def three_bank_system():
    # u owes w and v 2 each, w sold v a CDS on u
    return build_system(
        [2.0, 0.0, 1.0],
        {(0, 1): 2.0, (0, 2): 2.0},
        {(1, 2, 0): 2.0},
        labels=["u", "w", "v"],
    )


def lossy_pair_system():
    # s pays each of x, y 3/2 when the other defaults; both owe the sink t 1
    return build_system(
        [3.0, 0.0, 0.0, 0.0],
        {(1, 3): 1.0, (2, 3): 1.0},
        {(0, 1, 2): 1.5, (0, 2, 1): 1.5},
        alpha=1.0,
        beta=0.5,
        labels=["s", "x", "y", "t"],
    )


@pytest.fixture
def three_bank():
    return three_bank_system()


@pytest.fixture
def lossy_pair():
    return lossy_pair_system()


def random_lossless(rng: np.random.Generator, n_max: int = 10):
    n = int(rng.integers(2, n_max + 1))
    e = rng.uniform(0, 3, n) * (rng.random(n) < 0.7)
    debts, cdss = {}, {}
    for _ in range(int(rng.integers(1, 2 * n))):
        u, v = rng.choice(n, 2, replace=False)
        debts[(int(u), int(v))] = float(rng.uniform(0.5, 3))
    if n >= 3:
        for _ in range(int(rng.integers(0, n))):
            u, v, w = rng.choice(n, 3, replace=False)
            cdss[(int(u), int(v), int(w))] = float(rng.uniform(0.5, 3))
    return build_system(e, debts, cdss)


@st.composite
def systems(draw, n_max: int = 6, lossy: bool = False):
    n = draw(st.integers(2, n_max))
    weight = st.floats(0.25, 4.0, allow_nan=False)
    e = draw(st.lists(st.floats(0.0, 4.0, allow_nan=False), min_size=n, max_size=n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    debt_keys = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=2 * n, unique=True))
    debts = {k: draw(weight) for k in debt_keys}
    cdss = {}
    if n >= 3:
        triples = [(u, v, w) for u in range(n) for v in range(n) for w in range(n) if len({u, v, w}) == 3]
        keys = draw(st.lists(st.sampled_from(triples), max_size=n, unique=True))
        cdss = {k: draw(weight) for k in keys}
    alpha = beta = 1.0
    if lossy:
        alpha = draw(st.floats(0.1, 1.0))
        beta = draw(st.floats(0.1, 1.0))
    return build_system(e, debts, cdss, alpha=alpha, beta=beta)
