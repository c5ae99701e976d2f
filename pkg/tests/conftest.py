import itertools

import numpy as np
import pytest

from evtcure.survival import SurvivalSample

ACCEPTANCE_LINES: list[str] = []


def brute_force_km(times, events, t):
    """KME at ``t`` straight from the product over order statistics.

    Expects input already sorted with events first on ties.
    """
    n = len(times)
    prod = 1.0
    for i in range(1, n + 1):
        if times[i - 1] <= t:
            prod *= 1.0 - events[i - 1] / (n - i + 1)
    return 1.0 - prod


def grouped_km(times, events, t):
    """KME at ``t`` via distinct event times, deaths d_j over risk sets r_j."""
    times = np.asarray(times, float)
    events = np.asarray(events, bool)
    prod = 1.0
    for s in np.unique(times[events]):
        if s > t:
            break
        d = np.sum(events & (times == s))
        r = np.sum(times >= s)
        prod *= 1.0 - d / r
    return 1.0 - prod


@pytest.fixture
def all_patterns():
    """Every event pattern for n = 1..6 over distinct times 1..n."""

    def gen():
        for n in range(1, 7):
            for pattern in itertools.product([False, True], repeat=n):
                yield np.arange(1.0, n + 1), np.array(pattern)

    return gen


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sample_of(pairs) -> SurvivalSample:
    pairs = list(pairs)
    return SurvivalSample.from_arrays([p[0] for p in pairs], [p[1] for p in pairs])
