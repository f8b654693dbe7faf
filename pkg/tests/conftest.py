import math
from statistics import NormalDist

import pytest

from wbancast.channel import POSTURES, ChannelTable, LinkStats, builtin_table_path, load_channel_table

NODES = tuple(range(7))

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def mean_for(p: float, sd: float = 5.0, budget: float = 40.0) -> float:
    """Mean attenuation giving success probability ``p`` at the default budget."""
    if p <= 0:
        return budget + 50.0
    if p >= 1:
        return budget - 50.0
    return budget - sd * NormalDist().inv_cdf(p)


def table_from_probs(probs: dict, nodes=NODES, sd: float = 5.0, postures=POSTURES,
                     default: float = 0.0) -> ChannelTable:
    """Table where pair (a, b) succeeds with ``probs[(a, b)]`` in every posture."""
    stats = []
    for posture in postures:
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                p = probs.get((a, b), probs.get((b, a), default))
                stats.append(LinkStats(posture, a, b, mean_for(p, sd), sd))
    return ChannelTable.from_stats(stats)


def uniform_table(mean: float, sd: float, nodes=NODES, postures=POSTURES) -> ChannelTable:
    return ChannelTable.from_stats(
        LinkStats(p, a, b, mean, sd)
        for p in postures for i, a in enumerate(nodes) for b in nodes[i + 1:]
    )


@pytest.fixture(scope="session")
def synthetic():
    return load_channel_table(builtin_table_path("synthetic"))


@pytest.fixture(scope="session")
def lossy():
    return load_channel_table(builtin_table_path("lossy"))


@pytest.fixture(scope="session")
def two_path():
    return load_channel_table(builtin_table_path("two_path"))


@pytest.fixture
def lossless():
    # every link at 20 dB with no spread: p = 1 everywhere
    return uniform_table(20.0, 0.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def close(a, b, tol):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
