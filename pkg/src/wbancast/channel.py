"""Posture-dependent statistical channel.

Each link attenuation is a Gaussian random variable whose mean and standard
deviation depend on the body posture and the node pair.  A frame survives
when the drawn attenuation stays within the radio budget
(tx power - receiver sensitivity).  The probability of that event is the
Gaussian CDF evaluated at the budget, and its reciprocal is the link ETX.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, UnusableLink

POSTURES = {
    1: "Walking",
    2: "Walking weakly",
    3: "Running",
    4: "Sitting down",
    5: "Lying down",
    6: "Sleeping",
    7: "Wearing a jacket",
}

DEFAULT_THRESHOLD = 0.01
CSV_HEADER = ("posture", "node_a", "node_b", "mean_db", "stddev_db")


def check_posture(posture: int) -> int:
    if posture not in POSTURES:
        raise ConfigError(f"posture {posture!r} is not one of 1..7")
    return posture


def pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class LinkStats:
    posture: int
    a: int
    b: int
    mean_db: float
    stddev_db: float

    def __post_init__(self):
        if self.a == self.b:
            raise ConfigError(f"link {self.a}-{self.b} connects a node to itself")
        if not self.stddev_db >= 0:
            raise ConfigError(f"negative stddev {self.stddev_db} on link {self.a}-{self.b}")

    @property
    def pair(self) -> tuple[int, int]:
        return pair_key(self.a, self.b)


@dataclass(frozen=True)
class RadioBudget:
    tx_power_dbm: float = -60.0
    sensitivity_dbm: float = -100.0

    @property
    def max_attenuation_db(self) -> float:
        return self.tx_power_dbm - self.sensitivity_dbm


@dataclass
class ChannelTable:
    """Per-(posture, unordered pair) attenuation statistics."""

    entries: dict[tuple[int, tuple[int, int]], LinkStats] = field(default_factory=dict)

    @classmethod
    def from_stats(cls, stats: Iterable[LinkStats]) -> "ChannelTable":
        table = cls()
        for s in stats:
            key = (s.posture, s.pair)
            if key in table.entries:
                raise ConfigError(f"duplicate statistics for posture {s.posture} pair {s.pair}")
            table.entries[key] = s
        return table

    @property
    def postures(self) -> list[int]:
        return sorted({p for p, _ in self.entries})

    @property
    def nodes(self) -> list[int]:
        found = set()
        for _, (a, b) in self.entries:
            found.update((a, b))
        return sorted(found)

    def lookup(self, posture: int, a: int, b: int) -> LinkStats:
        try:
            return self.entries[(posture, pair_key(a, b))]
        except KeyError:
            raise ConfigError(
                f"no channel statistics for posture {posture} pair {pair_key(a, b)}"
            ) from None

    def check_coverage(self, nodes: Iterable[int], postures: Iterable[int] = POSTURES) -> None:
        nodes = sorted(nodes)
        for posture in postures:
            for i, a in enumerate(nodes):
                for b in nodes[i + 1:]:
                    if (posture, (a, b)) not in self.entries:
                        raise ConfigError(
                            f"channel table is missing posture {posture} pair ({a}, {b})"
                        )


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    probability: float
    etx: float


@dataclass
class ConnectivityGraph:
    posture: int
    nodes: list[int]
    edges: dict[tuple[int, int], Edge]

    def neighbors(self, node: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return sorted(out)

    def has_edge(self, a: int, b: int) -> bool:
        return pair_key(a, b) in self.edges

    def etx(self, a: int, b: int) -> float:
        return self.edges[pair_key(a, b)].etx

    def probability(self, a: int, b: int) -> float:
        return self.edges[pair_key(a, b)].probability

    def hop_levels(self, sink: int) -> dict[int, int]:
        """BFS hop distance to ``sink``; unreachable nodes are absent."""
        levels = {sink: 0}
        frontier = [sink]
        adjacency = {n: self.neighbors(n) for n in self.nodes}
        while frontier:
            nxt = []
            for u in frontier:
                for v in adjacency[u]:
                    if v not in levels:
                        levels[v] = levels[u] + 1
                        nxt.append(v)
            frontier = nxt
        return levels


def gaussian_cdf(x: float, mean: float, stddev: float) -> float:
    """P[N(mean, stddev) < x].

    Uses the complementary error function, which keeps full double precision in
    both tails (absolute error well under 1e-15).
    """
    if stddev < 0:
        raise ValueError("stddev must be >= 0")
    if stddev == 0:
        if x > mean:
            return 1.0
        if x < mean:
            return 0.0
        return 0.5
    return 0.5 * math.erfc(-(x - mean) / (stddev * math.sqrt(2.0)))


def link_success_probability(stats: LinkStats, budget: RadioBudget = RadioBudget()) -> float:
    return gaussian_cdf(budget.max_attenuation_db, stats.mean_db, stats.stddev_db)


def expected_transmission_count(p: float) -> float:
    if p <= 0:
        raise UnusableLink(f"success probability {p} gives no finite ETX")
    etx = 1.0 / p
    if math.isinf(etx):
        # p below ~5.6e-309 (subnormal): 1/p does not fit in a double
        raise UnusableLink(f"success probability {p} gives no finite ETX")
    return etx


def sample_attenuation(stats: LinkStats, rng: random.Random) -> float:
    if stats.stddev_db == 0:
        return stats.mean_db
    return rng.gauss(stats.mean_db, stats.stddev_db)


def connectivity_graph(
    table: ChannelTable,
    posture: int,
    budget: RadioBudget = RadioBudget(),
    threshold: float = DEFAULT_THRESHOLD,
    nodes: Iterable[int] | None = None,
) -> ConnectivityGraph:
    """Links whose success probability is strictly above ``threshold``."""
    check_posture(posture)
    nodes = sorted(nodes) if nodes is not None else table.nodes
    edges = {}
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            p = link_success_probability(table.lookup(posture, a, b), budget)
            if p > threshold:
                edges[(a, b)] = Edge(a, b, p, expected_transmission_count(p))
    return ConnectivityGraph(posture, list(nodes), edges)


def _parse_rows(reader, origin: str) -> list[LinkStats]:
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise ConfigError(f"{origin}: expected header {','.join(CSV_HEADER)}")
    stats = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise ConfigError(f"{origin} row {lineno}: expected 5 fields, got {len(row)}")
        try:
            posture, a, b = (int(c) for c in row[:3])
            mean, sd = float(row[3]), float(row[4])
        except ValueError:
            raise ConfigError(f"{origin} row {lineno}: malformed value in {row!r}") from None
        if posture not in POSTURES:
            raise ConfigError(f"{origin} row {lineno}: posture {posture} outside 1..7")
        if a == b:
            raise ConfigError(f"{origin} row {lineno}: node {a} paired with itself")
        if not math.isfinite(mean) or not math.isfinite(sd) or sd < 0:
            raise ConfigError(f"{origin} row {lineno}: invalid mean/stddev {mean}/{sd}")
        stats.append(LinkStats(posture, a, b, mean, sd))
    return stats


def load_channel_table(source, nodes: Iterable[int] | None = None) -> ChannelTable:
    """Read the ``posture,node_a,node_b,mean_db,stddev_db`` CSV.

    ``source`` is a path or an open text stream.  Every posture must cover every
    unordered pair of ``nodes`` (default: all nodes mentioned in the file).
    """
    if isinstance(source, (str, Path)):
        origin = str(source)
        with open(source, newline="", encoding="utf-8") as fh:
            stats = _parse_rows(csv.reader(fh), origin)
    else:
        origin = getattr(source, "name", "<stream>")
        stats = _parse_rows(csv.reader(source), origin)
    seen = {}
    for lineno, s in enumerate(stats, start=2):
        key = (s.posture, s.pair)
        if key in seen:
            raise ConfigError(
                f"{origin}: duplicate row for posture {s.posture} pair {s.pair}"
            )
        seen[key] = s
    table = ChannelTable(seen)
    table.check_coverage(nodes if nodes is not None else table.nodes)
    return table


def dump_channel_table(table: ChannelTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for key in sorted(table.entries):
        s = table.entries[key]
        w.writerow([s.posture, s.pair[0], s.pair[1], repr(s.mean_db), repr(s.stddev_db)])
    return buf.getvalue()


def builtin_table_path(name: str = "synthetic") -> Path:
    return Path(__file__).parent / "data" / f"{name}_channel.csv"
