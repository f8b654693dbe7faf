"""On-body node layout and sink choice."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

BODY_LABELS = {
    0: "navel",
    1: "chest",
    2: "head",
    3: "upper arm",
    4: "ankle",
    5: "thigh",
    6: "wrist",
}


@dataclass(frozen=True)
class BodyTopology:
    nodes: tuple[tuple[int, str], ...]
    sink: int
    sources: frozenset[int]

    @property
    def node_ids(self) -> list[int]:
        return [n for n, _ in self.nodes]

    def label(self, node: int) -> str:
        return dict(self.nodes)[node]


def load_topology(config: dict | None = None) -> BodyTopology:
    """Validate a topology block.

    Recognised keys: ``nodes`` (mapping id -> label, or list of ids),
    ``size`` (declared node count; ids must lie in 0..size-1),
    ``sink`` (default 0) and ``sources`` (default: every non-sink node).
    """
    config = dict(config or {})
    raw = config.get("nodes", BODY_LABELS)
    if isinstance(raw, dict):
        items = list(raw.items())
    else:
        items = [(n, BODY_LABELS.get(n, f"node{n}")) for n in raw]
    ids = [int(n) for n, _ in items]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate node ids in topology: {ids}")
    labels = [str(label) for _, label in items]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate node labels in topology: {labels}")
    size = int(config.get("size", len(ids)))
    for n in ids:
        if not 0 <= n < size:
            raise ConfigError(f"node {n} outside declared range 0..{size - 1}")
    sink = int(config.get("sink", 0))
    if sink not in ids:
        raise ConfigError(f"sink {sink} is not among the topology nodes {sorted(ids)}")
    if config.get("sources") is None:
        sources = frozenset(ids) - {sink}
    else:
        sources = frozenset(int(s) for s in config["sources"])
        unknown = sources - set(ids)
        if unknown:
            raise ConfigError(f"sources {sorted(unknown)} are not topology nodes")
        if sink in sources:
            raise ConfigError("the sink cannot also be a source")
    nodes = tuple(sorted(zip(ids, labels)))
    return BodyTopology(nodes, sink, sources)
