"""Static overlay strategies: APAP, APPP, PPAP, PPPP."""
from __future__ import annotations

from ..errors import ConfigError
from .base import Agent

# (all parents at the origin?, all parents at relays?)
FAN_OUT = {
    "APAP": (True, True),
    "APPP": (True, False),
    "PPAP": (False, True),
    "PPPP": (False, False),
}


def hop_gradient_overlay(graph, sink: int) -> dict[int, tuple[int, ...]]:
    """parents(v) = graph neighbours of v that are strictly closer to the sink in hops."""
    levels = graph.hop_levels(sink)
    overlay = {}
    for v in graph.nodes:
        if v == sink:
            continue
        if v not in levels:
            raise ConfigError(f"posture {graph.posture}: node {v} cannot reach sink {sink}")
        overlay[v] = tuple(u for u in graph.neighbors(v) if levels[u] < levels[v])
    return overlay


def validate_overlay(overlay: dict, graph, sink: int) -> dict[int, tuple[int, ...]]:
    clean = {}
    for v in graph.nodes:
        if v == sink:
            if overlay.get(v):
                raise ConfigError(f"overlay gives the sink {sink} parents")
            continue
        parents = tuple(sorted(overlay.get(v, ())))
        if not parents:
            raise ConfigError(f"overlay: node {v} has no parent")
        for p in parents:
            if not graph.has_edge(v, p):
                raise ConfigError(
                    f"overlay: {v}->{p} is not a link in posture {graph.posture}"
                )
        clean[v] = parents
    # every walk must end at the sink
    state = {sink: 2}

    def visit(v):
        if state.get(v) == 2:
            return
        if state.get(v) == 1:
            raise ConfigError(f"overlay has a cycle through node {v}")
        state[v] = 1
        for p in clean[v]:
            visit(p)
        state[v] = 2

    for v in clean:
        visit(v)
    return clean


def multipath_next_hops(kind: str, node: int, is_origin: bool,
                        overlay: dict, rng) -> list[int]:
    try:
        at_origin, at_relay = FAN_OUT[kind]
    except KeyError:
        raise ValueError(f"{kind} is not a multi-path strategy") from None
    parents = overlay.get(node)
    if not parents:
        raise ConfigError(f"node {node} has no overlay parent")
    fan_all = at_origin if is_origin else at_relay
    if fan_all:
        return list(parents)
    return [rng.choice(parents)]


class MultipathAgent(Agent):
    def __init__(self, sim, node, overlay, kind):
        super().__init__(sim, node)
        self.overlay = overlay
        self.kind = kind

    def route(self, packet, origin):
        for parent in multipath_next_hops(self.kind, self.node, origin, self.overlay, self.sim.rng):
            self.sim.send_data(self.node, packet, parent)
