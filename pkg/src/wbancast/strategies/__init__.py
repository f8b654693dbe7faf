"""Convergecast strategies as per-node agents."""
from __future__ import annotations

from ..errors import ConfigError
from ..ppvg import build_ppvg_tree
from .attenuation import (
    AttenuationAgent,
    AttnNegotiationState,
    Reply,
    attenuation_select,
    request_reply_attenuation_estimate,
)
from .ctp import CtpAgent, CtpState, ctp_on_beacon
from .gossip import GossipAction, GossipAgent, gossip_forward
from .multipath import (
    MultipathAgent,
    hop_gradient_overlay,
    multipath_next_hops,
    validate_overlay,
)
from .orw import OrwAgent, OrwState, orw_accept, orw_forward
from .tree import PpvgAgent

MULTIPATH = ("APAP", "APPP", "PPAP", "PPPP")
ATTENUATION = ("MinAtt", "BothMinAtt", "CloseToMe", "RandAtt")
GOSSIP = ("FloodToSink", "ProbaCvg", "PrunedCvg")


def build_overlay(graph, sink, override=None):
    overlay = override if override is not None else hop_gradient_overlay(graph, sink)
    return validate_overlay(overlay, graph, sink)


def make_agents(sim) -> dict:
    kind = sim.scenario.strategy
    nodes = sorted(sim.nodes)
    if kind in MULTIPATH:
        overlay = build_overlay(sim.graph, sim.sink, sim.scenario.overlay)
        return {n: MultipathAgent(sim, n, overlay, kind) for n in nodes}
    if kind in ATTENUATION:
        levels = sim.graph.hop_levels(sim.sink)
        return {n: AttenuationAgent(sim, n, kind, levels) for n in nodes}
    if kind in GOSSIP:
        return {n: GossipAgent(sim, n, kind) for n in nodes}
    if kind == "CTP":
        return {n: CtpAgent(sim, n) for n in nodes}
    if kind == "ORW":
        return {n: OrwAgent(sim, n) for n in nodes}
    if kind == "PPVG":
        tree = build_ppvg_tree(sim.graph, sim.sink)
        return {n: PpvgAgent(sim, n, tree) for n in nodes}
    raise ConfigError(f"unknown strategy {kind!r}")


__all__ = [
    "AttnNegotiationState", "CtpState", "GossipAction", "OrwState", "Reply",
    "attenuation_select", "build_overlay", "ctp_on_beacon", "gossip_forward",
    "hop_gradient_overlay", "make_agents", "multipath_next_hops", "orw_accept",
    "orw_forward", "request_reply_attenuation_estimate",
]
