"""Flooding family: FloodToSink, ProbaCvg, PrunedCvg."""
from __future__ import annotations

from dataclasses import dataclass, replace

from ..engine import BROADCAST, Packet
from ..metrics import Disposition
from .base import Agent

KINDS = ("FloodToSink", "ProbaCvg", "PrunedCvg")


@dataclass(frozen=True)
class GossipAction:
    kind: str  # "broadcast" | "unicast" | "drop"
    packet: Packet | None = None
    target: int = BROADCAST
    reason: Disposition | None = None


def gossip_forward(kind: str, packet: Packet, p_fwd: float, rng, neighbors=()) -> GossipAction:
    """Decide what one node does with a packet it has not handled before.

    ProbaCvg forwards with probability ``p_fwd`` and the copy it sends carries
    half of it; the others always forward.
    """
    if packet.ttl <= 0:
        return GossipAction("drop", reason=Disposition.TTL)
    if kind == "FloodToSink":
        return GossipAction("broadcast", packet)
    if kind == "ProbaCvg":
        if p_fwd < 1.0 and rng.random() >= p_fwd:
            return GossipAction("drop", reason=Disposition.TTL)
        return GossipAction("broadcast", replace(packet, fwd_prob=p_fwd / 2))
    if kind == "PrunedCvg":
        if not neighbors:
            return GossipAction("drop", reason=Disposition.TTL)
        return GossipAction("unicast", packet, rng.choice(sorted(neighbors)))
    raise ValueError(f"{kind} is not a gossip strategy")


class GossipAgent(Agent):
    def __init__(self, sim, node, kind):
        super().__init__(sim, node)
        self.kind = kind

    def route(self, packet, origin):
        act = gossip_forward(self.kind, packet, packet.fwd_prob, self.sim.rng,
                             self.sim.neighbors[self.node])
        if act.kind == "drop":
            self.sim.drop(self.node, packet, act.reason)
        else:
            self.sim.send_data(self.node, act.packet, act.target)
