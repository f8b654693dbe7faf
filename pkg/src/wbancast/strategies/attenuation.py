"""Request/Reply attenuation negotiation: MinAtt, BothMinAtt, CloseToMe, RandAtt.

A node with buffered packets broadcasts a Request carrying its hop level.
Neighbours strictly closer to the sink answer, after a random delay, with
their estimated attenuation to the sink and their attenuation to the
requester.  When the
request timer fires, the buffered packets go to the selected responder(s);
without replies the Request is reissued.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..engine import BROADCAST, FrameKind
from .base import Agent

KINDS = ("MinAtt", "BothMinAtt", "CloseToMe", "RandAtt")


@dataclass(frozen=True)
class Reply:
    responder: int
    to_sink_db: float
    to_source_db: float = 0.0


@dataclass
class AttnNegotiationState:
    request_timeout: float
    pending_request_id: int | None = None
    replies: list = field(default_factory=list)
    issued: int = 0


def attenuation_select(kind: str, replies, rng) -> list[int]:
    """Pick next hop(s); ties resolve to the lowest node id.  Empty -> no choice."""
    if not replies:
        return []
    by_sink = sorted(replies, key=lambda r: (r.to_sink_db, r.responder))
    if kind == "MinAtt":
        chosen = [by_sink[0]]
    elif kind == "BothMinAtt":
        chosen = by_sink[:2]
    elif kind == "CloseToMe":
        chosen = [min(by_sink[:2], key=lambda r: (r.to_source_db, r.responder))]
    elif kind == "RandAtt":
        chosen = [rng.choice(sorted(replies, key=lambda r: r.responder))]
    else:
        raise ValueError(f"{kind} is not an attenuation strategy")
    return sorted(r.responder for r in chosen)


def request_reply_attenuation_estimate(responder: int, table, posture: int, graph,
                                       sink: int) -> float:
    """Mean attenuation of the responder's best sink-ward link (0 dB for the sink).

    Sink-ward neighbours are those strictly closer to the sink in hops.
    """
    if responder == sink:
        return 0.0
    levels = graph.hop_levels(sink)
    if responder not in levels:
        return math.inf
    means = [
        table.lookup(posture, responder, u).mean_db
        for u in graph.neighbors(responder)
        if levels[u] < levels[responder]
    ]
    return min(means)


class AttenuationAgent(Agent):
    def __init__(self, sim, node, kind, levels):
        super().__init__(sim, node)
        self.kind = kind
        self.level = levels.get(node, math.inf)
        self.state = AttnNegotiationState(sim.scenario.request_timeout)
        sc = sim.scenario
        self.to_sink = request_reply_attenuation_estimate(node, sc.table, sc.posture,
                                                          sim.graph, sim.sink)

    def route(self, packet, origin):
        if self.sim.hold(self.node, packet):
            self._maybe_request()

    def _maybe_request(self):
        st = self.state
        if st.pending_request_id is not None or not self.sim.nodes[self.node].held:
            return
        st.issued += 1
        st.pending_request_id = st.issued
        st.replies = []
        self.sim.send_control(self.node, FrameKind.REQUEST, BROADCAST,
                              (st.issued, self.level))
        self.sim.set_timer(self.node, st.request_timeout, ("request", st.issued))

    def on_control(self, frame):
        if frame.kind is FrameKind.REQUEST:
            req_id, level = frame.payload
            if self.level < level:
                # spread replies over the first half of the requester's window
                delay = self.sim.rng.uniform(0, self.state.request_timeout / 2)
                self.sim.set_timer(self.node, delay, ("reply", frame.tx, req_id))
        elif frame.kind is FrameKind.REPLY:
            req_id, reply = frame.payload
            if req_id == self.state.pending_request_id:
                self.state.replies.append(reply)

    def on_timer(self, key):
        if key[0] == "reply":
            _, requester, req_id = key
            sc = self.sim.scenario
            to_source = sc.table.lookup(sc.posture, self.node, requester).mean_db
            self.sim.send_control(self.node, FrameKind.REPLY, requester,
                                  (req_id, Reply(self.node, self.to_sink, to_source)))
            return
        st = self.state
        if key != ("request", st.pending_request_id):
            return
        st.pending_request_id = None
        targets = attenuation_select(self.kind, st.replies, self.sim.rng)
        st.replies = []
        if targets:
            for packet in self.sim.release(self.node):
                for t in targets:
                    self.sim.send_data(self.node, packet, t)
        self._maybe_request()
