"""Opportunistic routing (ORW-like).

During an initial probing phase nodes exchange Probe frames and settle on a
hop-count cost (sink = 0).  Afterwards each node anycasts Data to its
forwarder set: every neighbour with a strictly lower cost.  Any member that
decodes the frame acknowledges it and, unless it already forwarded that
packet, forwards it in turn.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..engine import BROADCAST, FrameKind
from .base import Agent

PROBE_ROUNDS = 4
REPROBE_DELAY = 0.1


@dataclass
class OrwState:
    node: int
    cost: float = math.inf
    forwarder_set: frozenset = frozenset()
    probing_done: bool = False
    neighbor_cost: dict = field(default_factory=dict)
    duplicate_cache: set = field(default_factory=set)

    def refresh(self) -> None:
        self.forwarder_set = frozenset(
            n for n, c in self.neighbor_cost.items() if c < self.cost
        )


def orw_forward(state: OrwState, packet=None) -> frozenset | None:
    """Receiver set for the next anycast, or None when the packet must wait."""
    if not state.probing_done or not state.forwarder_set:
        return None
    return state.forwarder_set


def orw_accept(state: OrwState, packet, anycast) -> str:
    """Receiver side: 'forward', 'duplicate' or 'not-member'."""
    if anycast is None or state.node not in anycast:
        return "not-member"
    if packet.key in state.duplicate_cache:
        return "duplicate"
    state.duplicate_cache.add(packet.key)
    return "forward"


class OrwAgent(Agent):
    def __init__(self, sim, node):
        super().__init__(sim, node)
        self.state = OrwState(node, 0.0 if self.is_sink else math.inf)
        self.reprobe_armed = False

    def start(self):
        span = self.sim.scenario.orw_probe_time / PROBE_ROUNDS
        for k in range(PROBE_ROUNDS):
            self.sim.set_timer(self.node, k * span + self.sim.rng.uniform(0, span), "probe")
        self.sim.set_timer(self.node, self.sim.scenario.orw_probe_time, "probing-done")

    def _probe(self, kind="probe"):
        if kind == "reprobe" or not math.isinf(self.state.cost):
            self.sim.send_control(self.node, FrameKind.PROBE, BROADCAST, (kind, self.state.cost))

    def on_timer(self, key):
        st = self.state
        if key == "probe":
            self._probe()
        elif key == "probing-done":
            st.probing_done = True
            st.refresh()
            self._flush()
        elif key == "reprobe":
            self.reprobe_armed = False
            self._flush()

    def on_control(self, frame):
        if frame.kind is not FrameKind.PROBE:
            return
        kind, cost = frame.payload
        st = self.state
        if not math.isinf(cost):
            st.neighbor_cost[frame.tx] = cost
            if not self.is_sink:
                st.cost = min(st.cost, cost + 1)
        if kind == "reprobe" and not math.isinf(st.cost):
            self._probe()
        if st.probing_done:
            st.refresh()
            self._flush()

    def _flush(self):
        if not self.sim.nodes[self.node].held:
            return
        if orw_forward(self.state) is None:
            if self.state.probing_done and not self.reprobe_armed:
                self.reprobe_armed = True
                self._probe("reprobe")
                self.sim.set_timer(self.node, REPROBE_DELAY, "reprobe")
            return
        for packet in self.sim.release(self.node):
            self.route(packet, origin=False)

    def on_generate(self, packet):
        self.state.duplicate_cache.add(packet.key)
        self.route(packet, origin=True)

    def on_data(self, frame):
        verdict = orw_accept(self.state, frame.payload, frame.anycast)
        if verdict == "not-member":
            return
        if frame.ack:
            self.sim.send_control(self.node, FrameKind.ACK, frame.tx, frame.uid)
        if verdict == "forward":
            self.route(frame.payload, origin=False)

    def route(self, packet, origin):
        fs = orw_forward(self.state, packet)
        if fs is None:
            if self.sim.hold(self.node, packet):
                self._flush()
            return
        self.sim.send_data(self.node, packet, BROADCAST, anycast=fs)
