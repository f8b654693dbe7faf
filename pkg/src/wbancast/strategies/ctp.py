"""Beacon-driven collection tree (CTP-like).

Every node broadcasts a beacon each period with its path cost.  Link ETX
toward each neighbour is an EWMA of the reciprocal beacon reception ratio
(beacons carry a sequence number, so gaps reveal losses).  The parent is the
neighbour minimising advertised cost + link ETX; neighbours that currently
route through us are skipped.  Data waits in a buffer until a parent exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..engine import BROADCAST, FrameKind
from .base import Agent


@dataclass
class CtpState:
    node: int
    is_sink: bool = False
    cost: float = math.inf
    parent: int | None = None
    beacon_period: float = 1.0
    alpha: float = 0.1
    link_etx: dict = field(default_factory=dict)
    neighbor_cost: dict = field(default_factory=dict)
    neighbor_parent: dict = field(default_factory=dict)
    last_beacon_seq: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.is_sink:
            self.cost = 0.0


def ctp_on_beacon(state: CtpState, sender: int, sender_cost: float,
                  beacon_seq: int | None = None, sender_parent: int | None = None) -> CtpState:
    """Fold one received beacon into ``state``.

    With ``beacon_seq`` the link estimate takes an EWMA step toward
    1 + (beacons missed since the previous one heard); without it the current
    estimate is kept (1.0 for a new neighbour).
    """
    if beacon_seq is not None:
        last = state.last_beacon_seq.get(sender)
        sample = 1.0 if last is None else float(max(1, beacon_seq - last))
        state.last_beacon_seq[sender] = beacon_seq
        if sender in state.link_etx:
            state.link_etx[sender] = (1 - state.alpha) * state.link_etx[sender] + state.alpha * sample
        else:
            state.link_etx[sender] = sample
    else:
        state.link_etx.setdefault(sender, 1.0)
    state.neighbor_cost[sender] = sender_cost
    state.neighbor_parent[sender] = sender_parent
    if state.is_sink:
        return state
    best = (math.inf, None)
    for n in sorted(state.neighbor_cost):
        c = state.neighbor_cost[n]
        if math.isinf(c) or state.neighbor_parent.get(n) == state.node:
            continue
        cand = (c + state.link_etx[n], n)
        if cand < best:
            best = cand
    state.cost, state.parent = best
    return state


class CtpAgent(Agent):
    def __init__(self, sim, node):
        super().__init__(sim, node)
        sc = sim.scenario
        self.state = CtpState(node, self.is_sink, beacon_period=sc.beacon_period,
                              alpha=sc.ctp_alpha)
        self.beacons_sent = 0

    def start(self):
        self.sim.set_timer(self.node, self.sim.rng.uniform(0, self.state.beacon_period), "beacon")

    def on_timer(self, key):
        if key != "beacon":
            return
        self.beacons_sent += 1
        st = self.state
        self.sim.send_control(self.node, FrameKind.BEACON, BROADCAST,
                              (self.beacons_sent, st.cost, st.parent))
        self.sim.set_timer(self.node, st.beacon_period, "beacon")

    def on_control(self, frame):
        if frame.kind is not FrameKind.BEACON:
            return
        seq, cost, parent = frame.payload
        had_parent = self.state.parent is not None
        ctp_on_beacon(self.state, frame.tx, cost, seq, parent)
        if not had_parent and self.state.parent is not None:
            for packet in self.sim.release(self.node):
                self.route(packet, origin=False)

    def route(self, packet, origin):
        parent = self.state.parent
        if parent is None:
            self.sim.hold(self.node, packet)
        else:
            self.sim.send_data(self.node, packet, parent)
