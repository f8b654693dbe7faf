"""Deterministic discrete-event core.

MAC model: one shared channel, no carrier sensing and no backoff.  A node
with queued frames transmits them back-to-back.  At the start of every
transmission an attenuation is drawn independently for each neighbour; the
frame *arrives* at a neighbour when that attenuation is within the radio
budget.  At the end of the transmission a neighbour decodes the frame unless

* the neighbour itself transmitted during the frame (half-duplex), or
* another overlapping transmission also arrived at it (collision; every
  frame involved is lost at that receiver).

Receptions and interference are only evaluated between nodes joined by an
edge of the posture's connectivity graph.
"""
from __future__ import annotations

import enum
import heapq
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .channel import connectivity_graph
from .metrics import (
    Disposition,
    LedgerEntry,
    MetricsReport,
    PacketLedger,
    finalize,
    record_delivery,
)
from .reliability import apply_policy
from .scenario import ScenarioConfig

BROADCAST = -1

# event kinds, ordered only by (time, seq_no)
GENERATE, TX_END, TIMER, SIM_END = range(4)
_EMPTY: frozenset = frozenset()
_push = heapq.heappush


class FrameKind(str, enum.Enum):
    DATA = "data"
    REQUEST = "request"
    REPLY = "reply"
    BEACON = "beacon"
    PROBE = "probe"
    ACK = "ack"


_DATA = FrameKind.DATA


class Reception(enum.Enum):
    DELIVERED = "delivered"
    ATTENUATION_LOSS = "attenuation"
    COLLISION = "collision"
    HALF_DUPLEX_MISS = "half-duplex"


@dataclass(slots=True)
class Packet:
    source: int
    seq: int
    created_at: float
    ttl: int
    hops: int = 0
    # gossip forwarding probability carried with the packet
    fwd_prob: float = 1.0
    # (source, seq), stored once since it is read on every hop
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.key = (self.source, self.seq)


@dataclass(slots=True, eq=False)
class Frame:
    kind: FrameKind
    tx: int
    rx: int
    payload: Any
    airtime: float
    ack: bool = False
    uid: int = 0
    # anycast receiver set (ORW forwarder set)
    anycast: frozenset | None = None


@dataclass(slots=True, eq=False)
class QueueEntry:
    frame: Frame
    remaining: int
    planned: int
    await_ack: bool = False
    retries_left: int = 0
    ack_timeout: float = 0.0
    attempt: int = 0


@dataclass(slots=True, eq=False)
class Transmission:
    frame: Frame
    tx: int
    start: float
    end: float
    arrived: set
    entry: QueueEntry | None
    # other transmissions sharing part of [start, end)
    overlaps: list = field(default_factory=list)


class SimEvent(NamedTuple):
    """Heap item layout; ``seq_no`` is unique, so ordering never reaches ``body``.

    The heap stores plain tuples in this layout (cheaper to build).
    """

    time: float
    seq_no: int
    kind: int
    node: int
    body: Any


class NodeRuntime:
    def __init__(self, node_id: int, capacity: int):
        self.id = node_id
        self.capacity = capacity
        self.queue: deque[QueueEntry] = deque()
        self.ctrl: deque[Frame] = deque()
        self.held: deque = deque()
        self.transmitting: Transmission | None = None
        self.awaiting: QueueEntry | None = None
        self.agent = None

    @property
    def radio(self) -> str:
        return "transmitting" if self.transmitting is not None else "idle"


class Simulation:
    """One run of one scenario.  Single-threaded; owns all of its state."""

    def __init__(self, scenario: ScenarioConfig, trace: bool = False):
        from .strategies import make_agents

        self.scenario = scenario
        self.topology = scenario.topology
        self.sink = scenario.topology.sink
        self.policy = scenario.policy
        self.rng = random.Random(scenario.seed)
        self._rand = self.rng.random
        self.graph = connectivity_graph(
            scenario.table, scenario.posture, scenario.budget, scenario.threshold,
            scenario.topology.node_ids,
        )
        self.neighbors = {n: self.graph.neighbors(n) for n in self.graph.nodes}
        budget = scenario.budget.max_attenuation_db
        # P[attenuation <= budget] per neighbour; a zero-spread link is a step
        self._nbr_p = {}
        for n in self.graph.nodes:
            row = []
            for r in self.neighbors[n]:
                s = scenario.table.lookup(scenario.posture, n, r)
                if s.stddev_db > 0:
                    row.append((r, self.graph.probability(n, r)))
                else:
                    row.append((r, 1.0 if s.mean_db <= budget else 0.0))
            self._nbr_p[n] = row
        self.nodes = {n: NodeRuntime(n, scenario.queue_capacity) for n in self.graph.nodes}
        self.ledger = PacketLedger()
        self.tx_counter: Counter = Counter()
        # data frames are counted apart from tx_counter (enum hashing is slow)
        self._data_tx = 0
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self._uid = 0
        self._on_air: list[Transmission] = []
        # (node, dest, anycast set) -> Schedule; the graph is fixed for the run
        self._schedules: dict = {}
        self.trace: list | None = [] if trace else None
        self.end_time = scenario.duration + scenario.drain
        self._interval = 1.0 / scenario.rate
        self._duration = scenario.duration
        self._data_airtime = scenario.data_airtime
        self._ttl0 = scenario.initial_ttl
        self._p0 = scenario.gossip_initial_p
        self._phase = {}
        for src in sorted(scenario.topology.sources):
            self._phase[src] = self.rng.uniform(0.0, self._interval)
        agents = make_agents(self)
        for n, agent in agents.items():
            self.nodes[n].agent = agent
        self._finished = False
        self.report: MetricsReport | None = None

    # ---------------------------------------------------------------- scheduling
    def schedule(self, time: float, kind: int, node: int, body=None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, node, body))

    def set_timer(self, node: int, delay: float, key) -> None:
        self.schedule(self.now + delay, TIMER, node, key)

    def _next_uid(self) -> int:
        self._uid += 1
        return self._uid

    # ------------------------------------------------------------------- helpers
    def etx(self, a: int, b: int) -> float:
        return self.graph.etx(a, b)

    def _log(self, *record) -> None:
        if self.trace is not None:
            self.trace.append(record)

    # -------------------------------------------------------------- agent API
    def send_data(self, node: int, packet: Packet, dest: int = BROADCAST,
                  anycast: frozenset | None = None) -> bool:
        """Queue one Data frame carrying ``packet`` (TTL/hops updated on the way out)."""
        key = packet.key
        if packet.ttl <= 0:
            self.ledger.entries[key].last_loss = Disposition.TTL
            if self.trace is not None:
                self.trace.append(("drop", self.now, node, key, Disposition.TTL))
            return False
        rt = self.nodes[node]
        if len(rt.queue) >= rt.capacity:
            self.ledger.entries[key].last_loss = Disposition.BUFFER
            if self.trace is not None:
                self.trace.append(("drop", self.now, node, key, Disposition.BUFFER))
            return False
        out = Packet(packet.source, packet.seq, packet.created_at,
                     packet.ttl - 1, packet.hops + 1, packet.fwd_prob)
        sched = self._schedules.get((node, dest, anycast))
        if sched is None:
            if dest != BROADCAST:
                receivers = (dest,)
            elif anycast is not None:
                receivers = anycast
            else:
                receivers = self.neighbors[node]
            worst = max((self.graph.etx(node, r) for r in receivers), default=1.0)
            sched = apply_policy(self.policy, True, worst)
            self._schedules[(node, dest, anycast)] = sched
        self._uid += 1
        frame = Frame(_DATA, node, dest, out, self._data_airtime,
                      sched.await_ack, self._uid, anycast)
        rt.queue.append(QueueEntry(frame, sched.transmissions, sched.transmissions,
                                   sched.await_ack, sched.max_retries, sched.ack_timeout))
        self.ledger.entries[key].live += 1
        if rt.transmitting is None:
            self._try_start(rt)
        return True

    def send_control(self, node: int, kind: FrameKind, dest: int, body=None) -> None:
        frame = Frame(kind, node, dest, body, self.scenario.control_airtime,
                      uid=self._next_uid())
        rt = self.nodes[node]
        rt.ctrl.append(frame)
        self._try_start(rt)

    def hold(self, node: int, packet: Packet) -> bool:
        """Park a packet in the node's strategy buffer (shares the queue capacity)."""
        rt = self.nodes[node]
        if len(rt.held) >= rt.capacity:
            self.ledger.note_loss(packet.key, Disposition.BUFFER)
            self._log("drop", self.now, node, packet.key, Disposition.BUFFER)
            return False
        rt.held.append(packet)
        self.ledger.spawn(packet.key)
        return True

    def release(self, node: int) -> list[Packet]:
        rt = self.nodes[node]
        out = list(rt.held)
        rt.held.clear()
        for p in out:
            self.ledger.kill(p.key)
        return out

    def drop(self, node: int, packet: Packet, reason: Disposition = Disposition.TTL) -> None:
        self.ledger.note_loss(packet.key, reason)
        self._log("drop", self.now, node, packet.key, reason)

    # ---------------------------------------------------------------------- MAC
    def _try_start(self, rt: NodeRuntime) -> None:
        if rt.transmitting is not None:
            return
        entry = None
        if rt.ctrl:
            frame = rt.ctrl.popleft()
        elif rt.awaiting is not None or not rt.queue:
            return
        else:
            entry = rt.queue[0]
            frame = entry.frame
        self.begin_transmission(rt, frame, entry)

    def begin_transmission(self, rt: NodeRuntime, frame: Frame,
                           entry: QueueEntry | None = None) -> float:
        """Put ``frame`` on the air now; returns the scheduled TxEnd time."""
        if rt.transmitting is not None:
            raise RuntimeError(f"node {rt.id} is already transmitting")
        now = self.now
        # attenuation <= budget happens with probability F, so one uniform
        # draw against F decides arrival without materialising the Gaussian
        rand = self._rand
        arrived = {r for r, p in self._nbr_p[rt.id] if rand() < p}
        end = now + frame.airtime
        tr = Transmission(frame, rt.id, now, end, arrived, entry)
        for o in self._on_air:
            # a frame ending exactly now does not overlap one starting now
            if o.end > now:
                o.overlaps.append(tr)
                tr.overlaps.append(o)
        rt.transmitting = tr
        self._on_air.append(tr)
        if frame.kind is _DATA:
            self._data_tx += 1
        else:
            self.tx_counter[frame.kind] += 1
        if self.trace is not None:
            p = frame.payload if frame.kind is _DATA else None
            self.trace.append((
                "tx", now, end, rt.id, frame.kind.value, frame.uid, frame.rx,
                p.source if p else None, p.seq if p else None,
                entry.planned if entry else 1,
            ))
        self._seq += 1
        _push(self._heap, (end, self._seq, TX_END, rt.id, tr))
        return end

    def resolve_reception(self, tr: Transmission, receiver: int,
                          overlapping: list[Transmission]) -> Reception:
        if receiver not in tr.arrived:
            return Reception.ATTENUATION_LOSS
        collided = False
        for o in overlapping:
            if o.tx == receiver:
                return Reception.HALF_DUPLEX_MISS
            if receiver in o.arrived:
                collided = True
        return Reception.COLLISION if collided else Reception.DELIVERED

    def _on_tx_end(self, rt: NodeRuntime, tr: Transmission) -> None:
        rt.transmitting = None
        frame = tr.frame
        end = tr.end
        self._on_air.remove(tr)
        overlaps = tr.overlaps
        if overlaps:
            busy = {o.tx for o in overlaps}
            noisy = set().union(*[o.arrived for o in overlaps])
        else:
            busy = noisy = _EMPTY

        entry = tr.entry
        is_data = frame.kind is _DATA
        key = frame.payload.key if is_data else None
        if entry is not None:
            entry.remaining -= 1
            if entry.await_ack:
                rt.awaiting = entry
                entry.attempt += 1
                # randomised wait so colliding senders do not retry in lock-step
                wait = entry.ack_timeout * (1.0 + self.rng.random())
                self.set_timer(rt.id, wait, ("ack", frame.uid, entry.attempt))
            elif entry.remaining <= 0:
                rt.queue.popleft()
                self.ledger.entries[key].live -= 1

        intended = None
        if is_data:
            if frame.rx != BROADCAST:
                intended = (frame.rx,)
            elif frame.anycast is not None:
                intended = frame.anycast
        # same precedence as resolve_reception, with the overlap sets built once
        arrived = tr.arrived
        trace = self.trace
        nbrs = self.neighbors[rt.id]
        if trace is None:
            if busy:
                delivered = [r for r in nbrs if r in arrived and r not in busy and r not in noisy]
            else:
                delivered = [r for r in nbrs if r in arrived]
            if is_data and len(delivered) < len(nbrs):
                # the last missed intended receiver (neighbour order) names the loss
                for r in reversed(nbrs):
                    if r in delivered or (intended is not None and r not in intended):
                        continue
                    self.ledger.entries[key].last_loss = (
                        Disposition.ATTENUATION if r not in arrived else Disposition.COLLISION)
                    break
        else:
            delivered = []
            for r in nbrs:
                if r not in arrived:
                    outcome = Reception.ATTENUATION_LOSS
                elif r in busy:
                    outcome = Reception.HALF_DUPLEX_MISS
                elif r in noisy:
                    outcome = Reception.COLLISION
                else:
                    outcome = Reception.DELIVERED
                trace.append(("rx", end, r, frame.uid, outcome.value, rt.id))
                if outcome is Reception.DELIVERED:
                    delivered.append(r)
                elif is_data and (intended is None or r in intended):
                    self.ledger.entries[key].last_loss = (
                        Disposition.ATTENUATION if outcome is Reception.ATTENUATION_LOSS
                        else Disposition.COLLISION)
        for r in delivered:
            self._receive(r, frame)
        self._try_start(rt)

    def _receive(self, r: int, frame: Frame) -> None:
        kind = frame.kind
        rt = self.nodes[r]
        if kind is _DATA:
            if frame.rx != r and frame.rx != BROADCAST:
                return
            if r == self.sink:
                p = frame.payload
                outcome = record_delivery(self.ledger, p.source, p.seq, self.now, p.hops)
                if self.trace is not None:
                    self.trace.append(("deliver", self.now, p.source, p.seq, outcome.value, frame.tx))
                if frame.ack:
                    self.send_control(r, FrameKind.ACK, frame.tx, frame.uid)
                return
            if frame.ack and frame.rx == r:
                self.send_control(r, FrameKind.ACK, frame.tx, frame.uid)
            rt.agent.on_data(frame)
        elif kind is FrameKind.ACK:
            if frame.rx != r:
                return
            entry = rt.awaiting
            if entry is not None and entry.frame.uid == frame.payload:
                rt.awaiting = None
                rt.queue.popleft()
                self.ledger.kill(entry.frame.payload.key)
                self._try_start(rt)
        elif frame.rx == r or frame.rx == BROADCAST:
            rt.agent.on_control(frame)

    def _on_ack_timeout(self, rt: NodeRuntime, uid: int, attempt: int) -> None:
        entry = rt.awaiting
        if entry is None or entry.frame.uid != uid or entry.attempt != attempt:
            return
        rt.awaiting = None
        if entry.retries_left > 0:
            entry.retries_left -= 1
            entry.remaining = 1
        else:
            rt.queue.popleft()
            self.ledger.kill(entry.frame.payload.key)
        self._try_start(rt)

    # ---------------------------------------------------------------- main loop
    def _on_generate(self, node: int, k: int) -> None:
        seq = k + 1
        packet = Packet(node, seq, self.now, self._ttl0, 0, self._p0)
        self.ledger.entries[packet.key] = LedgerEntry(self.now)
        if self.trace is not None:
            self.trace.append(("gen", self.now, node, seq))
        self.nodes[node].agent.on_generate(packet)
        nxt = self._phase[node] + seq * self._interval
        if nxt < self._duration:
            self._seq += 1
            _push(self._heap, (nxt, self._seq, GENERATE, node, seq))

    def run(self) -> MetricsReport:
        if self._finished:
            return self.report
        for src, phase in self._phase.items():
            if phase < self.scenario.duration:
                self.schedule(phase, GENERATE, src, 0)
        self.schedule(self.end_time, SIM_END, -1)
        for n in sorted(self.nodes):
            self.nodes[n].agent.start()
        heap = self._heap
        nodes = self.nodes
        pop = heapq.heappop
        while heap:
            time, _, kind, node, body = pop(heap)
            self.now = time
            if kind == TX_END:
                self._on_tx_end(nodes[node], body)
            elif kind == GENERATE:
                self._on_generate(node, body)
            elif kind == TIMER:
                if type(body) is tuple and body and body[0] == "ack":
                    self._on_ack_timeout(nodes[node], body[1], body[2])
                else:
                    nodes[node].agent.on_timer(body)
            else:
                break
        self._finished = True
        counts = {k.value: v for k, v in self.tx_counter.items()}
        if self._data_tx:
            counts["data"] = self._data_tx
        self.report = finalize(self.ledger, counts)
        return self.report

    def live_copies(self) -> Counter:
        """Packets physically present in queues/buffers (cross-check for the ledger)."""
        found: Counter = Counter()
        for rt in self.nodes.values():
            for e in rt.queue:
                found[e.frame.payload.key] += 1
            for p in rt.held:
                found[p.key] += 1
        return found


def run(scenario: ScenarioConfig, trace: bool = False) -> MetricsReport:
    return Simulation(scenario, trace=trace).run()
