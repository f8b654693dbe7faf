import math
import random
from collections import Counter, defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from conftest import table_from_probs
from wbancast.channel import connectivity_graph
from wbancast.engine import Packet, Simulation
from wbancast.errors import ConfigError
from wbancast.metrics import Disposition
from wbancast.ppvg import build_ppvg_tree
from wbancast.scenario import ScenarioConfig
from wbancast.strategies import (
    CtpState,
    OrwState,
    Reply,
    attenuation_select,
    build_overlay,
    ctp_on_beacon,
    gossip_forward,
    hop_gradient_overlay,
    multipath_next_hops,
    orw_accept,
    orw_forward,
    request_reply_attenuation_estimate,
)

OVERLAY = {3: (1, 2), 1: (0,), 2: (0,)}


# ------------------------------------------------------------ multi-path

def test_apap_all_parents():
    assert multipath_next_hops("APAP", 3, True, OVERLAY, random.Random(1)) == [1, 2]
    assert multipath_next_hops("APAP", 3, False, OVERLAY, random.Random(1)) == [1, 2]


def test_pppp_one_parent_uniformly():
    rng = random.Random(4)
    picks = Counter(tuple(multipath_next_hops("PPPP", 3, True, OVERLAY, rng)) for _ in range(4000))
    assert set(picks) == {(1,), (2,)}
    assert abs(picks[(1,)] - 2000) < 4 * math.sqrt(1000)


def test_mixed_fan_out():
    rng = random.Random(2)
    assert multipath_next_hops("APPP", 3, True, OVERLAY, rng) == [1, 2]
    assert len(multipath_next_hops("APPP", 3, False, OVERLAY, rng)) == 1
    assert len(multipath_next_hops("PPAP", 3, True, OVERLAY, rng)) == 1
    assert multipath_next_hops("PPAP", 3, False, OVERLAY, rng) == [1, 2]


def test_multipath_errors():
    with pytest.raises(ConfigError):
        multipath_next_hops("APAP", 5, True, OVERLAY, random.Random())
    with pytest.raises(ValueError):
        multipath_next_hops("XYZ", 3, True, OVERLAY, random.Random())


def test_hop_gradient_overlay(synthetic):
    g = connectivity_graph(synthetic, 1)
    overlay = hop_gradient_overlay(g, 0)
    levels = g.hop_levels(0)
    for v, parents in overlay.items():
        assert parents and all(levels[p] == levels[v] - 1 for p in parents)


def test_overlay_override_is_checked(lossless):
    g = connectivity_graph(lossless, 1)
    good = {v: (0,) for v in range(1, 7)}
    assert build_overlay(g, 0, good) == good
    with pytest.raises(ConfigError, match="cycle"):
        build_overlay(g, 0, {**good, 1: (2,), 2: (1,)})
    with pytest.raises(ConfigError, match="no parent"):
        build_overlay(g, 0, {v: (0,) for v in range(1, 6)})
    with pytest.raises(ConfigError, match="sink"):
        build_overlay(g, 0, {**good, 0: (1,)})


# ----------------------------------------------------------- attenuation

def test_min_att():
    assert attenuation_select("MinAtt", [Reply(3, 12), Reply(4, 9)], random.Random()) == [4]


def test_both_min_att():
    replies = [Reply(3, 12), Reply(4, 9), Reply(5, 20)]
    assert attenuation_select("BothMinAtt", replies, random.Random()) == [3, 4]
    assert attenuation_select("BothMinAtt", [Reply(5, 1)], random.Random()) == [5]


def test_close_to_me():
    replies = [Reply(3, 12, 5), Reply(4, 9, 7), Reply(5, 30, 1)]
    assert attenuation_select("CloseToMe", replies, random.Random()) == [3]
    # hand-enumerated: node 5 is nearest to me but not among the two best to the sink
    replies = [Reply(3, 12, 9), Reply(4, 9, 7), Reply(5, 30, 1)]
    assert attenuation_select("CloseToMe", replies, random.Random()) == [4]
    # to-source tie goes to the lower id
    replies = [Reply(6, 12, 4), Reply(2, 9, 4)]
    assert attenuation_select("CloseToMe", replies, random.Random()) == [2]


def test_ties_and_empty():
    assert attenuation_select("MinAtt", [Reply(5, 9), Reply(2, 9)], random.Random()) == [2]
    assert attenuation_select("MinAtt", [], random.Random()) == []
    with pytest.raises(ValueError):
        attenuation_select("Nope", [Reply(1, 1)], random.Random())


@given(st.lists(st.tuples(st.integers(1, 6), st.floats(0, 60), st.floats(0, 60)),
                min_size=1, max_size=6, unique_by=lambda r: r[0]),
       st.sampled_from(["MinAtt", "BothMinAtt", "CloseToMe", "RandAtt"]),
       st.integers(0, 1000))
def test_selection_is_pure(rows, kind, seed):
    replies = [Reply(*r) for r in rows]
    a = attenuation_select(kind, replies, random.Random(seed))
    b = attenuation_select(kind, list(reversed(replies)), random.Random(seed))
    assert a == b and a
    assert set(a) <= {r.responder for r in replies}


def test_reply_estimate():
    # 1 and 2 hang off the sink, 3 reaches it through 1 or 2
    t = table_from_probs({(0, 1): 0.9, (0, 2): 0.8, (1, 3): 0.9, (2, 3): 0.6},
                         nodes=(0, 1, 2, 3))
    g = connectivity_graph(t, 1)
    assert request_reply_attenuation_estimate(0, t, 1, g, 0) == 0.0
    assert request_reply_attenuation_estimate(1, t, 1, g, 0) == t.lookup(1, 0, 1).mean_db
    m13, m23 = t.lookup(1, 1, 3).mean_db, t.lookup(1, 2, 3).mean_db
    assert m13 < m23
    assert request_reply_attenuation_estimate(3, t, 1, g, 0) == m13


# ------------------------------------------------------------------- CTP

def test_ctp_single_neighbour():
    st_ = CtpState(4)
    st_.link_etx[0] = 1.25
    ctp_on_beacon(st_, 0, 0.0)
    assert (st_.cost, st_.parent) == (1.25, 0)


def test_ctp_argmin():
    st_ = CtpState(4)
    st_.link_etx.update({0: 3.0, 2: 1.2})
    ctp_on_beacon(st_, 0, 0.0)
    ctp_on_beacon(st_, 2, 1.0)
    assert st_.parent == 2 and st_.cost == pytest.approx(2.2)


def test_ctp_initial_and_sink():
    assert (CtpState(3).cost, CtpState(3).parent) == (math.inf, None)
    assert CtpState(0, is_sink=True).cost == 0.0


def test_ctp_ewma_from_beacon_gaps():
    st_ = CtpState(4, alpha=0.1)
    ctp_on_beacon(st_, 0, 0.0, beacon_seq=1)
    assert st_.link_etx[0] == 1.0
    ctp_on_beacon(st_, 0, 0.0, beacon_seq=3)  # one beacon missed
    assert st_.link_etx[0] == pytest.approx(0.9 * 1.0 + 0.1 * 2.0)


def test_ctp_skips_children():
    st_ = CtpState(4)
    ctp_on_beacon(st_, 5, 1.0, sender_parent=4)
    assert st_.parent is None


# ------------------------------------------------------------------- ORW

def test_orw_forwarder_set_and_cache():
    s = OrwState(3, cost=2, probing_done=True, neighbor_cost={0: 0, 1: 1, 4: 2, 5: 3})
    s.refresh()
    assert orw_forward(s) == frozenset({0, 1})
    p = Packet(6, 1, 0.0, 5)
    assert orw_accept(s, p, frozenset({3, 4})) == "forward"
    assert orw_accept(s, p, frozenset({3, 4})) == "duplicate"
    assert orw_accept(s, p, frozenset({4})) == "not-member"
    assert orw_forward(OrwState(3, cost=2)) is None


# ---------------------------------------------------------------- gossip

def test_gossip_examples():
    rng = random.Random(0)
    p = Packet(1, 1, 0.0, ttl=5, fwd_prob=1.0)
    act = gossip_forward("ProbaCvg", p, 1.0, rng)
    assert act.kind == "broadcast" and act.packet.fwd_prob == 0.5
    act = gossip_forward("FloodToSink", Packet(1, 1, 0.0, ttl=0), 1.0, rng)
    assert act.kind == "drop" and act.reason is Disposition.TTL
    act = gossip_forward("PrunedCvg", p, 1.0, rng, neighbors=[2, 5])
    assert act.kind == "unicast" and act.target in (2, 5)


class AlwaysForward:
    def random(self):
        return 0.0


@given(st.integers(0, 12))
def test_proba_cvg_halves_per_forward(k):
    p = Packet(1, 1, 0.0, ttl=50, fwd_prob=1.0)
    for _ in range(k):
        p = gossip_forward("ProbaCvg", p, p.fwd_prob, AlwaysForward()).packet
    assert p.fwd_prob == 2.0 ** -k


def test_proba_cvg_forward_frequency():
    rng = random.Random(3)
    p = Packet(1, 1, 0.0, ttl=5)
    n = 20_000
    hits = sum(gossip_forward("ProbaCvg", p, 0.25, rng).kind == "broadcast" for _ in range(n))
    assert abs(hits / n - 0.25) < 4 * math.sqrt(0.25 * 0.75 / n)


# -------------------------------------------------------- trace properties

def _traced(table, strategy, **kw):
    sc = ScenarioConfig(table, strategy=strategy, **kw)
    sim = Simulation(sc, trace=True)
    sim.run()
    return sim


def _data_frames(sim):
    """uid -> (tx node, rx, source, seq) for every Data frame put on air."""
    frames = {}
    for r in sim.trace:
        if r[0] == "tx" and r[4] == "data":
            frames[r[5]] = (r[3], r[6], r[7], r[8])
    return frames


@pytest.mark.parametrize("posture", [1, 4, 7])
def test_ppvg_uses_only_the_tree_path(synthetic, posture):
    sim = _traced(synthetic, "PPVG", posture=posture, rate=20, duration=5, seed=posture)
    tree = build_ppvg_tree(sim.graph, 0)
    per_packet = defaultdict(set)
    for tx, rx, src, seq in _data_frames(sim).values():
        assert rx == tree.parent[tx]
        per_packet[(src, seq)].add(tx)
    for (src, _), senders in per_packet.items():
        assert senders <= set(tree.path(src)[:-1])


def test_apap_fan_out_equals_parent_count(synthetic):
    sim = _traced(synthetic, "APAP", posture=2, rate=5, duration=5, seed=1)
    overlay = hop_gradient_overlay(sim.graph, 0)
    frames = defaultdict(set)
    for tx, rx, src, seq in _data_frames(sim).values():
        frames[(tx, src, seq)].add(rx)
    for (tx, _, _), receivers in frames.items():
        assert receivers == set(overlay[tx])


def test_pppp_fan_out_is_one(synthetic):
    sim = _traced(synthetic, "PPPP", posture=2, rate=5, duration=5, seed=1)
    counts = Counter((tx, src, seq) for tx, _, src, seq in _data_frames(sim).values())
    assert set(counts.values()) == {1}


@pytest.mark.parametrize("strategy", ["FloodToSink", "ProbaCvg", "PrunedCvg", "ORW"])
def test_no_node_forwards_a_packet_twice(synthetic, strategy):
    sim = _traced(synthetic, strategy, posture=5, rate=10, duration=5, seed=3)
    counts = Counter((tx, src, seq) for tx, _, src, seq in _data_frames(sim).values())
    assert counts and max(counts.values()) == 1


def test_ctp_and_orw_send_control_traffic(synthetic):
    for strategy, kind in [("CTP", "beacon"), ("ORW", "probe"), ("MinAtt", "request")]:
        sim = _traced(synthetic, strategy, posture=1, rate=5, duration=4, seed=1)
        kinds = Counter(r[4] for r in sim.trace if r[0] == "tx")
        assert kinds[kind] > 0 and kinds["data"] > 0
        assert sim.report.delivered_unique > 0


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["MinAtt", "BothMinAtt", "CloseToMe", "RandAtt"]), st.integers(0, 500))
def test_attenuation_strategies_deliver(kind, seed):
    from wbancast.channel import builtin_table_path, load_channel_table
    table = load_channel_table(builtin_table_path("synthetic"))
    sim = _traced(table, kind, posture=1 + seed % 7, rate=2, duration=5, seed=seed)
    # replies only ever come from nodes nearer the sink
    levels = sim.graph.hop_levels(0)
    for tx, rx, _, _ in _data_frames(sim).values():
        assert levels[rx] < levels[tx]
