from hypothesis import given, strategies as st

from wbancast.metrics import (
    LOSSES,
    DeliveryOutcome,
    Disposition,
    PacketLedger,
    finalize,
    record_delivery,
)


def fold(seqs, source=1):
    ledger = PacketLedger()
    for s in set(seqs):
        ledger.generate(source, s, 0.0)
    outcomes = [record_delivery(ledger, source, s, float(i)) for i, s in enumerate(seqs)]
    return ledger, outcomes


def test_in_order():
    ledger, _ = fold([1, 2, 3])
    assert ledger.inversions == 0


def test_one_inversion():
    ledger, out = fold([1, 3, 2])
    assert ledger.inversions == 1
    assert out[-1] is DeliveryOutcome.NEW_INVERSION


def test_inversion_and_duplicate():
    ledger, out = fold([2, 1, 1])
    assert (ledger.inversions, ledger.duplicates) == (1, 1)
    assert out == [DeliveryOutcome.NEW_IN_ORDER, DeliveryOutcome.NEW_INVERSION,
                   DeliveryOutcome.DUPLICATE]


def test_sources_are_independent():
    ledger = PacketLedger()
    for src, seq in [(1, 5), (2, 1), (1, 6), (2, 2)]:
        ledger.generate(src, seq, 0.0)
        record_delivery(ledger, src, seq, 1.0)
    assert ledger.inversions == 0


def test_rates():
    ledger = PacketLedger()
    for s in range(1, 101):
        ledger.generate(1, s, 0.0)
    for s in range(1, 41):
        record_delivery(ledger, 1, s, 0.5)
    r = finalize(ledger, 200)
    assert r.reception_rate == 0.4
    assert r.mean_delay_s == 0.5
    assert r.losses["ttl"] == 60

    ledger = PacketLedger()
    order = list(range(1, 46)) + [100, 46, 47, 48, 49]
    for s in order:
        ledger.generate(1, s, 0.0)
    for s in order:
        record_delivery(ledger, 1, s, 1.0)
    r = finalize(ledger, 50)
    assert r.delivered_unique == 50 and r.inversions == 4
    assert abs(r.total_order_rate - 0.92) < 1e-12


def test_total_order_rate_example():
    ledger = PacketLedger()
    seqs = list(range(1, 51))
    for s in seqs:
        ledger.generate(1, s, 0.0)
    # five packets each arrive after a later one
    order = seqs[:]
    for i in range(0, 10, 2):
        order[i], order[i + 1] = order[i + 1], order[i]
    for s in order:
        record_delivery(ledger, 1, s, 1.0)
    r = finalize(ledger, 50)
    assert r.inversions == 5
    assert abs(r.total_order_rate - 0.9) < 1e-12


def test_empty_run():
    r = finalize(PacketLedger(), {})
    assert (r.generated, r.reception_rate, r.total_order_rate, r.mean_delay_s) == (0, 0, 0, 0)
    assert sum(r.losses.values()) == 0


def test_disposition_rules():
    ledger = PacketLedger()
    for s in (1, 2, 3, 4):
        ledger.generate(1, s, 0.0)
    ledger.spawn((1, 1))
    ledger.note_loss((1, 2), Disposition.COLLISION)
    ledger.spawn((1, 3)); ledger.kill((1, 3))
    ledger.note_loss((1, 3), Disposition.BUFFER)
    record_delivery(ledger, 1, 4, 1.0)
    assert ledger.disposition((1, 1)) is Disposition.PENDING
    assert ledger.disposition((1, 2)) is Disposition.COLLISION
    assert ledger.disposition((1, 3)) is Disposition.BUFFER
    assert ledger.disposition((1, 4)) is Disposition.DELIVERED
    r = finalize(ledger, {"data": 3, "ack": 1})
    assert r.transmissions == 4 and r.data_transmissions == 3
    assert r.delivered_unique + sum(r.losses.values()) == r.generated
    assert [d.value for d in LOSSES] == ["atten", "collision", "buffer", "ttl", "pending"]


def oracle_inversions(deliveries):
    seen, high, inv = set(), {}, 0
    for src, seq in deliveries:
        if (src, seq) in seen:
            continue
        seen.add((src, seq))
        if seq < high.get(src, 0):
            inv += 1
        high[src] = max(high.get(src, 0), seq)
    return inv


@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 12)), max_size=60))
def test_replay_reproduces_report(deliveries):
    ledger = PacketLedger()
    for src, seq in set(deliveries):
        ledger.generate(src, seq, 0.0)
    for t, (src, seq) in enumerate(deliveries):
        record_delivery(ledger, src, seq, float(t))
    assert ledger.inversions == oracle_inversions(deliveries)
    assert ledger.duplicates == len(deliveries) - len(set(deliveries))

    replay = PacketLedger()
    for src, seq in set(deliveries):
        replay.generate(src, seq, 0.0)
    for src, seq, t in ledger.deliveries:
        record_delivery(replay, src, seq, t)
    # the replay sees unique deliveries only, so duplicates aside it matches
    a, b = finalize(replay, 7), finalize(ledger, 7)
    a.duplicates = b.duplicates
    assert a == b
