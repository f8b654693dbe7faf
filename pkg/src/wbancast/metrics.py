"""Per-run packet accounting: reception, total order, transmissions, delay."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

CSV_COLUMNS = (
    "strategy", "posture", "rate_pps", "seed", "generated", "delivered",
    "reception_rate", "inversions", "total_order_rate", "transmissions",
    "mean_delay_s", "max_delay_s", "loss_atten", "loss_collision",
    "loss_buffer", "loss_ttl", "loss_pending",
)


class Disposition(str, enum.Enum):
    DELIVERED = "delivered"
    ATTENUATION = "atten"
    COLLISION = "collision"
    BUFFER = "buffer"
    # forwarding budget exhausted: TTL, gossip probability, routing dead end
    TTL = "ttl"
    PENDING = "pending"


LOSSES = (
    Disposition.ATTENUATION,
    Disposition.COLLISION,
    Disposition.BUFFER,
    Disposition.TTL,
    Disposition.PENDING,
)


class DeliveryOutcome(enum.Enum):
    NEW_IN_ORDER = "in-order"
    NEW_INVERSION = "inversion"
    DUPLICATE = "duplicate"


@dataclass(slots=True)
class LedgerEntry:
    generated_at: float
    delivered_at: float | None = None
    hops: int | None = None
    live: int = 0
    last_loss: Disposition | None = None


@dataclass
class PacketLedger:
    entries: dict[tuple[int, int], LedgerEntry] = field(default_factory=dict)
    high_water: dict[int, int] = field(default_factory=dict)
    inversions: int = 0
    duplicates: int = 0
    deliveries: list[tuple[int, int, float]] = field(default_factory=list)

    def generate(self, source: int, seq: int, now: float) -> None:
        self.entries[(source, seq)] = LedgerEntry(now)

    # live-copy bookkeeping; the disposition of an undelivered packet is read
    # off these counters when the run ends
    def spawn(self, key) -> None:
        self.entries[key].live += 1

    def kill(self, key) -> None:
        self.entries[key].live -= 1

    def note_loss(self, key, reason: Disposition) -> None:
        self.entries[key].last_loss = reason

    def disposition(self, key) -> Disposition:
        e = self.entries[key]
        if e.delivered_at is not None:
            return Disposition.DELIVERED
        if e.live > 0:
            return Disposition.PENDING
        return e.last_loss or Disposition.TTL


def record_delivery(ledger: PacketLedger, source: int, seq: int, now: float,
                    hops: int | None = None) -> DeliveryOutcome:
    """Fold one sink reception into the ledger (high-water-mark inversion rule)."""
    key = (source, seq)
    entry = ledger.entries.get(key)
    if entry is None:
        entry = ledger.entries[key] = LedgerEntry(now)
    if entry.delivered_at is not None:
        ledger.duplicates += 1
        return DeliveryOutcome.DUPLICATE
    entry.delivered_at = now
    entry.hops = hops
    ledger.deliveries.append((source, seq, now))
    hw = ledger.high_water.get(source, 0)
    if seq < hw:
        ledger.inversions += 1
        return DeliveryOutcome.NEW_INVERSION
    ledger.high_water[source] = seq
    return DeliveryOutcome.NEW_IN_ORDER


@dataclass
class MetricsReport:
    generated: int
    delivered_unique: int
    reception_rate: float
    inversions: int
    inversion_rate: float
    total_order_rate: float
    transmissions: int
    data_transmissions: int
    mean_delay_s: float
    max_delay_s: float
    losses: dict[str, int]
    duplicates: int = 0

    def as_row(self, strategy: str, posture: int, rate: float, seed: int) -> list:
        return [
            strategy, posture, _fmt(rate), seed, self.generated, self.delivered_unique,
            _fmt(self.reception_rate), self.inversions, _fmt(self.total_order_rate),
            self.transmissions, _fmt(self.mean_delay_s), _fmt(self.max_delay_s),
            *(self.losses[d.value] for d in LOSSES),
        ]

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _fmt(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return f"{x:.6f}"


def finalize(ledger: PacketLedger, tx_counter) -> MetricsReport:
    """``tx_counter`` is a total count or a mapping frame-kind -> count."""
    if isinstance(tx_counter, int):
        transmissions = data_tx = tx_counter
    else:
        transmissions = sum(tx_counter.values())
        data_tx = tx_counter.get("data", 0)
    counts = dict.fromkeys(LOSSES, 0)
    delays = []
    for key, e in ledger.entries.items():
        d = ledger.disposition(key)
        if d is Disposition.DELIVERED:
            delays.append(e.delivered_at - e.generated_at)
        else:
            counts[d] += 1
    losses = {d.value: n for d, n in counts.items()}
    generated = len(ledger.entries)
    delivered = len(delays)
    inv_rate = ledger.inversions / delivered if delivered else 0.0
    return MetricsReport(
        generated=generated,
        delivered_unique=delivered,
        reception_rate=delivered / generated if generated else 0.0,
        inversions=ledger.inversions,
        inversion_rate=inv_rate,
        total_order_rate=1.0 - inv_rate if delivered else 0.0,
        transmissions=transmissions,
        data_transmissions=data_tx,
        mean_delay_s=sum(delays) / delivered if delivered else 0.0,
        max_delay_s=max(delays) if delays else 0.0,
        losses=losses,
        duplicates=ledger.duplicates,
    )
