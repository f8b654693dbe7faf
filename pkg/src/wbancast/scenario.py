"""Validated run parameters shared by the engine and the harness."""
from __future__ import annotations

from dataclasses import dataclass, field

from .channel import DEFAULT_THRESHOLD, ChannelTable, RadioBudget, check_posture
from .errors import ConfigError
from .reliability import ACK, KINDS, NOACK, NONE, RetransmissionPolicy
from .topology import BodyTopology, load_topology

STRATEGIES = (
    "APAP", "APPP", "PPAP", "PPPP",
    "MinAtt", "BothMinAtt", "CloseToMe", "RandAtt",
    "CTP", "ORW",
    "FloodToSink", "ProbaCvg", "PrunedCvg",
    "PPVG",
)
_BY_LOWER = {s.lower(): s for s in STRATEGIES}


def canonical_strategy(name: str) -> str:
    try:
        return _BY_LOWER[name.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGIES)}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    table: ChannelTable
    topology: BodyTopology = field(default_factory=load_topology)
    posture: int = 1
    strategy: str = "PPVG"
    # "auto": ACK-based for CTP/ORW, ETX repeats for everything else;
    # "baseline": ACK-based for CTP/ORW, single transmissions otherwise
    retransmission: str = "auto"
    rate: float = 10.0
    duration: float = 60.0
    seed: int = 1
    # simulated time after the last generation slot, so in-flight packets land
    drain: float = 1.0
    budget: RadioBudget = RadioBudget()
    threshold: float = DEFAULT_THRESHOLD
    # 127-byte PSDU + 6-byte PHY header at 250 kb/s
    data_airtime: float = 133 * 8 / 250_000
    control_airtime: float = 0.0005
    queue_capacity: int = 64
    ttl: int | None = None
    request_timeout: float = 0.050
    beacon_period: float = 1.0
    ctp_alpha: float = 0.1
    orw_probe_time: float = 2.0
    gossip_initial_p: float = 1.0
    ack_max_retries: int = 3
    ack_timeout: float = 0.020
    overlay: dict[int, tuple[int, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", canonical_strategy(self.strategy))
        check_posture(self.posture)
        if self.retransmission not in KINDS + ("auto", "baseline"):
            raise ConfigError(f"unknown retransmission policy {self.retransmission!r}")
        if not self.rate > 0:
            raise ConfigError(f"rate must be > 0, got {self.rate}")
        if not self.duration >= 0:
            raise ConfigError(f"duration must be >= 0, got {self.duration}")
        if self.drain < 0:
            raise ConfigError("drain must be >= 0")
        if self.data_airtime <= 0 or self.control_airtime <= 0:
            raise ConfigError("airtimes must be > 0")
        if self.queue_capacity < 1:
            raise ConfigError("queue_capacity must be >= 1")
        if self.ttl is not None and self.ttl < 1:
            raise ConfigError("ttl must be >= 1")
        if not 0 < self.gossip_initial_p <= 1:
            raise ConfigError("gossip_initial_p must lie in (0, 1]")
        if not 0 < self.threshold < 1:
            raise ConfigError("threshold must lie in (0, 1)")
        self.table.check_coverage(self.topology.node_ids, [self.posture])

    @property
    def initial_ttl(self) -> int:
        return self.ttl if self.ttl is not None else 2 * len(self.topology.nodes)

    @property
    def policy(self) -> RetransmissionPolicy:
        kind = self.retransmission
        if kind in ("auto", "baseline"):
            if self.strategy in ("CTP", "ORW"):
                kind = ACK
            else:
                kind = NOACK if kind == "auto" else NONE
        return RetransmissionPolicy(kind, self.ack_max_retries, self.ack_timeout)
