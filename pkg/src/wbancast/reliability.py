"""Retransmission policies for Data frames.

``noack`` sends every Data frame ceil(ETX) times back-to-back without waiting
for an acknowledgement; ``ack`` is classic stop-and-wait with bounded retries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

NONE = "none"
NOACK = "noack"
ACK = "ack"
KINDS = (NONE, NOACK, ACK)


@dataclass(frozen=True)
class RetransmissionPolicy:
    kind: str = NONE
    max_retries: int = 3
    ack_timeout: float = 0.020

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown retransmission policy {self.kind!r}; use one of {KINDS}")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.ack_timeout <= 0:
            raise ConfigError("ack_timeout must be > 0")


@dataclass(frozen=True)
class Schedule:
    """How the MAC handles one queued frame."""

    transmissions: int
    await_ack: bool = False
    max_retries: int = 0
    ack_timeout: float = 0.0


def repeat_count(etx: float) -> int:
    if not etx >= 1:
        raise ConfigError(f"ETX {etx} is below 1")
    return math.ceil(etx)


def apply_policy(policy: RetransmissionPolicy, is_data: bool, link_etx: float) -> Schedule:
    """``link_etx`` is the ETX of the link, or the worst ETX over a receiver set."""
    if not is_data or policy.kind == NONE:
        return Schedule(1)
    if policy.kind == NOACK:
        return Schedule(repeat_count(link_etx))
    return Schedule(1, True, policy.max_retries, policy.ack_timeout)
