"""Discrete-time broadcast radio medium with range cutoff and collisions.

Propagation is a hard cutoff at the configured maximum range; the carrier
frequency and transmit power in the config are descriptive metadata only, so
a path-loss model can replace the cutoff later without a schema change.
Collisions are pessimistic: any airtime overlap between two transmissions
destroys both everywhere, with no capture effect. Time is a plain seconds
counter advanced explicitly by the driver, never the wall clock.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .geo import GeoPoint, haversine_m

# Float guard for receivers placed exactly at the range cutoff.
_RANGE_EPS_M = 1e-6


class NodeRole(str, Enum):
    WEARABLE = "WEARABLE"
    BASE = "BASE"


class DuplicateSubmission(ValueError):
    """A node tried to transmit while its own previous frame was still on air."""


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    max_range_m: float = 610.0
    data_rate_bps: float = 50_000.0
    random_loss_prob: float = 0.0
    rng_seed: int = 0
    # Descriptive only; not used by the propagation model.
    freq_mhz: float = 915.0
    tx_power_dbm: float = 23.0

    def __post_init__(self) -> None:
        if self.max_range_m <= 0:
            raise ValueError("max_range_m must be positive")
        if self.data_rate_bps <= 0:
            raise ValueError("data_rate_bps must be positive")
        if not (0.0 <= self.random_loss_prob <= 1.0):
            raise ValueError("random_loss_prob must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "max_range_m": self.max_range_m,
            "data_rate_bps": self.data_rate_bps,
            "random_loss_prob": self.random_loss_prob,
            "rng_seed": self.rng_seed,
            "freq_mhz": self.freq_mhz,
            "tx_power_dbm": self.tx_power_dbm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelConfig":
        return cls(**data)


@dataclass
class RadioNode:
    node_id: str
    position: GeoPoint
    role: NodeRole = NodeRole.WEARABLE


@dataclass(frozen=True)
class Transmission:
    origin: str
    line: str
    start: float
    airtime: float

    def __post_init__(self) -> None:
        if self.airtime <= 0:
            raise ValueError("airtime must be positive")

    @property
    def end(self) -> float:
        return self.start + self.airtime


@dataclass(frozen=True)
class Delivery:
    receiver: str
    line: str
    at: float
    origin: str


@dataclass
class _Pending:
    tx: Transmission
    origin_pos: GeoPoint
    collided: bool = False


def intervals_overlap(s1: float, e1: float, s2: float, e2: float) -> bool:
    """Half-open interval overlap; exact touching does not collide."""
    return s1 < e2 and s2 < e1


class BroadcastChannel:
    """Shared medium connecting every registered node.

    Single-owner mutable state: one driver submits, moves, and steps; reads
    between steps are safe. With a fixed seed the delivery stream is fully
    reproducible.
    """

    def __init__(self, config: ChannelConfig | None = None):
        self.config = config or ChannelConfig()
        self.now = 0.0
        self._nodes: dict[str, RadioNode] = {}
        self._pending: list[_Pending] = []
        self._rng = random.Random(self.config.rng_seed)

    def add_node(self, node: RadioNode) -> None:
        if node.node_id in self._nodes:
            raise ValueError(f"node id already registered: {node.node_id!r}")
        self._nodes[node.node_id] = node

    def node(self, node_id: str) -> RadioNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def move(self, node_id: str, position: GeoPoint) -> None:
        self.node(node_id).position = position

    def submit(self, tx: Transmission) -> None:
        """Queue a transmission; collision fate is sealed here, delivery at step."""
        if tx.start < self.now:
            raise ValueError(f"transmission starts at {tx.start}, before channel time {self.now}")
        origin = self.node(tx.origin)
        for p in self._pending:
            if p.tx.origin == tx.origin and intervals_overlap(tx.start, tx.end, p.tx.start, p.tx.end):
                raise DuplicateSubmission(
                    f"{tx.origin!r} already transmitting in [{p.tx.start}, {p.tx.end})"
                )
        entry = _Pending(tx=tx, origin_pos=origin.position)
        for p in self._pending:
            if intervals_overlap(tx.start, tx.end, p.tx.start, p.tx.end):
                p.collided = True
                entry.collided = True
        self._pending.append(entry)

    def step(self, until: float) -> list[Delivery]:
        """Advance time and deliver every transmission completing by `until`.

        A completed, uncollided transmission reaches every other node within
        range of where the transmitter stood at submission, each surviving an
        independent seeded loss draw. Deliveries come back sorted by time,
        ties broken by (origin, receiver).
        """
        if until < self.now:
            raise ValueError(f"step target {until} precedes channel time {self.now}")
        done = [p for p in self._pending if p.tx.end <= until]
        done.sort(key=lambda p: (p.tx.end, p.tx.origin))
        deliveries: list[Delivery] = []
        loss = self.config.random_loss_prob
        for p in done:
            if p.collided:
                continue
            for node_id in sorted(self._nodes):
                if node_id == p.tx.origin:
                    continue
                receiver = self._nodes[node_id]
                dist = haversine_m(p.origin_pos, receiver.position)
                if dist > self.config.max_range_m + _RANGE_EPS_M:
                    continue
                if loss > 0.0 and self._rng.random() < loss:
                    continue
                deliveries.append(
                    Delivery(receiver=node_id, line=p.tx.line, at=p.tx.end, origin=p.tx.origin)
                )
        self._pending = [p for p in self._pending if p.tx.end > until]
        self.now = until
        deliveries.sort(key=lambda d: (d.at, d.origin, d.receiver))
        return deliveries
