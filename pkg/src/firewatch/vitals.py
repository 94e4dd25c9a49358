"""Stress scoring, threshold alerting, jerk detection, heading, staleness.

All functions here are pure; :func:`evaluate` threads alert state through
its arguments so callers own persistence. Alerts are edge-triggered: an
event fires on the crossing, stays silent while the condition holds, and
re-arms only after the reading clears past a one-unit hysteresis band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import AbstractSet, Iterable

# Compressed-breathing-air regulations bound supply oxygen to this window.
# No supply-air sensor exists on either wearable, so these are informational
# constants only; SpO2 alerting below uses the blood-oxygen threshold.
BREATHING_AIR_O2_MIN_PCT = 19.5
BREATHING_AIR_O2_MAX_PCT = 23.5

# Age-based maximum heart rate rule of thumb (this base minus age in years).
# Wearables carry no age, hence the fixed conservative hr_high_bpm default.
AGE_MAX_HR_BASE_BPM = 220


class AlertKind(str, Enum):
    HIGH_HR = "HIGH_HR"
    LOW_SPO2 = "LOW_SPO2"
    BODY_TEMP_WARN = "BODY_TEMP_WARN"
    BODY_TEMP_CRIT = "BODY_TEMP_CRIT"
    AMBIENT_WARN = "AMBIENT_WARN"
    AMBIENT_CRIT = "AMBIENT_CRIT"
    JERK = "JERK"
    OFFLINE = "OFFLINE"
    BACK_ONLINE = "BACK_ONLINE"


class Liveness(str, Enum):
    LIVE = "LIVE"
    OFFLINE = "OFFLINE"


@dataclass(frozen=True)
class Thresholds:
    """Alerting and stress-ramp anchors. Every field is configurable."""

    hr_high_bpm: float = 150.0
    hr_ramp_start_bpm: float = 100.0
    spo2_low_pct: float = 95.0
    spo2_ramp_floor_pct: float = 85.0
    body_warn_c: float = 38.0
    body_crit_c: float = 40.0
    ambient_warn_c: float = 60.0
    ambient_crit_c: float = 120.0
    jerk_accel_ms2: float = 29.4
    stale_after_s: float = 10.0

    def __post_init__(self) -> None:
        if self.hr_ramp_start_bpm >= self.hr_high_bpm:
            raise ValueError("hr_ramp_start_bpm must be below hr_high_bpm")
        if self.spo2_ramp_floor_pct >= self.spo2_low_pct:
            raise ValueError("spo2_ramp_floor_pct must be below spo2_low_pct")
        if self.body_warn_c >= self.body_crit_c:
            raise ValueError("body_warn_c must be below body_crit_c")
        if self.ambient_warn_c >= self.ambient_crit_c:
            raise ValueError("ambient_warn_c must be below ambient_crit_c")
        if self.jerk_accel_ms2 <= 0:
            raise ValueError("jerk_accel_ms2 must be positive")
        if self.stale_after_s <= 0:
            raise ValueError("stale_after_s must be positive")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "Thresholds":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown threshold fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class StressBreakdown:
    """0-100 stress score split into its heart-rate, SpO2, and body-temp parts."""

    hr_component: float
    spo2_component: float
    temp_component: float
    total: float

    def to_dict(self) -> dict:
        return {
            "hr_component": self.hr_component,
            "spo2_component": self.spo2_component,
            "temp_component": self.temp_component,
            "total": self.total,
        }


ZERO_STRESS = StressBreakdown(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class AlertEvent:
    unit: int
    kind: AlertKind
    at: float
    value: float

    def to_dict(self) -> dict:
        return {"unit": self.unit, "kind": self.kind.value, "at": self.at, "value": self.value}


@dataclass(frozen=True)
class Readings:
    """Values extracted from one frame; leave fields None when absent."""

    hr_bpm: float | None = None
    spo2_pct: float | None = None
    body_c: float | None = None
    ambient_c: float | None = None
    lin_accel: tuple[float, float, float] | None = None


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def compute_stress(hr_bpm: float, spo2_pct: float, body_c: float, th: Thresholds) -> StressBreakdown:
    """Linear-ramp stress score: 40 points HR, 30 SpO2, 30 body temperature.

    Each component ramps from 0 at its rest anchor to full weight at its
    danger anchor and clamps outside; the total therefore sits in [0, 100].
    """
    hr = 40.0 * _clamp01((hr_bpm - th.hr_ramp_start_bpm) / (th.hr_high_bpm - th.hr_ramp_start_bpm))
    spo2 = 30.0 * _clamp01((th.spo2_low_pct - spo2_pct) / (th.spo2_low_pct - th.spo2_ramp_floor_pct))
    temp = 30.0 * _clamp01((body_c - th.body_warn_c) / (th.body_crit_c - th.body_warn_c))
    return StressBreakdown(hr, spo2, temp, hr + spo2 + temp)


def accel_magnitude(lin_accel: Iterable[float]) -> float:
    x, y, z = lin_accel
    return math.sqrt(x * x + y * y + z * z)


def detect_jerk(lin_accel: Iterable[float], th: Thresholds) -> bool:
    """True when the gravity-removed acceleration magnitude crosses the jerk bound."""
    return accel_magnitude(lin_accel) >= th.jerk_accel_ms2


def heading_from_yaw(yaw: float) -> float:
    """Normalize any yaw into a compass heading in [0, 360); 0 north, 90 east."""
    h = yaw % 360.0
    return h if h < 360.0 else 0.0


def staleness(last_seen: float, now: float, th: Thresholds) -> Liveness:
    if now < last_seen:
        raise ValueError(f"now {now} precedes last_seen {last_seen}")
    return Liveness.OFFLINE if now - last_seen > th.stale_after_s else Liveness.LIVE


# (kind, reading getter, threshold getter, sense). "high" alerts activate at
# reading >= bound and clear below bound - 1; "low" activate at reading <
# bound and clear at >= bound + 1. The band in between holds previous state.
_RULES = (
    (AlertKind.HIGH_HR, lambda r: r.hr_bpm, lambda t: t.hr_high_bpm, "high"),
    (AlertKind.LOW_SPO2, lambda r: r.spo2_pct, lambda t: t.spo2_low_pct, "low"),
    (AlertKind.BODY_TEMP_WARN, lambda r: r.body_c, lambda t: t.body_warn_c, "high"),
    (AlertKind.BODY_TEMP_CRIT, lambda r: r.body_c, lambda t: t.body_crit_c, "high"),
    (AlertKind.AMBIENT_WARN, lambda r: r.ambient_c, lambda t: t.ambient_warn_c, "high"),
    (AlertKind.AMBIENT_CRIT, lambda r: r.ambient_c, lambda t: t.ambient_crit_c, "high"),
    (
        AlertKind.JERK,
        lambda r: None if r.lin_accel is None else accel_magnitude(r.lin_accel),
        lambda t: t.jerk_accel_ms2,
        "high",
    ),
)

HYSTERESIS = 1.0


def evaluate(
    active: AbstractSet[AlertKind],
    readings: Readings,
    th: Thresholds,
    *,
    unit: int,
    at: float,
) -> tuple[list[AlertEvent], frozenset[AlertKind]]:
    """Edge-triggered threshold pass over one frame's readings.

    Returns the events raised by this sample plus the updated active set.
    Kinds whose reading is absent keep their previous activation unchanged.
    """
    events: list[AlertEvent] = []
    new_active = set(active)
    for kind, get_value, get_bound, sense in _RULES:
        value = get_value(readings)
        if value is None:
            continue
        bound = get_bound(th)
        if sense == "high":
            on = value >= bound
            off = value < bound - HYSTERESIS
        else:
            on = value < bound
            off = value >= bound + HYSTERESIS
        was = kind in new_active
        if not was and on:
            new_active.add(kind)
            events.append(AlertEvent(unit=unit, kind=kind, at=at, value=float(value)))
        elif was and off:
            new_active.discard(kind)
    return events, frozenset(new_active)
