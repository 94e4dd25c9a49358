"""Mission-control backend: frame ingestion, unit pairing, alerting, logging.

One writer (the simulation loop or the serial reader) pushes frames and time
through :class:`MissionService`; any number of readers take point-in-time
snapshots. Every ingested line, valid or not, lands in the append-only
JSON-lines journal, which replays deterministically: re-ingesting a
journal's FRAME records over the same tick grid regenerates its ALERT and
GEOFENCE records byte for byte.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from . import codec, geofence, vitals
from .channel import ChannelConfig
from .geo import GeoPoint

LED_GRACE_S = 2.0  # PENDING holds for command airtime plus this, then RED
LOG_FORMAT = 1
RECENT_EVENT_KINDS = ("ALERT", "GEOFENCE", "COMMAND")
RECENT_EVENT_LIMIT = 50


class UnknownUnit(KeyError):
    pass


class LedState(str, Enum):
    OFF = "OFF"
    PENDING = "PENDING"
    RED = "RED"


class LogKind(str, Enum):
    FRAME = "FRAME"
    ALERT = "ALERT"
    GEOFENCE = "GEOFENCE"
    COMMAND = "COMMAND"
    DECODE_ERROR = "DECODE_ERROR"
    BOUNDARY_CHANGE = "BOUNDARY_CHANGE"


@dataclass(frozen=True)
class LogRecord:
    at: float
    kind: LogKind
    payload: dict

    def to_dict(self) -> dict:
        return {"at": self.at, "kind": self.kind.value, "payload": self.payload}

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "LogRecord":
        return cls(at=data["at"], kind=LogKind(data["kind"]), payload=data["payload"])


@dataclass(frozen=True)
class IncidentConfig:
    address: str = ""
    origin: GeoPoint = GeoPoint(0.0, 0.0)
    roster: tuple[int, ...] = ()
    thresholds: vitals.Thresholds = field(default_factory=vitals.Thresholds)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    tick_s: float = 0.25
    mode: str = "sim"  # "sim" | "line"

    def __post_init__(self) -> None:
        if len(set(self.roster)) != len(self.roster):
            raise ValueError("roster ids must be unique")
        if self.tick_s <= 0:
            raise ValueError("tick_s must be positive")
        if self.mode not in ("sim", "line"):
            raise ValueError(f"mode must be 'sim' or 'line', got {self.mode!r}")

    def to_dict(self) -> dict:
        return {
            "address": self.address,
            "origin": self.origin.to_dict(),
            "roster": list(self.roster),
            "thresholds": self.thresholds.to_dict(),
            "channel": self.channel.to_dict(),
            "tick_s": self.tick_s,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IncidentConfig":
        kwargs = {}
        if "address" in data:
            kwargs["address"] = data["address"]
        if "origin" in data:
            kwargs["origin"] = GeoPoint(data["origin"]["lat"], data["origin"]["lon"])
        if "roster" in data:
            kwargs["roster"] = tuple(data["roster"])
        if "thresholds" in data:
            kwargs["thresholds"] = vitals.Thresholds.from_dict(data["thresholds"])
        if "channel" in data:
            kwargs["channel"] = ChannelConfig.from_dict(data["channel"])
        if "tick_s" in data:
            kwargs["tick_s"] = data["tick_s"]
        if "mode" in data:
            kwargs["mode"] = data["mode"]
        return cls(**kwargs)


@dataclass
class UnitState:
    """The merged live picture of one firefighter."""

    id: int
    registered: bool = True
    position: GeoPoint | None = None
    gps_fix: bool = False
    last_fix_at: float | None = None
    heading_deg: float | None = None
    ambient_c: float | None = None
    hr_bpm: int | None = None
    pulse_bpm: int | None = None
    spo2_pct: float | None = None
    body_c: float | None = None
    stress: vitals.StressBreakdown = vitals.ZERO_STRESS
    battery_pct: float | None = None  # simulator metadata side channel
    led: LedState = LedState.OFF
    led_pending_until: float | None = None
    active_alerts: frozenset[vitals.AlertKind] = frozenset()
    offline: bool = False
    helm_last_seen: float | None = None
    strap_last_seen: float | None = None
    helm_seq: int = -1
    strap_seq: int = -1
    helm_rx: int = 0
    strap_rx: int = 0

    @property
    def helm_loss(self) -> float:
        return 0.0 if self.helm_seq < 0 else 1.0 - self.helm_rx / (self.helm_seq + 1)

    @property
    def strap_loss(self) -> float:
        return 0.0 if self.strap_seq < 0 else 1.0 - self.strap_rx / (self.strap_seq + 1)

    @property
    def loss_estimate(self) -> float:
        expected = (self.helm_seq + 1 if self.helm_seq >= 0 else 0) + (
            self.strap_seq + 1 if self.strap_seq >= 0 else 0
        )
        if expected == 0:
            return 0.0
        return 1.0 - (self.helm_rx + self.strap_rx) / expected

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "registered": self.registered,
            "position": self.position.to_dict() if self.position else None,
            "gps_fix": self.gps_fix,
            "last_fix_at": self.last_fix_at,
            "heading_deg": self.heading_deg,
            "ambient_c": self.ambient_c,
            "hr_bpm": self.hr_bpm,
            "pulse_bpm": self.pulse_bpm,
            "spo2_pct": self.spo2_pct,
            "body_c": self.body_c,
            "stress": self.stress.to_dict(),
            "battery_pct": self.battery_pct,
            "led": self.led.value,
            "active_alerts": sorted(k.value for k in self.active_alerts),
            "offline": self.offline,
            "helm_last_seen": self.helm_last_seen,
            "strap_last_seen": self.strap_last_seen,
            "helm_seq": self.helm_seq,
            "strap_seq": self.strap_seq,
            "helm_rx": self.helm_rx,
            "strap_rx": self.strap_rx,
            "helm_loss": self.helm_loss,
            "strap_loss": self.strap_loss,
            "loss_estimate": self.loss_estimate,
        }


class LogWriter:
    """Append-only JSON-lines journal with a leading run manifest line."""

    def __init__(self, path: str | Path, manifest: dict):
        self.path = Path(path)
        self._fh = self.path.open("w", encoding="utf-8")
        self._fh.write(json.dumps({"manifest": manifest}, sort_keys=True) + "\n")

    def append(self, record: LogRecord) -> None:
        self._fh.write(record.to_line() + "\n")

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_log(path: str | Path) -> tuple[dict | None, list[LogRecord]]:
    """Load a journal: (manifest or None, records in file order)."""
    manifest = None
    records: list[LogRecord] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "manifest" in data:
                manifest = data["manifest"]
            else:
                records.append(LogRecord.from_dict(data))
    return manifest, records


# Sent to the channel driver: (wire line, sim time, airtime seconds).
CommandSink = Callable[[str, float, float], None]


class MissionService:
    """Pairs helm/strap streams into unit state and runs the alerting stack."""

    def __init__(
        self,
        config: IncidentConfig | None = None,
        *,
        writer: LogWriter | None = None,
        command_sink: CommandSink | None = None,
    ):
        self.config = config or IncidentConfig()
        self._writer = writer
        self._command_sink = command_sink
        self._lock = threading.RLock()
        self._now = 0.0
        self._units: dict[int, UnitState] = {
            uid: UnitState(id=uid) for uid in self.config.roster
        }
        self._boundaries: dict[str, geofence.Boundary] = {}
        self._membership: geofence.Membership = {}
        self._boundary_counter = 0
        self._records: list[LogRecord] = []
        self._subscribers: list[Callable[[dict], None]] = []

    # -- log + stream plumbing -------------------------------------------

    @property
    def now(self) -> float:
        return self._now

    def records(self) -> list[LogRecord]:
        with self._lock:
            return list(self._records)

    def log_since(self, since: int) -> tuple[list[dict], int]:
        with self._lock:
            if since < 0:
                since = 0
            return [r.to_dict() for r in self._records[since:]], len(self._records)

    def subscribe(self, callback: Callable[[dict], None]) -> None:
        with self._lock:
            self._subscribers.append(callback)

    def unsubscribe(self, callback: Callable[[dict], None]) -> None:
        with self._lock:
            if callback in self._subscribers:
                self._subscribers.remove(callback)

    def _publish(self, message: dict) -> None:
        for callback in list(self._subscribers):
            try:
                callback(message)
            except Exception:
                self._subscribers.remove(callback)

    def _append(self, at: float, kind: LogKind, payload: dict) -> LogRecord:
        record = LogRecord(at=at, kind=kind, payload=payload)
        self._records.append(record)
        if self._writer is not None:
            self._writer.append(record)
        return record

    def _publish_unit(self, unit: UnitState) -> None:
        self._publish({"type": "unit-update", "at": self._now, "unit": unit.to_dict()})

    # -- ingestion --------------------------------------------------------

    def ingest(self, line: str | bytes, at: float) -> list[LogRecord]:
        """Process one delivered wire line at sim time `at`.

        Never raises on bad input; everything becomes a journal record.
        Returns the records appended by this call.
        """
        if isinstance(line, (bytes, bytearray)):
            line = bytes(line).decode("latin-1")
        with self._lock:
            start = len(self._records)
            self._now = max(self._now, at)
            try:
                frame = codec.decode(line)
            except (codec.MalformedFrame, codec.RangeViolation) as exc:
                self._append(at, LogKind.DECODE_ERROR,
                             {"line": line, "error": type(exc).__name__, "reason": exc.reason})
                return self._records[start:]
            if isinstance(frame, codec.CommandFrame):
                # Downlink echo heard on the uplink; record it, change nothing.
                self._append(at, LogKind.FRAME,
                             {"line": line, "frame": "command", "unit": frame.target})
                return self._records[start:]
            self._ingest_telemetry(frame, line, at)
            return self._records[start:]

    def _ingest_telemetry(self, frame: codec.HelmFrame | codec.StrapFrame, line: str, at: float) -> None:
        th = self.config.thresholds
        unit = self._units.get(frame.id)
        created = unit is None
        if created:
            # Unknown ids become live units: better to show an unregistered
            # firefighter than to hide one.
            unit = UnitState(id=frame.id, registered=False)
            self._units[frame.id] = unit

        is_helm = isinstance(frame, codec.HelmFrame)
        device = "helm" if is_helm else "strap"
        last_seq = unit.helm_seq if is_helm else unit.strap_seq
        payload = {"line": line, "frame": device, "unit": frame.id, "seq": frame.seq}
        if created and not unit.registered:
            payload["unregistered"] = True
        if frame.seq <= last_seq:
            payload["dropped"] = "stale-seq"
            self._append(at, LogKind.FRAME, payload)
            return
        self._append(at, LogKind.FRAME, payload)

        if unit.offline:
            unit.offline = False
            unit.active_alerts = unit.active_alerts - {vitals.AlertKind.OFFLINE}
            seen = [t for t in (unit.helm_last_seen, unit.strap_last_seen) if t is not None]
            gap = at - max(seen) if seen else 0.0
            event = vitals.AlertEvent(unit=frame.id, kind=vitals.AlertKind.BACK_ONLINE, at=at, value=gap)
            self._append(at, LogKind.ALERT, event.to_dict())
            self._publish({"type": "alert", "at": at, "event": event.to_dict()})

        fence_position: GeoPoint | None = None
        run_fence = False
        if is_helm:
            unit.helm_seq = frame.seq
            unit.helm_rx += 1
            unit.helm_last_seen = at
            unit.heading_deg = vitals.heading_from_yaw(frame.yaw)
            unit.ambient_c = frame.ambient_c
            unit.gps_fix = frame.gps_fix
            unit.position = GeoPoint(frame.lat, frame.lon)
            if frame.gps_fix:
                unit.last_fix_at = at
                fence_position = unit.position
            run_fence = True
            readings = vitals.Readings(ambient_c=frame.ambient_c, lin_accel=frame.lin_accel)
        else:
            unit.strap_seq = frame.seq
            unit.strap_rx += 1
            unit.strap_last_seen = at
            unit.hr_bpm = frame.hr_bpm
            unit.pulse_bpm = frame.pulse_bpm
            unit.spo2_pct = frame.spo2_pct
            unit.body_c = frame.body_c
            unit.stress = vitals.compute_stress(frame.hr_bpm, frame.spo2_pct, frame.body_c, th)
            readings = vitals.Readings(hr_bpm=frame.hr_bpm, spo2_pct=frame.spo2_pct, body_c=frame.body_c)

        base_active = unit.active_alerts - {vitals.AlertKind.OFFLINE}
        events, new_active = vitals.evaluate(base_active, readings, th, unit=frame.id, at=at)
        unit.active_alerts = new_active
        for event in events:
            self._append(at, LogKind.ALERT, event.to_dict())
            self._publish({"type": "alert", "at": at, "event": event.to_dict()})

        if run_fence:
            fence_events, self._membership = geofence.update(
                {frame.id: fence_position}, self._membership, self._boundaries, at
            )
            for fe in fence_events:
                detail = fe.to_dict()
                detail["boundary_name"] = self._boundaries[fe.boundary_id].name
                self._append(at, LogKind.GEOFENCE, detail)
                self._publish({"type": "geofence-event", "at": at, "event": detail})

        self._publish_unit(unit)

    # -- time-driven checks ------------------------------------------------

    def advance(self, now: float) -> list[LogRecord]:
        """Liveness and LED bookkeeping at a tick; safe to call repeatedly."""
        with self._lock:
            start = len(self._records)
            if now < self._now:
                now = self._now
            self._now = now
            th = self.config.thresholds
            for uid in sorted(self._units):
                unit = self._units[uid]
                if (
                    unit.led is LedState.PENDING
                    and unit.led_pending_until is not None
                    and now >= unit.led_pending_until
                ):
                    # No ACK exists on the downlink; flip optimistically and
                    # record that the delivery is unconfirmed.
                    unit.led = LedState.RED
                    unit.led_pending_until = None
                    detail = {"unit": uid, "command": codec.Command.LED_RED.value,
                              "status": "assumed-delivered", "confirmed": False}
                    self._append(now, LogKind.COMMAND, detail)
                    self._publish({"type": "command", "at": now, **detail})
                    self._publish_unit(unit)
                seen = [t for t in (unit.helm_last_seen, unit.strap_last_seen) if t is not None]
                if not seen:
                    continue
                helm_stale = unit.helm_last_seen is None or now - unit.helm_last_seen > th.stale_after_s
                strap_stale = unit.strap_last_seen is None or now - unit.strap_last_seen > th.stale_after_s
                if helm_stale and strap_stale and not unit.offline:
                    unit.offline = True
                    unit.active_alerts = unit.active_alerts | {vitals.AlertKind.OFFLINE}
                    event = vitals.AlertEvent(unit=uid, kind=vitals.AlertKind.OFFLINE,
                                              at=now, value=now - max(seen))
                    self._append(now, LogKind.ALERT, event.to_dict())
                    self._publish({"type": "alert", "at": now, "event": event.to_dict()})
                    self._publish_unit(unit)
            return self._records[start:]

    def set_battery(self, unit_id: int, battery_pct: float) -> None:
        """Simulator metadata injection; display only, never journaled."""
        with self._lock:
            unit = self._units.get(unit_id)
            if unit is None:
                return
            changed = unit.battery_pct is None or round(unit.battery_pct) != round(battery_pct)
            unit.battery_pct = battery_pct
            if changed:
                self._publish_unit(unit)

    # -- commands ----------------------------------------------------------

    def send_recall(self, unit_id: int, at: float | None = None) -> codec.CommandFrame:
        """Encode and dispatch a LED_RED recall addressed to one unit."""
        with self._lock:
            unit = self._units.get(unit_id)
            if unit is None:
                raise UnknownUnit(unit_id)
            when = self._now if at is None else max(at, self._now)
            self._now = when
            frame = codec.CommandFrame(target=unit_id)
            line = codec.encode(frame)
            on_air = codec.airtime(line, self.config.channel.data_rate_bps)
            if self._command_sink is not None:
                self._command_sink(line, when, on_air)
            unit.led = LedState.PENDING
            unit.led_pending_until = when + on_air + LED_GRACE_S
            detail = {"unit": unit_id, "command": frame.command.value, "status": "sent", "line": line}
            self._append(when, LogKind.COMMAND, detail)
            self._publish({"type": "command", "at": when, **detail})
            self._publish_unit(unit)
            return frame

    # -- boundaries ----------------------------------------------------------

    def create_boundary(self, draft: geofence.DraftBoundary) -> geofence.Boundary:
        """Finalize a draft; raises DraftRejected exactly like draw mode."""
        with self._lock:
            self._boundary_counter += 1
            boundary_id = f"b{self._boundary_counter}"
            boundary = geofence.finalize(draft, boundary_id)
            return self._install_boundary(boundary)

    def _install_boundary(self, boundary: geofence.Boundary) -> geofence.Boundary:
        self._boundaries[boundary.boundary_id] = boundary
        self._append(self._now, LogKind.BOUNDARY_CHANGE,
                     {"action": "created", **boundary.to_dict()})
        return boundary

    def delete_boundary(self, boundary_id: str) -> None:
        with self._lock:
            if boundary_id not in self._boundaries:
                raise KeyError(boundary_id)
            del self._boundaries[boundary_id]
            self._membership = {
                key: value for key, value in self._membership.items() if key[1] != boundary_id
            }
            self._append(self._now, LogKind.BOUNDARY_CHANGE,
                         {"action": "deleted", "boundary_id": boundary_id})

    def boundaries(self) -> list[geofence.Boundary]:
        with self._lock:
            return [self._boundaries[k] for k in sorted(self._boundaries)]

    # -- views --------------------------------------------------------------

    def unit(self, unit_id: int) -> dict:
        with self._lock:
            unit = self._units.get(unit_id)
            if unit is None:
                raise UnknownUnit(unit_id)
            return unit.to_dict()

    def snapshot(self) -> dict:
        """Consistent view of all units, boundaries, and recent events."""
        with self._lock:
            recent = [
                r.to_dict()
                for r in self._records
                if r.kind.value in RECENT_EVENT_KINDS
            ][-RECENT_EVENT_LIMIT:]
            return {
                "at": self._now,
                "units": [self._units[uid].to_dict() for uid in sorted(self._units)],
                "boundaries": [b.to_dict() for b in self.boundaries()],
                "recent_events": recent,
            }


# -- replay -------------------------------------------------------------


@dataclass
class ReplayResult:
    manifest: dict | None
    original: list[LogRecord]
    replayed: list[LogRecord]
    service: MissionService

    @staticmethod
    def timeline(records: Iterable[LogRecord]) -> list[str]:
        """Canonical ALERT/GEOFENCE lines used for byte-exact comparison."""
        return [
            r.to_line()
            for r in records
            if r.kind in (LogKind.ALERT, LogKind.GEOFENCE)
        ]

    @property
    def matches(self) -> bool:
        return self.timeline(self.original) == self.timeline(self.replayed)


def tick_grid(duration: float, tick_s: float) -> list[float]:
    """The deterministic sim-time grid a run advances on; replay reuses it."""
    n = max(1, math.ceil(duration / tick_s))
    grid = [k * tick_s for k in range(n + 1)]
    if grid[-1] > duration:
        grid[-1] = duration
    elif grid[-1] < duration:
        grid.append(duration)
    return grid


def replay_log(path: str | Path) -> ReplayResult:
    """Re-ingest a journal's frames over its original tick grid.

    Boundary changes are re-applied, commands skipped (they do not shape the
    alert/geofence timeline), and liveness checks re-run on the same grid so
    time-driven OFFLINE alerts land on identical timestamps.
    """
    manifest, original = read_log(path)
    if manifest is not None and "config" in manifest:
        config = IncidentConfig.from_dict(manifest["config"])
    else:
        config = IncidentConfig()
    service = MissionService(config)

    tick_s = manifest.get("tick_s", config.tick_s) if manifest else config.tick_s
    duration = manifest.get("duration_s") if manifest else None
    if duration is None:
        duration = max((r.at for r in original), default=0.0)
    grid = tick_grid(duration, tick_s)

    pending = list(original)
    idx = 0
    for gt in grid:
        while idx < len(pending) and pending[idx].at <= gt:
            record = pending[idx]
            idx += 1
            if record.kind in (LogKind.FRAME, LogKind.DECODE_ERROR):
                service.ingest(record.payload["line"], record.at)
            elif record.kind is LogKind.BOUNDARY_CHANGE:
                _apply_boundary_record(service, record)
        service.advance(gt)
    # Anything after the last grid point (defensive; a well-formed log has none).
    while idx < len(pending):
        record = pending[idx]
        idx += 1
        if record.kind in (LogKind.FRAME, LogKind.DECODE_ERROR):
            service.ingest(record.payload["line"], record.at)
        elif record.kind is LogKind.BOUNDARY_CHANGE:
            _apply_boundary_record(service, record)

    return ReplayResult(manifest=manifest, original=original,
                        replayed=service.records(), service=service)


def _apply_boundary_record(service: MissionService, record: LogRecord) -> None:
    payload = record.payload
    if payload["action"] == "created":
        boundary = geofence.Boundary(
            boundary_id=payload["boundary_id"],
            name=payload["name"],
            vertices=tuple(GeoPoint(v["lat"], v["lon"]) for v in payload["vertices"]),
        )
        with service._lock:
            service._now = max(service._now, record.at)
            service._boundary_counter += 1
            service._install_boundary(boundary)
    elif payload["action"] == "deleted":
        with service._lock:
            service._now = max(service._now, record.at)
            service.delete_boundary(payload["boundary_id"])
