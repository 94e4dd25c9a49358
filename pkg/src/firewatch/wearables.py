"""Scenario-driven virtual helm/strap pairs generating telemetry over time.

A scenario is a JSON document scripting each unit's movement, vitals,
heading, and head-jerk instants (see ``data/demo_scenario.json`` for the
canonical example). The fleet samples those timelines by linear
interpolation (piecewise-constant for the GPS-fix flag), drains a linear
battery, and reacts to LED_RED commands delivered off the channel.

Broadcast scheduling: each device transmits once per period, phase-offset
deterministically so a quiet channel stays collision-free. Helm phase is
``id * period / (max_id + 1)``; the strap of the same unit sits half a slot
later so the two devices of one firefighter never overlap each other.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import codec
from .channel import Transmission
from .geo import GeoPoint

BATTERY_LIFE_S = 8 * 3600.0  # measured wearable endurance
JERK_SPIKE_MS2 = 35.0  # injected |accel| for one helm frame per jerk event
DEFAULT_PERIOD_S = 1.0


class SchemaError(ValueError):
    """Scenario document rejected; `path` points at the offending entry."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class LedState(str, Enum):
    OFF = "OFF"
    RED = "RED"


@dataclass(frozen=True)
class Waypoint:
    t: float
    lat: float
    lon: float
    gps_fix: bool = True


@dataclass(frozen=True)
class VitalsSample:
    t: float
    hr: int
    pulse: int
    spo2: float
    body_c: float
    ambient_c: float


@dataclass(frozen=True)
class HeadingSample:
    t: float
    yaw: float


@dataclass(frozen=True)
class BoundaryPlan:
    """A fence the commander draws at mission start."""

    name: str
    vertices: tuple[GeoPoint, ...]


@dataclass(frozen=True)
class RecallAction:
    """A scripted commander recall, fired at sim time `t`."""

    t: float
    target: int


@dataclass(frozen=True)
class UnitScript:
    id: int
    waypoints: tuple[Waypoint, ...]
    vitals: tuple[VitalsSample, ...]
    heading: tuple[HeadingSample, ...]
    jerk_events: tuple[float, ...] = ()
    helm_period_s: float = DEFAULT_PERIOD_S
    strap_period_s: float = DEFAULT_PERIOD_S


@dataclass(frozen=True)
class Scenario:
    name: str
    origin: GeoPoint
    duration_s: float
    units: tuple[UnitScript, ...]
    boundaries: tuple[BoundaryPlan, ...] = ()
    recalls: tuple[RecallAction, ...] = ()


@dataclass
class WearableState:
    id: int
    led: LedState = LedState.OFF
    battery_pct: float = 100.0
    next_helm_tx: float = 0.0
    next_strap_tx: float = 0.0
    helm_seq: int = 0
    strap_seq: int = 0


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise SchemaError(path, f"missing field {key!r}")
    return data[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {value!r}")
    return float(value)


def _geo(data, path: str) -> GeoPoint:
    if not isinstance(data, dict):
        raise SchemaError(path, f"expected an object with lat/lon, got {data!r}")
    try:
        return GeoPoint(_number(_require(data, "lat", path), f"{path}.lat"),
                        _number(_require(data, "lon", path), f"{path}.lon"))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def _check_timeline(ts: list[float], path: str) -> None:
    if not ts:
        raise SchemaError(path, "timeline must not be empty")
    if ts[0] != 0.0:
        raise SchemaError(f"{path}[0].t", f"timeline must start at t=0, got {ts[0]}")
    for i in range(1, len(ts)):
        if ts[i] <= ts[i - 1]:
            raise SchemaError(f"{path}[{i}].t", f"t must be strictly increasing, got {ts[i]} after {ts[i - 1]}")


def _parse_unit(data: dict, path: str) -> UnitScript:
    uid = _require(data, "id", path)
    if isinstance(uid, bool) or not isinstance(uid, int) or not (codec.MIN_ID <= uid <= codec.MAX_ID):
        raise SchemaError(f"{path}.id", f"id must be an integer in [{codec.MIN_ID}, {codec.MAX_ID}], got {uid!r}")

    waypoints = []
    raw = _require(data, "waypoints", path)
    for i, wp in enumerate(raw):
        p = f"{path}.waypoints[{i}]"
        lat = _number(_require(wp, "lat", p), f"{p}.lat")
        lon = _number(_require(wp, "lon", p), f"{p}.lon")
        try:
            GeoPoint(lat, lon)
        except ValueError as exc:
            raise SchemaError(p, str(exc)) from None
        fix = wp.get("gps_fix", True)
        if not isinstance(fix, bool):
            raise SchemaError(f"{p}.gps_fix", f"expected a boolean, got {fix!r}")
        waypoints.append(Waypoint(_number(_require(wp, "t", p), f"{p}.t"), lat, lon, fix))
    _check_timeline([w.t for w in waypoints], f"{path}.waypoints")

    vitals = []
    raw = _require(data, "vitals", path)
    for i, vs in enumerate(raw):
        p = f"{path}.vitals[{i}]"
        hr = _require(vs, "hr", p)
        pulse = _require(vs, "pulse", p)
        for name, value in (("hr", hr), ("pulse", pulse)):
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise SchemaError(f"{p}.{name}", f"expected a non-negative integer, got {value!r}")
        if hr > codec.HR_MAX_BPM:
            raise SchemaError(f"{p}.hr", f"hr {hr} above sensor bound {codec.HR_MAX_BPM}")
        spo2 = _number(_require(vs, "spo2", p), f"{p}.spo2")
        if not (0.0 <= spo2 <= 100.0):
            raise SchemaError(f"{p}.spo2", f"spo2 {spo2} outside [0, 100]")
        body = _number(_require(vs, "body_c", p), f"{p}.body_c")
        ambient = _number(_require(vs, "ambient_c", p), f"{p}.ambient_c")
        if not (codec.AMBIENT_MIN_C <= ambient <= codec.AMBIENT_MAX_C):
            raise SchemaError(f"{p}.ambient_c", f"ambient_c {ambient} outside thermistor range")
        vitals.append(VitalsSample(_number(_require(vs, "t", p), f"{p}.t"), hr, pulse, spo2, body, ambient))
    _check_timeline([v.t for v in vitals], f"{path}.vitals")

    heading = []
    raw = _require(data, "heading_deg", path)
    for i, hs in enumerate(raw):
        p = f"{path}.heading_deg[{i}]"
        heading.append(HeadingSample(_number(_require(hs, "t", p), f"{p}.t"),
                                     _number(_require(hs, "yaw", p), f"{p}.yaw")))
    _check_timeline([h.t for h in heading], f"{path}.heading_deg")

    jerks = []
    for i, t in enumerate(data.get("jerk_events", [])):
        t = _number(t, f"{path}.jerk_events[{i}]")
        if t < 0:
            raise SchemaError(f"{path}.jerk_events[{i}]", f"jerk time must be >= 0, got {t}")
        jerks.append(t)
    jerks.sort()

    periods = {}
    for name in ("helm_period_s", "strap_period_s"):
        value = _number(data.get(name, DEFAULT_PERIOD_S), f"{path}.{name}")
        if value <= 0:
            raise SchemaError(f"{path}.{name}", f"period must be positive, got {value}")
        periods[name] = value

    return UnitScript(
        id=uid,
        waypoints=tuple(waypoints),
        vitals=tuple(vitals),
        heading=tuple(heading),
        jerk_events=tuple(jerks),
        helm_period_s=periods["helm_period_s"],
        strap_period_s=periods["strap_period_s"],
    )


def load_scenario(source: str | Path | dict) -> Scenario:
    """Parse and validate a scenario document (path or already-parsed dict)."""
    if isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    else:
        data = source
    if not isinstance(data, dict):
        raise SchemaError("$", "scenario must be a JSON object")

    name = _require(data, "name", "$")
    if not isinstance(name, str) or not name.strip():
        raise SchemaError("$.name", "name must be a non-empty string")
    origin = _geo(_require(data, "origin", "$"), "$.origin")
    duration = _number(_require(data, "duration_s", "$"), "$.duration_s")
    if duration <= 0:
        raise SchemaError("$.duration_s", f"duration must be positive, got {duration}")

    units = []
    seen_ids: set[int] = set()
    for i, u in enumerate(_require(data, "units", "$")):
        unit = _parse_unit(u, f"$.units[{i}]")
        if unit.id in seen_ids:
            raise SchemaError(f"$.units[{i}].id", f"duplicate unit id {unit.id}")
        seen_ids.add(unit.id)
        units.append(unit)

    boundaries = []
    for i, b in enumerate(data.get("boundaries", [])):
        p = f"$.boundaries[{i}]"
        bname = _require(b, "name", p)
        if not isinstance(bname, str) or not bname.strip():
            raise SchemaError(f"{p}.name", "boundary name must be a non-empty string")
        verts = tuple(_geo(v, f"{p}.vertices[{j}]") for j, v in enumerate(_require(b, "vertices", p)))
        if len(verts) < 3:
            raise SchemaError(f"{p}.vertices", f"a boundary needs at least 3 corners, got {len(verts)}")
        boundaries.append(BoundaryPlan(name=bname, vertices=verts))

    recalls = []
    for i, r in enumerate(data.get("recalls", [])):
        p = f"$.recalls[{i}]"
        t = _number(_require(r, "t", p), f"{p}.t")
        target = _require(r, "target", p)
        if t < 0:
            raise SchemaError(f"{p}.t", f"recall time must be >= 0, got {t}")
        if isinstance(target, bool) or not isinstance(target, int):
            raise SchemaError(f"{p}.target", f"target must be an integer id, got {target!r}")
        recalls.append(RecallAction(t=t, target=target))
    recalls.sort(key=lambda r: (r.t, r.target))

    return Scenario(
        name=name,
        origin=origin,
        duration_s=duration,
        units=tuple(units),
        boundaries=tuple(boundaries),
        recalls=tuple(recalls),
    )


def _interp(ts: list[float], values: list[float], t: float) -> float:
    """Linear interpolation clamped to the timeline's ends."""
    if t <= ts[0]:
        return values[0]
    if t >= ts[-1]:
        return values[-1]
    i = bisect.bisect_right(ts, t)
    frac = (t - ts[i - 1]) / (ts[i] - ts[i - 1])
    return values[i - 1] + frac * (values[i] - values[i - 1])


def _step_value(ts: list[float], values: list, t: float):
    """Piecewise-constant sample: value of the latest entry at or before t."""
    i = bisect.bisect_right(ts, t)
    return values[max(0, i - 1)]


def helm_node_id(unit_id: int) -> str:
    return f"helm-{unit_id}"


def strap_node_id(unit_id: int) -> str:
    return f"strap-{unit_id}"


class _UnitSim:
    def __init__(self, script: UnitScript, slot_s_helm: float, slot_s_strap: float):
        self.script = script
        self._wp_ts = [w.t for w in script.waypoints]
        self._vt_ts = [v.t for v in script.vitals]
        self._hd_ts = [h.t for h in script.heading]
        self._jerk_next = 0
        self.state = WearableState(
            id=script.id,
            next_helm_tx=slot_s_helm,
            next_strap_tx=slot_s_strap,
        )

    def position_at(self, t: float) -> tuple[GeoPoint, bool]:
        lat = _interp(self._wp_ts, [w.lat for w in self.script.waypoints], t)
        lon = _interp(self._wp_ts, [w.lon for w in self.script.waypoints], t)
        fix = _step_value(self._wp_ts, [w.gps_fix for w in self.script.waypoints], t)
        return GeoPoint(lat, lon), fix

    def vitals_at(self, t: float) -> VitalsSample:
        vs = self.script.vitals
        return VitalsSample(
            t=t,
            hr=int(round(_interp(self._vt_ts, [v.hr for v in vs], t))),
            pulse=int(round(_interp(self._vt_ts, [v.pulse for v in vs], t))),
            spo2=_interp(self._vt_ts, [v.spo2 for v in vs], t),
            body_c=_interp(self._vt_ts, [v.body_c for v in vs], t),
            ambient_c=_interp(self._vt_ts, [v.ambient_c for v in vs], t),
        )

    def yaw_at(self, t: float) -> float:
        return _interp(self._hd_ts, [h.yaw for h in self.script.heading], t)

    def take_jerk(self, t: float) -> bool:
        """Consume at most one pending jerk event at or before t."""
        if self._jerk_next < len(self.script.jerk_events) and self.script.jerk_events[self._jerk_next] <= t:
            self._jerk_next += 1
            return True
        return False


class WearableFleet:
    """All simulated wearables of one scenario, driven by a single sim loop."""

    def __init__(self, scenario: Scenario, data_rate_bps: float = 50_000.0,
                 battery_life_s: float = BATTERY_LIFE_S):
        self.scenario = scenario
        self.data_rate_bps = data_rate_bps
        self.battery_life_s = battery_life_s
        max_id = max((u.id for u in scenario.units), default=0)
        self._units: dict[int, _UnitSim] = {}
        for script in scenario.units:
            # Deterministic phase stagger: one slot per id, strap half a slot
            # after its helm, so a quiet channel never self-collides.
            helm_phase = script.id * script.helm_period_s / (max_id + 1)
            strap_phase = (script.id + 0.5) * script.strap_period_s / (max_id + 1)
            self._units[script.id] = _UnitSim(script, helm_phase, strap_phase)

    @property
    def unit_ids(self) -> list[int]:
        return sorted(self._units)

    def state(self, unit_id: int) -> WearableState:
        return self._units[unit_id].state

    def battery_pct_at(self, t: float) -> float:
        return max(0.0, 100.0 * (1.0 - t / self.battery_life_s))

    def positions_at(self, t: float) -> dict[str, GeoPoint]:
        """Current position per radio node (helm and strap ride together)."""
        out: dict[str, GeoPoint] = {}
        for uid in self.unit_ids:
            pos, _fix = self._units[uid].position_at(t)
            out[helm_node_id(uid)] = pos
            out[strap_node_id(uid)] = pos
        return out

    def _helm_frame(self, sim: _UnitSim, t: float) -> codec.HelmFrame:
        pos, fix = sim.position_at(t)
        vit = sim.vitals_at(t)
        accel = (JERK_SPIKE_MS2, 0.0, 0.0) if sim.take_jerk(t) else (0.0, 0.0, 0.0)
        frame = codec.HelmFrame(
            id=sim.script.id,
            seq=sim.state.helm_seq,
            gps_fix=fix,
            lat=pos.lat,
            lon=pos.lon,
            ambient_c=vit.ambient_c,
            yaw=sim.yaw_at(t),
            pitch=0.0,
            roll=0.0,
            lin_accel=accel,
        )
        sim.state.helm_seq += 1
        return frame

    def _strap_frame(self, sim: _UnitSim, t: float) -> codec.StrapFrame:
        vit = sim.vitals_at(t)
        frame = codec.StrapFrame(
            id=sim.script.id,
            seq=sim.state.strap_seq,
            hr_bpm=vit.hr,
            pulse_bpm=vit.pulse,
            spo2_pct=vit.spo2,
            body_c=vit.body_c,
        )
        sim.state.strap_seq += 1
        return frame

    def tick(self, now: float) -> list[Transmission]:
        """Emit every transmission due by `now` (and before scenario end).

        Frames are sampled at their scheduled transmit times, so the result
        does not depend on how coarsely the driver ticks. A dead battery
        silences the unit permanently.
        """
        out: list[Transmission] = []
        cutoff = self.scenario.duration_s
        for uid in self.unit_ids:
            sim = self._units[uid]
            state = sim.state
            state.battery_pct = self.battery_pct_at(min(now, self.battery_life_s))
            while state.next_helm_tx <= now and state.next_helm_tx < cutoff:
                t = state.next_helm_tx
                if self.battery_pct_at(t) <= 0.0:
                    break
                line = codec.encode(self._helm_frame(sim, t))
                out.append(Transmission(origin=helm_node_id(uid), line=line, start=t,
                                        airtime=codec.airtime(line, self.data_rate_bps)))
                state.next_helm_tx += sim.script.helm_period_s
            while state.next_strap_tx <= now and state.next_strap_tx < cutoff:
                t = state.next_strap_tx
                if self.battery_pct_at(t) <= 0.0:
                    break
                line = codec.encode(self._strap_frame(sim, t))
                out.append(Transmission(origin=strap_node_id(uid), line=line, start=t,
                                        airtime=codec.airtime(line, self.data_rate_bps)))
                state.next_strap_tx += sim.script.strap_period_s
        out.sort(key=lambda tx: (tx.start, tx.origin))
        return out

    def deliver_command(self, cmd: codec.CommandFrame) -> None:
        """Apply a downlink command on first delivery; no ACK, idempotent."""
        sim = self._units.get(cmd.target)
        if sim is not None and cmd.command is codec.Command.LED_RED:
            sim.state.led = LedState.RED
