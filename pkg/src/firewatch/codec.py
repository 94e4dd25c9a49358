"""Wire codec for wearable telemetry and downlink command frames.

Every message on the radio is a single ASCII CSV line:

    helm:    H,<id>,<seq>,<gps_fix:0|1>,<lat>,<lon>,<ambient_c>,<yaw>,<pitch>,<roll>,<ax>,<ay>,<az>
    strap:   S,<id>,<seq>,<hr>,<pulse>,<spo2>,<body_c>
    command: C,<id>,LED_RED

Coordinates carry six decimal places (~0.1 m on the ground); temperatures,
angles, and accelerations two; SpO2 one. Frame types quantize their fields
to the same precision on construction, so ``decode(encode(f)) == f`` holds
exactly for every valid frame.

Example:
    >>> from firewatch.codec import StrapFrame, encode, decode
    >>> line = encode(StrapFrame(id=1, seq=5, hr_bpm=150, pulse_bpm=150,
    ...                          spo2_pct=96.0, body_c=37.0))
    >>> line
    'S,1,5,150,150,96.0,37.00'
    >>> decode(line).hr_bpm
    150
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

MIN_ID = 0
MAX_ID = 9999

# Ambient thermistor operating range, degrees Celsius.
AMBIENT_MIN_C = -50.0
AMBIENT_MAX_C = 350.0

# Heart-rate sensor sanity ceiling, bpm.
HR_MAX_BPM = 300

TAG_HELM = "H"
TAG_STRAP = "S"
TAG_COMMAND = "C"


class Command(str, Enum):
    LED_RED = "LED_RED"


class MalformedFrame(ValueError):
    """Line cannot be parsed: unknown tag, wrong field count, or bad number."""

    def __init__(self, line: str, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"{reason}: {line!r}")


class RangeViolation(ValueError):
    """Line parses but a field violates the frame's declared bounds."""

    def __init__(self, line: str, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"{reason}: {line!r}")


def _check_id(value: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"firefighter id must be an integer, got {value!r}")
    if not (MIN_ID <= value <= MAX_ID):
        raise ValueError(f"firefighter id {value} outside [{MIN_ID}, {MAX_ID}]")
    return value


def _check_int(value: int, name: str, lo: int = 0, hi: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < lo or (hi is not None and value > hi):
        bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise ValueError(f"{name} {value} outside {bound}")
    return value


def _check_float(value: float, name: str, lo: float | None = None, hi: float | None = None) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ValueError(f"{name} {value} outside [{lo}, {hi}]")
    return value


@dataclass(frozen=True)
class HelmFrame:
    """Helmet unit telemetry: position, ambient heat, orientation, motion.

    When ``gps_fix`` is false, ``lat``/``lon`` carry the last known fix and
    consumers must treat the position as stale.
    """

    id: int
    seq: int
    gps_fix: bool
    lat: float
    lon: float
    ambient_c: float
    yaw: float
    pitch: float
    roll: float
    lin_accel: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        _check_id(self.id)
        _check_int(self.seq, "seq")
        object.__setattr__(self, "gps_fix", bool(self.gps_fix))
        object.__setattr__(self, "lat", round(_check_float(self.lat, "lat", -90.0, 90.0), 6))
        object.__setattr__(self, "lon", round(_check_float(self.lon, "lon", -180.0, 180.0), 6))
        object.__setattr__(
            self, "ambient_c", round(_check_float(self.ambient_c, "ambient_c", AMBIENT_MIN_C, AMBIENT_MAX_C), 2)
        )
        # Yaw normalizes into [0, 360); quantizing 359.999 rounds to 360.00,
        # which must wrap back to 0.00 to stay in range.
        yaw = round(_check_float(self.yaw, "yaw") % 360.0, 2) % 360.0
        object.__setattr__(self, "yaw", yaw)
        object.__setattr__(self, "pitch", round(_check_float(self.pitch, "pitch", -90.0, 90.0), 2))
        object.__setattr__(self, "roll", round(_check_float(self.roll, "roll", -180.0, 180.0), 2))
        accel = tuple(self.lin_accel)
        if len(accel) != 3:
            raise ValueError(f"lin_accel must have 3 components, got {len(accel)}")
        object.__setattr__(
            self, "lin_accel", tuple(round(_check_float(v, "lin_accel"), 2) for v in accel)
        )


@dataclass(frozen=True)
class StrapFrame:
    """Arm strap telemetry: heart rate, pulse, oxygen saturation, body temperature."""

    id: int
    seq: int
    hr_bpm: int
    pulse_bpm: int
    spo2_pct: float
    body_c: float

    def __post_init__(self) -> None:
        _check_id(self.id)
        _check_int(self.seq, "seq")
        _check_int(self.hr_bpm, "hr_bpm", 0, HR_MAX_BPM)
        _check_int(self.pulse_bpm, "pulse_bpm", 0)
        object.__setattr__(self, "spo2_pct", round(_check_float(self.spo2_pct, "spo2_pct", 0.0, 100.0), 1))
        object.__setattr__(self, "body_c", round(_check_float(self.body_c, "body_c"), 2))


@dataclass(frozen=True)
class CommandFrame:
    """Downlink order addressed to one firefighter. Only LED_RED exists."""

    target: int
    command: Command = Command.LED_RED

    def __post_init__(self) -> None:
        _check_id(self.target)
        if not isinstance(self.command, Command):
            object.__setattr__(self, "command", Command(self.command))


Frame = HelmFrame | StrapFrame | CommandFrame


def encode(frame: Frame) -> str:
    """Render a frame as its canonical wire line (no trailing newline)."""
    if isinstance(frame, HelmFrame):
        a = frame.lin_accel
        return (
            f"{TAG_HELM},{frame.id},{frame.seq},{1 if frame.gps_fix else 0},"
            f"{frame.lat:.6f},{frame.lon:.6f},{frame.ambient_c:.2f},"
            f"{frame.yaw:.2f},{frame.pitch:.2f},{frame.roll:.2f},"
            f"{a[0]:.2f},{a[1]:.2f},{a[2]:.2f}"
        )
    if isinstance(frame, StrapFrame):
        return (
            f"{TAG_STRAP},{frame.id},{frame.seq},{frame.hr_bpm},{frame.pulse_bpm},"
            f"{frame.spo2_pct:.1f},{frame.body_c:.2f}"
        )
    if isinstance(frame, CommandFrame):
        return f"{TAG_COMMAND},{frame.target},{frame.command.value}"
    raise TypeError(f"not a frame: {frame!r}")


def _parse_int(token: str, name: str, line: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedFrame(line, f"field {name} is not an integer: {token!r}") from None


def _parse_float(token: str, name: str, line: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise MalformedFrame(line, f"field {name} is not a number: {token!r}") from None


def decode(line: str | bytes) -> Frame:
    """Parse one wire line into a frame.

    Inverse of :func:`encode` for every valid frame. Tolerates trailing
    whitespace and CR. Never raises anything but the two typed errors, no
    matter the input bytes.

    Raises:
        MalformedFrame: unknown tag, wrong field count, unparsable number.
        RangeViolation: parsed fine but a field violates its bounds.
    """
    if isinstance(line, (bytes, bytearray)):
        line = bytes(line).decode("latin-1")
    text = line.rstrip("\r\n\t ")
    parts = text.split(",")
    tag = parts[0]

    if tag == TAG_COMMAND:
        if len(parts) != 3:
            raise MalformedFrame(line, f"command frame needs 3 fields, got {len(parts)}")
        target = _parse_int(parts[1], "id", line)
        try:
            command = Command(parts[2])
        except ValueError:
            raise MalformedFrame(line, f"unknown command {parts[2]!r}") from None
        try:
            return CommandFrame(target=target, command=command)
        except ValueError as exc:
            raise RangeViolation(line, str(exc)) from None

    if tag == TAG_HELM:
        if len(parts) != 13:
            raise MalformedFrame(line, f"helm frame needs 13 fields, got {len(parts)}")
        if parts[3] not in ("0", "1"):
            raise MalformedFrame(line, f"gps_fix must be 0 or 1, got {parts[3]!r}")
        values = dict(
            id=_parse_int(parts[1], "id", line),
            seq=_parse_int(parts[2], "seq", line),
            gps_fix=parts[3] == "1",
            lat=_parse_float(parts[4], "lat", line),
            lon=_parse_float(parts[5], "lon", line),
            ambient_c=_parse_float(parts[6], "ambient_c", line),
            yaw=_parse_float(parts[7], "yaw", line),
            pitch=_parse_float(parts[8], "pitch", line),
            roll=_parse_float(parts[9], "roll", line),
            lin_accel=(
                _parse_float(parts[10], "ax", line),
                _parse_float(parts[11], "ay", line),
                _parse_float(parts[12], "az", line),
            ),
        )
        try:
            return HelmFrame(**values)
        except ValueError as exc:
            raise RangeViolation(line, str(exc)) from None

    if tag == TAG_STRAP:
        if len(parts) != 7:
            raise MalformedFrame(line, f"strap frame needs 7 fields, got {len(parts)}")
        values = dict(
            id=_parse_int(parts[1], "id", line),
            seq=_parse_int(parts[2], "seq", line),
            hr_bpm=_parse_int(parts[3], "hr", line),
            pulse_bpm=_parse_int(parts[4], "pulse", line),
            spo2_pct=_parse_float(parts[5], "spo2", line),
            body_c=_parse_float(parts[6], "body_c", line),
        )
        try:
            return StrapFrame(**values)
        except ValueError as exc:
            raise RangeViolation(line, str(exc)) from None

    raise MalformedFrame(line, f"unknown frame tag {tag!r}")


def airtime(line: str, data_rate_bps: float) -> float:
    """Seconds a line occupies the channel at the given data rate.

    Counts the line's bytes plus one terminator byte, eight bits each.
    """
    if data_rate_bps <= 0:
        raise ValueError(f"data_rate_bps must be positive, got {data_rate_bps}")
    return (len(line.encode("utf-8")) + 1) * 8.0 / data_rate_bps
