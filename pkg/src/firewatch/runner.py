"""End-to-end simulation driver: fleet -> channel -> mission service.

Per tick, in order: move radio nodes to sampled positions, emit and submit
due transmissions, step the channel and route deliveries (base ingests
telemetry, helm nodes apply commands), fire scripted recalls, push battery
metadata, then run the service's time-driven checks. Everything is seeded
and advances on a fixed grid, so a (scenario, seed) pair always produces a
byte-identical journal.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import codec
from .channel import BroadcastChannel, NodeRole, RadioNode, Transmission
from .geo import GeoPoint, offset_north_m
from .geofence import DraftBoundary
from .service import (
    IncidentConfig,
    LogKind,
    LogWriter,
    MissionService,
    tick_grid,
)
from .wearables import Scenario, WearableFleet

BASE_NODE_ID = "base"


@dataclass
class UnitReportRow:
    unit: int
    helm_rx: int
    strap_rx: int
    helm_loss: float
    strap_loss: float
    stress_total: float
    led: str
    offline: bool
    active_alerts: list[str]


@dataclass
class RunReport:
    scenario: str
    seed: int
    duration_s: float
    units: list[UnitReportRow]
    alerts: list[dict]
    fence_events: list[dict]
    log_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "units": [vars(u) for u in self.units],
            "alerts": self.alerts,
            "geofence_events": self.fence_events,
            "log_path": self.log_path,
        }

    def to_text(self) -> str:
        lines = [f"scenario: {self.scenario}   seed: {self.seed}   duration: {self.duration_s:g} s"]
        if self.log_path:
            lines.append(f"log: {self.log_path}")
        lines.append("")
        header = f"{'unit':>5} {'helm_rx':>8} {'strap_rx':>9} {'helm_loss':>10} {'strap_loss':>11} {'stress':>7} {'led':>8} {'offline':>8}  alerts"
        lines.append(header)
        lines.append("-" * len(header))
        for u in self.units:
            lines.append(
                f"{u.unit:>5} {u.helm_rx:>8} {u.strap_rx:>9} {u.helm_loss:>10.3f} "
                f"{u.strap_loss:>11.3f} {u.stress_total:>7.1f} {u.led:>8} {str(u.offline):>8}  "
                f"{','.join(u.active_alerts) or '-'}"
            )
        lines.append("")
        lines.append("alert timeline:")
        if not self.alerts:
            lines.append("  (none)")
        for a in self.alerts:
            lines.append(f"  t={a['at']:>10.3f}  unit {a['unit']:>4}  {a['kind']:<15} value={a['value']:g}")
        lines.append("geofence timeline:")
        if not self.fence_events:
            lines.append("  (none)")
        for g in self.fence_events:
            name = g.get("boundary_name", g["boundary_id"])
            lines.append(f"  t={g['at']:>10.3f}  unit {g['unit']:>4}  {g['kind']:<5} {name}")
        return "\n".join(lines)


def build_report(service: MissionService, *, scenario_name: str, seed: int,
                 duration_s: float, log_path: str | None = None) -> RunReport:
    snapshot = service.snapshot()
    units = [
        UnitReportRow(
            unit=u["id"],
            helm_rx=u["helm_rx"],
            strap_rx=u["strap_rx"],
            helm_loss=u["helm_loss"],
            strap_loss=u["strap_loss"],
            stress_total=u["stress"]["total"],
            led=u["led"],
            offline=u["offline"],
            active_alerts=u["active_alerts"],
        )
        for u in snapshot["units"]
    ]
    records = service.records()
    alerts = [r.payload for r in records if r.kind is LogKind.ALERT]
    fences = [r.payload for r in records if r.kind is LogKind.GEOFENCE]
    return RunReport(scenario=scenario_name, seed=seed, duration_s=duration_s,
                     units=units, alerts=alerts, fence_events=fences, log_path=log_path)


@dataclass
class RunContext:
    scenario: Scenario
    config: IncidentConfig
    seed: int
    channel: BroadcastChannel
    fleet: WearableFleet
    service: MissionService
    writer: LogWriter | None
    log_path: str | None

    def execute(self, speed: float | None = None, stop=None) -> RunReport:
        """Drive the whole mission; `speed` paces sim seconds per wall second."""
        fleet, channel, service = self.fleet, self.channel, self.service
        recalls = list(self.scenario.recalls)
        recall_idx = 0
        grid = tick_grid(self.scenario.duration_s, self.config.tick_s)
        last_wall = time.monotonic()
        last_gt = 0.0
        try:
            for gt in grid:
                if stop is not None and stop.is_set():
                    break
                if speed is not None and speed > 0:
                    target = last_wall + (gt - last_gt) / speed
                    delay = target - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                    last_wall, last_gt = target, gt
                for node_id, pos in fleet.positions_at(gt).items():
                    channel.move(node_id, pos)
                for tx in fleet.tick(gt):
                    channel.submit(tx)
                for delivery in channel.step(gt):
                    if delivery.receiver == BASE_NODE_ID:
                        service.ingest(delivery.line, delivery.at)
                    elif delivery.receiver.startswith("helm-") and delivery.line.startswith(codec.TAG_COMMAND + ","):
                        frame = codec.decode(delivery.line)
                        if isinstance(frame, codec.CommandFrame):
                            fleet.deliver_command(frame)
                while recall_idx < len(recalls) and recalls[recall_idx].t <= gt:
                    service.send_recall(recalls[recall_idx].target, at=gt)
                    recall_idx += 1
                for uid in fleet.unit_ids:
                    service.set_battery(uid, fleet.state(uid).battery_pct)
                service.advance(gt)
        finally:
            if self.writer is not None:
                self.writer.close()
        return build_report(
            self.service,
            scenario_name=self.scenario.name,
            seed=self.seed,
            duration_s=self.scenario.duration_s,
            log_path=self.log_path,
        )


def prepare_run(scenario: Scenario, config: IncidentConfig | None = None, *,
                seed: int | None = None, log_path: str | Path | None = None) -> RunContext:
    """Wire the channel, fleet, and service for one scenario run."""
    config = config or IncidentConfig()
    if not config.roster:
        config = replace(config, roster=tuple(u.id for u in scenario.units))
    if config.origin == GeoPoint(0.0, 0.0):
        config = replace(config, origin=scenario.origin)
    used_seed = config.channel.rng_seed if seed is None else seed
    config = replace(config, channel=replace(config.channel, rng_seed=used_seed))
    # Ticks coarser than a broadcast period would submit frames late.
    min_period = min(
        [p for u in scenario.units for p in (u.helm_period_s, u.strap_period_s)],
        default=config.tick_s,
    )
    if config.tick_s > min_period:
        config = replace(config, tick_s=min_period)

    channel = BroadcastChannel(config.channel)
    channel.add_node(RadioNode(node_id=BASE_NODE_ID, position=config.origin, role=NodeRole.BASE))
    fleet = WearableFleet(scenario, data_rate_bps=config.channel.data_rate_bps)
    for node_id, pos in fleet.positions_at(0.0).items():
        channel.add_node(RadioNode(node_id=node_id, position=pos, role=NodeRole.WEARABLE))

    writer = None
    if log_path is not None:
        manifest = {
            "format": 1,
            "scenario": scenario.name,
            "seed": used_seed,
            "duration_s": scenario.duration_s,
            "tick_s": config.tick_s,
            "config": config.to_dict(),
        }
        writer = LogWriter(log_path, manifest)

    def command_sink(line: str, at: float, on_air: float) -> None:
        channel.submit(Transmission(origin=BASE_NODE_ID, line=line, start=at, airtime=on_air))

    service = MissionService(config, writer=writer, command_sink=command_sink)
    for plan in scenario.boundaries:
        service.create_boundary(DraftBoundary(name=plan.name, vertices=plan.vertices))

    return RunContext(
        scenario=scenario,
        config=config,
        seed=used_seed,
        channel=channel,
        fleet=fleet,
        service=service,
        writer=writer,
        log_path=str(log_path) if log_path is not None else None,
    )


def run_scenario(scenario: Scenario, config: IncidentConfig | None = None, *,
                 seed: int | None = None, log_path: str | Path | None = None,
                 speed: float | None = None) -> tuple[RunContext, RunReport]:
    ctx = prepare_run(scenario, config, seed=seed, log_path=log_path)
    report = ctx.execute(speed=speed)
    return ctx, report


def range_probe(from_m: float = 0.0, to_m: float = 1000.0, step_m: float = 10.0,
                config: IncidentConfig | None = None, frames_per_distance: int = 5) -> list[dict]:
    """Delivery rate of a lone transmitter swept away from the base.

    With the default loss-free channel this is a hard cliff at the maximum
    range: rate 1.0 inside, 0.0 beyond.
    """
    if step_m <= 0:
        raise ValueError("step_m must be positive")
    config = config or IncidentConfig(origin=GeoPoint(40.0, -88.0))
    rows: list[dict] = []
    d = from_m
    while d <= to_m + 1e-9:
        chan = BroadcastChannel(config.channel)
        chan.add_node(RadioNode(node_id=BASE_NODE_ID, position=config.origin, role=NodeRole.BASE))
        chan.add_node(RadioNode(node_id="probe", position=offset_north_m(config.origin, d),
                                role=NodeRole.WEARABLE))
        delivered = 0
        for k in range(frames_per_distance):
            frame = codec.StrapFrame(id=1, seq=k, hr_bpm=90, pulse_bpm=90, spo2_pct=99.0, body_c=36.8)
            line = codec.encode(frame)
            chan.submit(Transmission(origin="probe", line=line, start=float(k),
                                     airtime=codec.airtime(line, config.channel.data_rate_bps)))
        for delivery in chan.step(frames_per_distance + 1.0):
            if delivery.receiver == BASE_NODE_ID:
                delivered += 1
        rows.append({"distance_m": d, "delivery_rate": delivered / frames_per_distance})
        d += step_m
    return rows
