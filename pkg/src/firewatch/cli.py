"""Operator entry point: run scenarios, replay journals, probe the range."""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
from importlib import resources
from pathlib import Path

from .service import IncidentConfig, MissionService, replay_log
from .runner import build_report, prepare_run, range_probe
from .wearables import SchemaError, load_scenario

DEMO_SCENARIO = "demo"


def _load_config(path: str | None) -> IncidentConfig:
    if path is None:
        return IncidentConfig()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return IncidentConfig.from_dict(data)


def _scenario_path(arg: str) -> Path:
    if arg == DEMO_SCENARIO:
        return Path(str(resources.files("firewatch").joinpath("data/demo_scenario.json")))
    return Path(arg)


def _start_server(service: MissionService, address: str, ui_dir: str | None):
    import uvicorn

    from .api import create_app

    host, _, port = address.rpartition(":")
    host = host or "127.0.0.1"
    app = create_app(service, ui_dir=ui_dir)
    server_config = uvicorn.Config(app, host=host, port=int(port), log_level="warning")
    server = uvicorn.Server(server_config)
    thread = threading.Thread(target=server.run, daemon=True, name="api-server")
    thread.start()
    while not server.started and thread.is_alive():
        time.sleep(0.02)
    print(f"console API listening on http://{host}:{port}", file=sys.stderr)
    return server


def _find_ui_dir(explicit: str | None) -> str | None:
    if explicit:
        return explicit
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if (candidate / "index.html").is_file() else None


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(_scenario_path(args.scenario))
        config = _load_config(args.config)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ctx = prepare_run(scenario, config, seed=args.seed, log_path=args.out)
    server = None
    speed = args.speed
    if args.serve:
        server = _start_server(ctx.service, args.serve, _find_ui_dir(args.ui_dir))
        if speed is None:
            speed = 1.0
    try:
        report = ctx.execute(speed=speed)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.to_text())
    if server is not None:
        print("run complete; console still serving (Ctrl-C to exit)", file=sys.stderr)
        try:
            while True:
                time.sleep(1.0)
        except KeyboardInterrupt:
            pass
        server.should_exit = True
    return 0


def cmd_replay(args) -> int:
    try:
        result = replay_log(args.log)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: cannot replay {args.log}: {exc}", file=sys.stderr)
        return 2
    manifest = result.manifest or {}
    report = build_report(
        result.service,
        scenario_name=manifest.get("scenario", "?"),
        seed=manifest.get("seed", -1),
        duration_s=manifest.get("duration_s") or 0.0,
        log_path=str(args.log),
    )
    verdict = "identical" if result.matches else "DIVERGED"
    text = report.to_text() + f"\n\nreplay vs original alert/geofence timeline: {verdict}"
    if args.json:
        payload = report.to_dict()
        payload["replay_matches"] = result.matches
        text = json.dumps(payload, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if result.matches else 1


def cmd_range_probe(args) -> int:
    config = _load_config(args.config)
    rows = range_probe(args.from_m, args.to_m, args.step_m, config)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'distance_m':>11} {'delivery_rate':>14}")
    for row in rows:
        print(f"{row['distance_m']:>11.1f} {row['delivery_rate']:>14.2f}")
    return 0


def cmd_listen(args) -> int:
    """Line mode: ingest newline-delimited frames from stdin or a device path."""
    from dataclasses import replace

    config = replace(_load_config(args.config), mode="line")
    writer = None
    if args.out:
        from .service import LogWriter

        writer = LogWriter(args.out, {
            "format": 1,
            "scenario": None,
            "seed": config.channel.rng_seed,
            "duration_s": None,
            "tick_s": config.tick_s,
            "config": config.to_dict(),
        })
    command_fh = open(args.command_out, "a", encoding="utf-8", buffering=1) if args.command_out else None

    def command_sink(line: str, at: float, on_air: float) -> None:
        if command_fh is not None:
            command_fh.write(line + "\n")

    service = MissionService(config, writer=writer, command_sink=command_sink)
    server = None
    if args.serve:
        server = _start_server(service, args.serve, _find_ui_dir(args.ui_dir))
    stream = sys.stdin if args.input == "-" else open(args.input, "r", encoding="utf-8", errors="replace")
    t0 = time.monotonic()
    try:
        for raw in stream:
            now = time.monotonic() - t0
            service.ingest(raw.rstrip("\n"), now)
            service.advance(now)
    except KeyboardInterrupt:
        pass
    finally:
        if stream is not sys.stdin:
            stream.close()
        if writer is not None:
            writer.close()
        if command_fh is not None:
            command_fh.close()
        if server is not None:
            server.should_exit = True
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="firewatch",
        description="Simulated firefighter telemetry, mission control, and console API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario end to end")
    p_run.add_argument("scenario", help=f"scenario JSON path, or '{DEMO_SCENARIO}' for the bundled mission")
    p_run.add_argument("--config", default=None, help="incident config JSON")
    p_run.add_argument("--seed", type=int, default=None, help="channel RNG seed")
    p_run.add_argument("--speed", type=float, default=None,
                       help="sim seconds per wall second (default: unpaced, 1.0 with --serve)")
    p_run.add_argument("--serve", default=None, metavar="HOST:PORT",
                       help="serve the console API live during the run")
    p_run.add_argument("--ui-dir", default=None, help="static console bundle to serve at /")
    p_run.add_argument("--out", default=None, help="journal output path (JSON lines)")
    p_run.add_argument("--json", action="store_true", help="machine-readable report")
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="rebuild a run from its journal")
    p_replay.add_argument("log", help="journal path from a previous run")
    p_replay.add_argument("--report", default=None, help="also write the report here")
    p_replay.add_argument("--json", action="store_true")
    p_replay.set_defaults(func=cmd_replay)

    p_probe = sub.add_parser("range-probe", help="delivery rate vs distance sweep")
    p_probe.add_argument("--from", dest="from_m", type=float, default=0.0)
    p_probe.add_argument("--to", dest="to_m", type=float, default=1000.0)
    p_probe.add_argument("--step", dest="step_m", type=float, default=10.0)
    p_probe.add_argument("--config", default=None)
    p_probe.add_argument("--json", action="store_true")
    p_probe.set_defaults(func=cmd_range_probe)

    p_listen = sub.add_parser("listen", help="ingest frames from stdin or a serial-style device")
    p_listen.add_argument("--input", default="-", help="frame source path ('-' for stdin)")
    p_listen.add_argument("--config", default=None)
    p_listen.add_argument("--serve", default=None, metavar="HOST:PORT")
    p_listen.add_argument("--ui-dir", default=None)
    p_listen.add_argument("--out", default=None, help="journal output path")
    p_listen.add_argument("--command-out", default=None,
                          help="where downlink command lines are written")
    p_listen.set_defaults(func=cmd_listen)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
