// Console state and the stream-message reducer. The UI is a pure client:
// everything below derives from API responses and stream messages, so a page
// reload rebuilds the identical view from GET /units + GET /boundaries.

import { markerColor, markerLevel, type MarkerLevel } from "./colors.js";
import { toLocalMeters } from "./projection.js";
import type { BoundaryDto, GeoPointDto, StreamMessage, UnitDto } from "./types.js";

export interface FeedEntry {
  at: number;
  text: string;
  level: MarkerLevel;
}

export interface Toast {
  at: number;
  text: string;
}

export interface ConsoleState {
  connected: boolean;
  simTime: number;
  units: Map<number, UnitDto>;
  boundaries: Map<string, BoundaryDto>;
  feed: FeedEntry[];
  toasts: Toast[];
  selectedUnit: number | null;
}

export const FEED_LIMIT = 200;

export function initialState(): ConsoleState {
  return {
    connected: false,
    simTime: 0,
    units: new Map(),
    boundaries: new Map(),
    feed: [],
    toasts: [],
    selectedUnit: null,
  };
}

export function applyUnits(state: ConsoleState, units: UnitDto[]): void {
  for (const unit of units) {
    state.units.set(unit.id, unit);
  }
}

export function applyBoundaries(state: ConsoleState, boundaries: BoundaryDto[]): void {
  state.boundaries = new Map(boundaries.map((b) => [b.boundary_id, b]));
}

function pushFeed(state: ConsoleState, entry: FeedEntry): void {
  state.feed.push(entry);
  if (state.feed.length > FEED_LIMIT) {
    state.feed.splice(0, state.feed.length - FEED_LIMIT);
  }
}

export function applyMessage(state: ConsoleState, msg: StreamMessage): void {
  state.simTime = Math.max(state.simTime, msg.at);
  switch (msg.type) {
    case "snapshot":
      state.units = new Map(msg.units.map((u) => [u.id, u]));
      applyBoundaries(state, msg.boundaries ?? []);
      break;
    case "unit-update":
      state.units.set(msg.unit.id, msg.unit);
      break;
    case "alert": {
      const { event } = msg;
      const critical = ["BODY_TEMP_CRIT", "AMBIENT_CRIT", "OFFLINE"].includes(event.kind);
      pushFeed(state, {
        at: event.at,
        text: `unit ${event.unit}: ${event.kind} (${event.value.toFixed(1)})`,
        level: critical ? "critical" : "warn",
      });
      break;
    }
    case "geofence-event": {
      const { event } = msg;
      const name = event.boundary_name ?? event.boundary_id;
      const text = `unit ${event.unit} ${event.kind === "ENTER" ? "entered" : "exited"} ${name}`;
      pushFeed(state, { at: event.at, text, level: "warn" });
      state.toasts.push({ at: event.at, text });
      break;
    }
    case "command":
      pushFeed(state, {
        at: msg.at,
        text: `recall unit ${msg.unit}: ${msg.status}`,
        level: "default",
      });
      break;
  }
}

export interface MarkerView {
  unit: number;
  x: number; // local meters east of origin (projection applies the viewport)
  y: number; // local meters north of origin
  headingDeg: number | null;
  color: string;
  level: MarkerLevel;
  stale: boolean; // no GPS fix: render hollow at the last known position
  led: UnitDto["led"];
}

/** Marker view-model for every unit with a reported position. */
export function markers(state: ConsoleState, origin: GeoPointDto): MarkerView[] {
  const out: MarkerView[] = [];
  for (const unit of [...state.units.values()].sort((a, b) => a.id - b.id)) {
    if (!unit.position) {
      continue;
    }
    const local = toLocalMeters(origin, unit.position);
    out.push({
      unit: unit.id,
      x: local.x,
      y: local.y,
      headingDeg: unit.heading_deg,
      color: markerColor(unit),
      level: markerLevel(unit),
      stale: !unit.gps_fix,
      led: unit.led,
    });
  }
  return out;
}

/** Recall button policy: locked while a command is in flight. */
export function recallButton(unit: UnitDto | undefined): { enabled: boolean; label: string } {
  if (!unit) {
    return { enabled: false, label: "recall" };
  }
  if (unit.led === "PENDING") {
    return { enabled: false, label: "recall pending…" };
  }
  if (unit.led === "RED") {
    return { enabled: false, label: "LED red — recalled" };
  }
  return { enabled: true, label: "recall (light LED red)" };
}
