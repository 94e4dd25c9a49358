// Marker color policy: red for critical, amber for warn-level, default otherwise.

import type { UnitDto } from "./types.js";

export const CRITICAL_ALERTS = new Set(["BODY_TEMP_CRIT", "AMBIENT_CRIT", "OFFLINE"]);

export const MARKER_RED = "#e5484d";
export const MARKER_AMBER = "#f5a623";
export const MARKER_DEFAULT = "#30a46c";

export type MarkerLevel = "critical" | "warn" | "default";

export function markerLevel(unit: Pick<UnitDto, "active_alerts">): MarkerLevel {
  if (unit.active_alerts.some((kind) => CRITICAL_ALERTS.has(kind))) {
    return "critical";
  }
  if (unit.active_alerts.length > 0) {
    return "warn";
  }
  return "default";
}

export function markerColor(unit: Pick<UnitDto, "active_alerts">): string {
  switch (markerLevel(unit)) {
    case "critical":
      return MARKER_RED;
    case "warn":
      return MARKER_AMBER;
    default:
      return MARKER_DEFAULT;
  }
}
