// Geofence draw mode. The pencil icon toggles the mode; map clicks drop blue
// corner dots; Undo removes the latest corner; Clear wipes them all; the name
// field is mandatory. Leaving draw mode finalizes: fewer than three corners
// or a blank name discards the draft, otherwise it is submitted.

import type { GeoPointDto } from "./types.js";

export interface DrawState {
  active: boolean;
  name: string;
  vertices: GeoPointDto[];
}

export function idleDraw(): DrawState {
  return { active: false, name: "", vertices: [] };
}

export function enterDrawMode(state: DrawState): DrawState {
  return { active: true, name: "", vertices: [] };
}

export function addCorner(state: DrawState, p: GeoPointDto): DrawState {
  if (!state.active) {
    return state;
  }
  return { ...state, vertices: [...state.vertices, p] };
}

export function undoCorner(state: DrawState): DrawState {
  return { ...state, vertices: state.vertices.slice(0, -1) };
}

export function clearCorners(state: DrawState): DrawState {
  return { ...state, vertices: [] };
}

export function setName(state: DrawState, name: string): DrawState {
  return { ...state, name };
}

export type ExitOutcome =
  | { kind: "discarded"; reason: "too-few-corners" | "missing-name" }
  | { kind: "submit"; name: string; vertices: GeoPointDto[] };

/** Leaving draw mode either submits the boundary or silently drops the draft. */
export function exitDrawMode(state: DrawState): { next: DrawState; outcome: ExitOutcome } {
  const next = idleDraw();
  if (state.vertices.length < 3) {
    return { next, outcome: { kind: "discarded", reason: "too-few-corners" } };
  }
  if (!state.name.trim()) {
    return { next, outcome: { kind: "discarded", reason: "missing-name" } };
  }
  return {
    next,
    outcome: { kind: "submit", name: state.name.trim(), vertices: state.vertices },
  };
}
