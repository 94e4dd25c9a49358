import { describe, expect, it } from "vitest";

import { markerColor, markerLevel, MARKER_AMBER, MARKER_DEFAULT, MARKER_RED } from "../src/colors.js";
import {
  applyBoundaries,
  applyMessage,
  applyUnits,
  initialState,
  markers,
  recallButton,
} from "../src/state.js";
import type { StreamMessage, UnitDto } from "../src/types.js";

const ORIGIN = { lat: 40.102, lon: -88.2272 };

export function makeUnit(overrides: Partial<UnitDto> & { id: number }): UnitDto {
  return {
    registered: true,
    position: { lat: 40.1021, lon: -88.2272 },
    gps_fix: true,
    last_fix_at: 1,
    heading_deg: 90,
    ambient_c: 24,
    hr_bpm: 95,
    pulse_bpm: 95,
    spo2_pct: 98,
    body_c: 36.8,
    stress: { hr_component: 0, spo2_component: 0, temp_component: 0, total: 0 },
    battery_pct: 99,
    led: "OFF",
    active_alerts: [],
    offline: false,
    helm_last_seen: 1,
    strap_last_seen: 1,
    loss_estimate: 0,
    ...overrides,
  };
}

describe("marker colors", () => {
  it("critical alerts turn the marker red", () => {
    for (const kind of ["BODY_TEMP_CRIT", "AMBIENT_CRIT", "OFFLINE"]) {
      expect(markerColor({ active_alerts: [kind] })).toBe(MARKER_RED);
    }
  });

  it("warn-level alerts turn the marker amber", () => {
    for (const kind of ["HIGH_HR", "LOW_SPO2", "BODY_TEMP_WARN", "AMBIENT_WARN", "JERK"]) {
      expect(markerColor({ active_alerts: [kind] })).toBe(MARKER_AMBER);
    }
  });

  it("critical wins over warn", () => {
    expect(markerLevel({ active_alerts: ["HIGH_HR", "BODY_TEMP_CRIT"] })).toBe("critical");
  });

  it("no alerts means the default color", () => {
    expect(markerColor({ active_alerts: [] })).toBe(MARKER_DEFAULT);
  });
});

describe("stream reducer", () => {
  it("snapshot then updates keeps one entry per unit", () => {
    const state = initialState();
    applyMessage(state, {
      type: "snapshot",
      at: 0,
      units: [makeUnit({ id: 1 }), makeUnit({ id: 2 })],
      boundaries: [],
    });
    applyMessage(state, { type: "unit-update", at: 2, unit: makeUnit({ id: 1, hr_bpm: 150 }) });
    expect(state.units.size).toBe(2);
    expect(state.units.get(1)!.hr_bpm).toBe(150);
    expect(state.simTime).toBe(2);
  });

  it("alerts land in the feed with their severity", () => {
    const state = initialState();
    applyMessage(state, {
      type: "alert",
      at: 3,
      event: { unit: 1, kind: "BODY_TEMP_CRIT", at: 3, value: 40.1 },
    });
    expect(state.feed).toHaveLength(1);
    expect(state.feed[0].level).toBe("critical");
    expect(state.feed[0].text).toContain("BODY_TEMP_CRIT");
  });

  it("geofence events raise a toast and a feed entry", () => {
    const state = initialState();
    applyMessage(state, {
      type: "geofence-event",
      at: 4,
      event: { unit: 1, boundary_id: "b1", boundary_name: "structure", kind: "ENTER", at: 4 },
    });
    expect(state.toasts).toHaveLength(1);
    expect(state.toasts[0].text).toBe("unit 1 entered structure");
    expect(state.feed[0].text).toContain("entered structure");
  });

  it("reload reconstructs the same view from REST snapshots", () => {
    const live = initialState();
    const messages: StreamMessage[] = [
      { type: "snapshot", at: 0, units: [makeUnit({ id: 1 }), makeUnit({ id: 2 })], boundaries: [] },
      { type: "unit-update", at: 1, unit: makeUnit({ id: 1, hr_bpm: 120 }) },
      { type: "unit-update", at: 2, unit: makeUnit({ id: 2, led: "RED" }) },
    ];
    messages.forEach((m) => applyMessage(live, m));

    const reloaded = initialState();
    applyUnits(reloaded, [makeUnit({ id: 1, hr_bpm: 120 }), makeUnit({ id: 2, led: "RED" })]);
    applyBoundaries(reloaded, []);
    expect([...reloaded.units.entries()]).toEqual([...live.units.entries()]);
  });
});

describe("marker view-model", () => {
  it("produces one marker per positioned unit with heading and color", () => {
    const state = initialState();
    applyUnits(state, [
      makeUnit({ id: 1, heading_deg: 45 }),
      makeUnit({ id: 2, heading_deg: 200, active_alerts: ["HIGH_HR"] }),
      makeUnit({ id: 3, position: null }),
    ]);
    const view = markers(state, ORIGIN);
    expect(view.map((m) => m.unit)).toEqual([1, 2]);
    expect(view[0].headingDeg).toBe(45);
    expect(view[1].color).toBe(MARKER_AMBER);
  });

  it("marks fixless units stale but keeps their last position", () => {
    const state = initialState();
    applyUnits(state, [makeUnit({ id: 1, gps_fix: false })]);
    expect(markers(state, ORIGIN)[0].stale).toBe(true);
  });
});

describe("recall button", () => {
  it("is enabled for a live unit and disabled while pending", () => {
    expect(recallButton(makeUnit({ id: 1 })).enabled).toBe(true);
    expect(recallButton(makeUnit({ id: 1, led: "PENDING" })).enabled).toBe(false);
    expect(recallButton(makeUnit({ id: 1, led: "RED" })).label).toContain("red");
    expect(recallButton(undefined).enabled).toBe(false);
  });
});
