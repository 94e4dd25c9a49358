// Console bootstrap: fetch the snapshot, attach the stream, wire the toolbar.

import { ApiClient, openStream } from "./api.js";
import { addCorner, clearCorners, enterDrawMode, exitDrawMode, idleDraw, setName, undoCorner } from "./draw.js";
import { fromCanvas, type Viewport } from "./projection.js";
import { drawMap } from "./render.js";
import { applyBoundaries, applyMessage, applyUnits, initialState, recallButton } from "./state.js";
import type { GeoPointDto, UnitDto } from "./types.js";

const api = new ApiClient();
const state = initialState();
let draw = idleDraw();
let origin: GeoPointDto = { lat: 0, lon: 0 };

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const view: Viewport = { widthPx: canvas.width, heightPx: canvas.height, metersPerPx: 0.35, center: origin };

const el = (id: string) => document.getElementById(id)!;

function fmt(value: number | null, digits = 1, suffix = ""): string {
  return value === null ? "—" : value.toFixed(digits) + suffix;
}

function render(): void {
  view.center = origin;
  drawMap(ctx, state, draw, view, origin);
  renderStatus();
  renderDashboard();
  renderFeed();
}

function renderStatus(): void {
  el("conn").className = state.connected ? "dot live" : "dot dead";
  el("sim-time").textContent = `t=${state.simTime.toFixed(1)}s`;
  el("unit-count").textContent = `${state.units.size} units`;
}

function renderDashboard(): void {
  const panel = el("dashboard");
  const unit = state.selectedUnit !== null ? state.units.get(state.selectedUnit) : undefined;
  if (!unit) {
    panel.innerHTML = '<p class="hint">touch a unit marker to open its dashboard</p>';
    return;
  }
  const button = recallButton(unit);
  panel.innerHTML = `
    <h2>unit ${unit.id}${unit.registered ? "" : " (unregistered)"}</h2>
    <div class="stats">
      <div><span>heart rate</span><b>${fmt(unit.hr_bpm, 0, " bpm")}</b></div>
      <div><span>pulse</span><b>${fmt(unit.pulse_bpm, 0, " bpm")}</b></div>
      <div><span>SpO2</span><b>${fmt(unit.spo2_pct, 1, " %")}</b></div>
      <div><span>body temp</span><b>${fmt(unit.body_c, 1, " °C")}</b></div>
      <div><span>ambient</span><b>${fmt(unit.ambient_c, 1, " °C")}</b></div>
      <div><span>heading</span><b>${fmt(unit.heading_deg, 0, "°")}</b></div>
      <div><span>battery</span><b>${fmt(unit.battery_pct, 0, " %")}</b></div>
      <div><span>link loss</span><b>${(unit.loss_estimate * 100).toFixed(1)} %</b></div>
    </div>
    <div class="gauge">
      <span>stress ${unit.stress.total.toFixed(0)}/100</span>
      <div class="bar"><i style="width:${unit.stress.total}%"></i></div>
    </div>
    <p class="alerts">${unit.active_alerts.length ? unit.active_alerts.join(", ") : "no active alerts"}
       ${unit.offline ? " · OFFLINE" : ""} ${unit.gps_fix ? "" : " · position stale (no fix)"}</p>
    <button id="recall-btn" ${button.enabled ? "" : "disabled"}>${button.label}</button>
    <div class="placeholders">
      <div class="placeholder">thermal camera — not implemented</div>
      <div class="placeholder">indoor map — not implemented</div>
      <div class="placeholder">readiness — not implemented</div>
      <div class="placeholder">toxicity — not implemented</div>
    </div>`;
  const recall = el("recall-btn") as HTMLButtonElement;
  recall.onclick = async () => {
    recall.disabled = true;
    try {
      await api.recall(unit.id);
    } catch (error) {
      showToast(String(error));
    }
  };
}

function renderFeed(): void {
  el("feed").innerHTML = [...state.feed]
    .slice(-40)
    .reverse()
    .map((entry) => `<li class="${entry.level}">t=${entry.at.toFixed(1)} ${entry.text}</li>`)
    .join("");
}

function showToast(text: string): void {
  const host = el("toasts");
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = text;
  host.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

function syncDrawControls(): void {
  el("draw-tools").classList.toggle("hidden", !draw.active);
  el("pencil").classList.toggle("engaged", draw.active);
  el("corner-count").textContent = `${draw.vertices.length} corners`;
}

function pickUnit(p: { x: number; y: number }): UnitDto | undefined {
  // hit test in canvas pixels
  for (const unit of state.units.values()) {
    if (!unit.position) {
      continue;
    }
    const local = fromCanvas(view, origin, p.x, p.y);
    const dLat = (unit.position.lat - local.lat) * 111_194.9;
    const dLon = (unit.position.lon - local.lon) * 111_194.9 * Math.cos((origin.lat * Math.PI) / 180);
    if (Math.hypot(dLat, dLon) < 14 * view.metersPerPx) {
      return unit;
    }
  }
  return undefined;
}

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  const point = { x: event.clientX - rect.left, y: event.clientY - rect.top };
  if (draw.active) {
    draw = addCorner(draw, fromCanvas(view, origin, point.x, point.y));
    syncDrawControls();
    render();
    return;
  }
  const unit = pickUnit(point);
  state.selectedUnit = unit ? unit.id : null;
  render();
});

el("pencil").addEventListener("click", async () => {
  if (!draw.active) {
    draw = enterDrawMode(draw);
  } else {
    const { next, outcome } = exitDrawMode(draw);
    draw = next;
    if (outcome.kind === "submit") {
      try {
        await api.createBoundary(outcome.name, outcome.vertices);
        applyBoundaries(state, await api.boundaries());
      } catch (error) {
        showToast(String(error));
      }
    } else {
      showToast(`draft discarded: ${outcome.reason}`);
    }
  }
  syncDrawControls();
  render();
});

el("undo").addEventListener("click", () => {
  draw = undoCorner(draw);
  syncDrawControls();
  render();
});

el("clear").addEventListener("click", () => {
  draw = clearCorners(draw);
  syncDrawControls();
  render();
});

el("bound-name").addEventListener("input", (event) => {
  draw = setName(draw, (event.target as HTMLInputElement).value);
});

async function boot(): Promise<void> {
  const config = await api.config();
  origin = config.origin;
  el("address").textContent = config.address || "(no incident address)";
  applyUnits(state, await api.units());
  applyBoundaries(state, await api.boundaries());
  render();
  openStream(
    (msg) => {
      applyMessage(state, msg);
      if (msg.type === "geofence-event") {
        const name = msg.event.boundary_name ?? msg.event.boundary_id;
        showToast(`unit ${msg.event.unit} ${msg.event.kind === "ENTER" ? "entered" : "exited"} ${name}`);
      }
      render();
    },
    (connected) => {
      state.connected = connected;
      renderStatus();
    },
  );
}

boot().catch((error) => {
  showToast(`failed to connect: ${error}`);
});
