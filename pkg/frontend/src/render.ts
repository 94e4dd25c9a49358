// Canvas rendering of the planar map: boundaries, draft corners, unit markers.

import { markerColor } from "./colors.js";
import type { DrawState } from "./draw.js";
import { headingArrow, toCanvas, type Viewport } from "./projection.js";
import type { ConsoleState } from "./state.js";
import type { GeoPointDto } from "./types.js";

const BOUNDARY_STROKE = "#4f8ff7";
const DRAFT_DOT = "#4f8ff7";
const GRID_STROKE = "#22262e";
const MARKER_RADIUS = 9;

export function drawMap(
  ctx: CanvasRenderingContext2D,
  state: ConsoleState,
  draw: DrawState,
  view: Viewport,
  origin: GeoPointDto,
): void {
  ctx.clearRect(0, 0, view.widthPx, view.heightPx);

  // 100 m grid centered on the incident origin
  ctx.strokeStyle = GRID_STROKE;
  ctx.lineWidth = 1;
  const gridMeters = 100;
  const gridPx = gridMeters / view.metersPerPx;
  const originPx = toCanvas(view, origin, origin);
  for (let x = originPx.x % gridPx; x < view.widthPx; x += gridPx) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, view.heightPx);
    ctx.stroke();
  }
  for (let y = originPx.y % gridPx; y < view.heightPx; y += gridPx) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(view.widthPx, y);
    ctx.stroke();
  }

  // base station at the origin
  ctx.fillStyle = "#8b949e";
  ctx.beginPath();
  ctx.rect(originPx.x - 5, originPx.y - 5, 10, 10);
  ctx.fill();

  // finalized boundaries: blue outlines, faint fill
  for (const boundary of state.boundaries.values()) {
    ctx.beginPath();
    boundary.vertices.forEach((v, i) => {
      const p = toCanvas(view, origin, v);
      if (i === 0) {
        ctx.moveTo(p.x, p.y);
      } else {
        ctx.lineTo(p.x, p.y);
      }
    });
    ctx.closePath();
    ctx.fillStyle = "rgba(79, 143, 247, 0.08)";
    ctx.fill();
    ctx.strokeStyle = BOUNDARY_STROKE;
    ctx.lineWidth = 2;
    ctx.stroke();
    const first = toCanvas(view, origin, boundary.vertices[0]);
    ctx.fillStyle = BOUNDARY_STROKE;
    ctx.font = "12px sans-serif";
    ctx.fillText(boundary.name, first.x + 6, first.y - 6);
  }

  // draft corners as blue dots, connected by a light preview line
  if (draw.active && draw.vertices.length > 0) {
    ctx.strokeStyle = BOUNDARY_STROKE;
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    draw.vertices.forEach((v, i) => {
      const p = toCanvas(view, origin, v);
      if (i === 0) {
        ctx.moveTo(p.x, p.y);
      } else {
        ctx.lineTo(p.x, p.y);
      }
    });
    ctx.stroke();
    ctx.setLineDash([]);
    for (const v of draw.vertices) {
      const p = toCanvas(view, origin, v);
      ctx.fillStyle = DRAFT_DOT;
      ctx.beginPath();
      ctx.arc(p.x, p.y, 5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  // unit markers with heading arrows
  for (const unit of [...state.units.values()].sort((a, b) => a.id - b.id)) {
    if (!unit.position) {
      continue;
    }
    const p = toCanvas(view, origin, unit.position);
    const color = markerColor(unit);
    if (unit.heading_deg !== null) {
      const tip = headingArrow(p.x, p.y, unit.heading_deg, MARKER_RADIUS + 12);
      ctx.strokeStyle = color;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(p.x, p.y);
      ctx.lineTo(tip.x, tip.y);
      ctx.stroke();
      const rad = (unit.heading_deg * Math.PI) / 180;
      ctx.beginPath();
      ctx.moveTo(tip.x, tip.y);
      ctx.lineTo(tip.x - 7 * Math.sin(rad - 0.45), tip.y + 7 * Math.cos(rad - 0.45));
      ctx.lineTo(tip.x - 7 * Math.sin(rad + 0.45), tip.y + 7 * Math.cos(rad + 0.45));
      ctx.closePath();
      ctx.fillStyle = color;
      ctx.fill();
    }
    ctx.beginPath();
    ctx.arc(p.x, p.y, MARKER_RADIUS, 0, 2 * Math.PI);
    if (unit.gps_fix) {
      ctx.fillStyle = color;
      ctx.fill();
    } else {
      // stale position: hollow marker at the last known fix
      ctx.strokeStyle = color;
      ctx.lineWidth = 3;
      ctx.stroke();
    }
    if (unit.led === "RED" || unit.led === "PENDING") {
      ctx.strokeStyle = "#e5484d";
      ctx.setLineDash(unit.led === "PENDING" ? [3, 3] : []);
      ctx.beginPath();
      ctx.arc(p.x, p.y, MARKER_RADIUS + 4, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.fillStyle = "#e6edf3";
    ctx.font = "bold 12px sans-serif";
    ctx.fillText(String(unit.id), p.x - 4, p.y + 4);
  }
}
