// Tile-free planar map projection: meters east/north of the incident origin,
// scaled into canvas pixels. Good to well past the radio horizon; no tiles,
// no external map provider.

import type { GeoPointDto } from "./types.js";

const EARTH_RADIUS_M = 6_371_000;
const METERS_PER_DEG_LAT = (EARTH_RADIUS_M * Math.PI) / 180;

export interface Viewport {
  widthPx: number;
  heightPx: number;
  metersPerPx: number;
  center: GeoPointDto; // map point rendered at the canvas center
}

export function metersPerDegLon(lat: number): number {
  return METERS_PER_DEG_LAT * Math.cos((lat * Math.PI) / 180);
}

/** East/north offset of `p` from `origin` in meters. */
export function toLocalMeters(origin: GeoPointDto, p: GeoPointDto): { x: number; y: number } {
  return {
    x: (p.lon - origin.lon) * metersPerDegLon(origin.lat),
    y: (p.lat - origin.lat) * METERS_PER_DEG_LAT,
  };
}

export function fromLocalMeters(origin: GeoPointDto, x: number, y: number): GeoPointDto {
  return {
    lat: origin.lat + y / METERS_PER_DEG_LAT,
    lon: origin.lon + x / metersPerDegLon(origin.lat),
  };
}

/** Canvas pixel position of a geographic point (y grows downward). */
export function toCanvas(view: Viewport, origin: GeoPointDto, p: GeoPointDto): { x: number; y: number } {
  const local = toLocalMeters(origin, p);
  const centerLocal = toLocalMeters(origin, view.center);
  return {
    x: view.widthPx / 2 + (local.x - centerLocal.x) / view.metersPerPx,
    y: view.heightPx / 2 - (local.y - centerLocal.y) / view.metersPerPx,
  };
}

export function fromCanvas(view: Viewport, origin: GeoPointDto, xPx: number, yPx: number): GeoPointDto {
  const centerLocal = toLocalMeters(origin, view.center);
  const x = centerLocal.x + (xPx - view.widthPx / 2) * view.metersPerPx;
  const y = centerLocal.y - (yPx - view.heightPx / 2) * view.metersPerPx;
  return fromLocalMeters(origin, x, y);
}

/**
 * Endpoint of a heading arrow for a marker: compass heading 0 = north (up),
 * 90 = east (right), growing clockwise on screen.
 */
export function headingArrow(
  xPx: number,
  yPx: number,
  headingDeg: number,
  lengthPx: number,
): { x: number; y: number } {
  const rad = (headingDeg * Math.PI) / 180;
  return {
    x: xPx + lengthPx * Math.sin(rad),
    y: yPx - lengthPx * Math.cos(rad),
  };
}

/** Recover the heading a drawn arrow represents (for tests: +-1 degree). */
export function arrowHeadingDeg(xPx: number, yPx: number, tip: { x: number; y: number }): number {
  const deg = (Math.atan2(tip.x - xPx, yPx - tip.y) * 180) / Math.PI;
  return (deg + 360) % 360;
}
