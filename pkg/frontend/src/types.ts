// Payload shapes mirrored from the mission service API.

export interface GeoPointDto {
  lat: number;
  lon: number;
}

export interface StressDto {
  hr_component: number;
  spo2_component: number;
  temp_component: number;
  total: number;
}

export interface UnitDto {
  id: number;
  registered: boolean;
  position: GeoPointDto | null;
  gps_fix: boolean;
  last_fix_at: number | null;
  heading_deg: number | null;
  ambient_c: number | null;
  hr_bpm: number | null;
  pulse_bpm: number | null;
  spo2_pct: number | null;
  body_c: number | null;
  stress: StressDto;
  battery_pct: number | null;
  led: "OFF" | "PENDING" | "RED";
  active_alerts: string[];
  offline: boolean;
  helm_last_seen: number | null;
  strap_last_seen: number | null;
  loss_estimate: number;
}

export interface BoundaryDto {
  boundary_id: string;
  name: string;
  vertices: GeoPointDto[];
}

export interface AlertEventDto {
  unit: number;
  kind: string;
  at: number;
  value: number;
}

export interface FenceEventDto {
  unit: number;
  boundary_id: string;
  boundary_name?: string;
  kind: "ENTER" | "EXIT";
  at: number;
}

export type StreamMessage =
  | { type: "snapshot"; at: number; units: UnitDto[]; boundaries: BoundaryDto[] }
  | { type: "unit-update"; at: number; unit: UnitDto }
  | { type: "alert"; at: number; event: AlertEventDto }
  | { type: "geofence-event"; at: number; event: FenceEventDto }
  | { type: "command"; at: number; unit: number; command: string; status: string };

export interface ConfigDto {
  address: string;
  origin: GeoPointDto;
  roster: number[];
  channel: { max_range_m: number; [key: string]: unknown };
  thresholds: Record<string, number>;
  tick_s: number;
  mode: string;
}
