// Thin HTTP + WebSocket client for the mission service.

import type { BoundaryDto, ConfigDto, StreamMessage, UnitDto } from "./types.js";

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  config(): Promise<ConfigDto> {
    return this.getJson("/config");
  }

  async units(): Promise<UnitDto[]> {
    const body = await this.getJson<{ units: UnitDto[] }>("/units");
    return body.units;
  }

  boundaries(): Promise<BoundaryDto[]> {
    return this.getJson("/boundaries");
  }

  async recall(unitId: number): Promise<UnitDto> {
    const response = await fetch(`${this.base}/units/${unitId}/recall`, { method: "POST" });
    if (!response.ok) {
      throw new Error(`recall ${unitId}: HTTP ${response.status}`);
    }
    return (await response.json()) as UnitDto;
  }

  async createBoundary(name: string, vertices: { lat: number; lon: number }[]): Promise<BoundaryDto> {
    const response = await fetch(`${this.base}/boundaries`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, vertices }),
    });
    if (!response.ok) {
      const detail = await response.json().catch(() => ({}));
      throw new Error(`boundary rejected: ${detail.detail ?? response.status}`);
    }
    return (await response.json()) as BoundaryDto;
  }

  async deleteBoundary(boundaryId: string): Promise<void> {
    await fetch(`${this.base}/boundaries/${boundaryId}`, { method: "DELETE" });
  }
}

export interface StreamHandle {
  close(): void;
}

export function openStream(
  onMessage: (msg: StreamMessage) => void,
  onStatus: (connected: boolean) => void,
  base: string = "",
): StreamHandle {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const url = base ? base.replace(/^http/, "ws") + "/stream" : `${proto}//${location.host}/stream`;
  let socket: WebSocket | null = null;
  let closed = false;

  const connect = () => {
    socket = new WebSocket(url);
    socket.onopen = () => onStatus(true);
    socket.onmessage = (event) => onMessage(JSON.parse(event.data) as StreamMessage);
    socket.onclose = () => {
      onStatus(false);
      if (!closed) {
        setTimeout(connect, 1000); // auto-reconnect while the tab stays open
      }
    };
  };
  connect();
  return {
    close() {
      closed = true;
      socket?.close();
    },
  };
}
