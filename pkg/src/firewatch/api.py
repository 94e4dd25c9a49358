"""HTTP and WebSocket surface over a running mission service.

Endpoints:
    GET    /units              snapshot of all unit states
    GET    /units/{id}         one unit
    POST   /units/{id}/recall  dispatch a LED_RED recall
    GET    /boundaries         finalized geofence boundaries
    POST   /boundaries         finalize a draft (name + vertices)
    DELETE /boundaries/{id}    remove a boundary
    GET    /log?since=N        journal records from index N
    GET    /config             incident configuration
    WS     /stream             snapshot then live unit/alert/fence/command messages

Readers only ever see snapshot copies; the ingestion loop is never blocked
for longer than a state copy.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .geo import GeoPoint
from .geofence import DraftBoundary, DraftRejected
from .service import MissionService, UnknownUnit


class VertexIn(BaseModel):
    lat: float
    lon: float


class BoundaryIn(BaseModel):
    name: str = ""
    vertices: list[VertexIn] = Field(default_factory=list)


class _StreamSubscriber:
    """Bridges the service's sync publish into one connection's async queue."""

    def __init__(self, loop: asyncio.AbstractEventLoop):
        self.loop = loop
        self.queue: asyncio.Queue[dict] = asyncio.Queue()

    def __call__(self, message: dict) -> None:
        self.loop.call_soon_threadsafe(self.queue.put_nowait, message)


def create_app(service: MissionService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="firewatch mission console API")

    @app.get("/units")
    def get_units() -> dict:
        snap = service.snapshot()
        return {"at": snap["at"], "units": snap["units"]}

    @app.get("/units/{unit_id}")
    def get_unit(unit_id: int) -> dict:
        try:
            return service.unit(unit_id)
        except UnknownUnit:
            raise HTTPException(status_code=404, detail=f"unknown unit {unit_id}")

    @app.post("/units/{unit_id}/recall")
    def post_recall(unit_id: int) -> dict:
        try:
            service.send_recall(unit_id)
        except UnknownUnit:
            raise HTTPException(status_code=404, detail=f"unknown unit {unit_id}")
        return service.unit(unit_id)

    @app.get("/boundaries")
    def get_boundaries() -> list[dict]:
        return [b.to_dict() for b in service.boundaries()]

    @app.post("/boundaries", status_code=201)
    def post_boundary(body: BoundaryIn) -> dict:
        try:
            vertices = tuple(GeoPoint(v.lat, v.lon) for v in body.vertices)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        draft = DraftBoundary(name=body.name, vertices=vertices)
        try:
            boundary = service.create_boundary(draft)
        except DraftRejected as exc:
            raise HTTPException(status_code=422, detail=exc.reason.value)
        return boundary.to_dict()

    @app.delete("/boundaries/{boundary_id}", status_code=204)
    def delete_boundary(boundary_id: str) -> None:
        try:
            service.delete_boundary(boundary_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown boundary {boundary_id}")

    @app.get("/log")
    def get_log(since: int = 0) -> dict:
        records, next_index = service.log_since(since)
        return {"records": records, "next": next_index}

    @app.get("/config")
    def get_config() -> dict:
        return service.config.to_dict()

    @app.websocket("/stream")
    async def stream(ws: WebSocket) -> None:
        await ws.accept()
        subscriber = _StreamSubscriber(asyncio.get_running_loop())
        service.subscribe(subscriber)
        recv_task = asyncio.create_task(ws.receive())
        get_task = asyncio.create_task(subscriber.queue.get())
        try:
            snap = service.snapshot()
            await ws.send_text(json.dumps({"type": "snapshot", **snap}))
            while True:
                done, _ = await asyncio.wait(
                    {recv_task, get_task}, return_when=asyncio.FIRST_COMPLETED
                )
                if recv_task in done:
                    message = recv_task.result()
                    if message.get("type") == "websocket.disconnect":
                        break
                    recv_task = asyncio.create_task(ws.receive())
                if get_task in done:
                    await ws.send_text(json.dumps(get_task.result()))
                    get_task = asyncio.create_task(subscriber.queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            recv_task.cancel()
            get_task.cancel()
            service.unsubscribe(subscriber)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="console")

    return app
