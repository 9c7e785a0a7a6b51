"""HTTP service exposing interactive segmentation sessions.

Flow: POST an image to /api/sessions, PUT stroke/polygon annotations,
POST /segment to start a run (202; 409 while one is running), poll
/status, then fetch /mask and /overlay once done. Strokes are rasterized
server-side with round brushes; later strokes win where they overlap.
"""

from __future__ import annotations

import io
import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response, UploadFile
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError

from ..engine import EngineConfig
from ..features import FeatureMode
from ..imgio import CutPolygon, ImageBuffer, LabelMap, save_mask, save_overlay
from ..pipeline import PipelineConfig, segment
from ..strokes import Stroke, rasterize_strokes
from .schemas import AnnotationsIn, Progress, SegmentRequest, SessionCreated, StatusOut
from .sessions import Session, SessionStatus, SessionStore


def _decode_upload(payload: bytes) -> ImageBuffer:
    try:
        with Image.open(io.BytesIO(payload)) as im:
            im.load()
            data = np.asarray(im.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise HTTPException(status_code=422, detail=f"could not decode image: {exc}") from exc
    if data.ndim != 3 or data.shape[0] < 1 or data.shape[1] < 1:
        raise HTTPException(status_code=422, detail="image has no pixels")
    return ImageBuffer(data=data)


def _mask_png(labels: LabelMap) -> bytes:
    buf = io.BytesIO()
    save_mask(labels, buf)
    return buf.getvalue()


def _overlay_png(image: ImageBuffer, labels: LabelMap) -> bytes:
    buf = io.BytesIO()
    save_overlay(image, labels, buf)
    return buf.getvalue()


def _run_session(session: Session, req: SegmentRequest) -> None:
    try:
        scribbles = rasterize_strokes(session.strokes, session.image.width, session.image.height)
        cfg = PipelineConfig(
            mode=FeatureMode(req.mode),
            max_pixels=req.max_pixels,
            background_class=req.background_class,
            engine=EngineConfig(
                delta_v=req.delta_v,
                p_grd=req.p_grd,
                max_ite=req.max_ite,
                max_stop=req.max_stop,
                control_stop=req.control_stop,
                seed=req.seed,
            ),
        )

        def progress(iteration: int, mean_max: float) -> None:
            session.progress_iteration = iteration
            session.progress_domination = mean_max

        result = segment(session.image, scribbles, session.polygon, cfg, progress=progress)
        with session.lock:
            session.result = result
            session.status = SessionStatus.DONE
    except Exception as exc:  # surface any pipeline failure to the client
        with session.lock:
            session.error = str(exc)
            session.status = SessionStatus.FAILED


def create_app(store: SessionStore | None = None, static_dir: str | Path | None = None) -> FastAPI:
    if store is None:
        ttl = float(os.environ.get("PCCSEG_SESSION_TTL", "3600"))
        store = SessionStore(ttl_seconds=ttl)
    app = FastAPI(title="pccseg", version="0.1.0")

    def get_session(session_id: str) -> Session:
        session = store.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/sessions", response_model=SessionCreated, status_code=201)
    async def create_session(image: UploadFile) -> SessionCreated:
        payload = await image.read()
        session = store.create(_decode_upload(payload))
        return SessionCreated(id=session.id)

    @app.put("/api/sessions/{session_id}/annotations")
    def put_annotations(session_id: str, annotations: AnnotationsIn) -> dict:
        session = get_session(session_id)
        try:
            polygon = CutPolygon(vertices=np.asarray(annotations.polygon, dtype=np.float64)) if annotations.polygon else None
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        strokes = [
            Stroke(class_index=s.class_index, points=[tuple(p) for p in s.points], brush_radius=s.brush_radius)
            for s in annotations.strokes
        ]
        with session.lock:
            if session.status == SessionStatus.RUNNING:
                raise HTTPException(status_code=409, detail="segmentation is running")
            session.strokes = strokes
            session.polygon = polygon
        return {"strokes": len(strokes), "polygon": polygon is not None}

    @app.post("/api/sessions/{session_id}/segment", status_code=202)
    def start_segment(session_id: str, req: SegmentRequest) -> dict:
        session = get_session(session_id)
        classes = {s.class_index for s in session.strokes}
        if len(classes) < 2:
            raise HTTPException(status_code=422, detail="need at least two classes")
        with session.lock:
            if session.status == SessionStatus.RUNNING:
                raise HTTPException(status_code=409, detail="segmentation already running")
            session.status = SessionStatus.RUNNING
            session.error = None
            session.result = None
            session.progress_iteration = 0
            session.progress_domination = 0.0
        worker = threading.Thread(target=_run_session, args=(session, req), daemon=True)
        worker.start()
        return {"status": "running"}

    @app.get("/api/sessions/{session_id}/status", response_model=StatusOut)
    def status(session_id: str) -> StatusOut:
        session = get_session(session_id)
        return StatusOut(
            status=session.status.value,
            progress=Progress(
                iteration=session.progress_iteration,
                mean_max_domination=session.progress_domination,
            ),
            error=session.error,
        )

    @app.get("/api/sessions/{session_id}/mask")
    def mask(session_id: str) -> Response:
        session = get_session(session_id)
        if session.status != SessionStatus.DONE or session.result is None:
            raise HTTPException(status_code=404, detail="no result yet")
        return Response(content=_mask_png(session.result.full_res_labels), media_type="image/png")

    @app.get("/api/sessions/{session_id}/overlay")
    def overlay(session_id: str) -> Response:
        session = get_session(session_id)
        if session.status != SessionStatus.DONE or session.result is None:
            raise HTTPException(status_code=404, detail="no result yet")
        return Response(
            content=_overlay_png(session.image, session.result.full_res_labels),
            media_type="image/png",
        )

    static_dir = static_dir or os.environ.get("PCCSEG_STATIC_DIR")
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
