"""HTTP session service exposing the interactive loop to clients.

Endpoints: POST /sessions, /sessions/{id}/points, /sessions/{id}/clicks,
/sessions/{id}/undo, /sessions/{id}/accept; GET /sessions/{id}/mask,
/sessions/{id}/image, /sessions/{id}/meta, /healthz.

Sessions move awaiting_points -> segmented -> accepted; requests within a
session are serialized by a per-session lock. State lives in memory with
optional write-through to a sessions directory; a restarted service replays
the persisted interactions and, because the pipeline is deterministic,
reproduces every mask byte-for-byte.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .errors import IntersegError, IoError, ValidationError
from .formats import (
    DTYPE_UINT8,
    image_to_png_bytes,
    load_image_bytes,
    mask_to_png_bytes,
    write_sgrid_bytes,
)
from .grid import BinaryMask, ScalarGrid
from .pipeline import PipelineConfig, SegContext, make_baseline_provider, refine_step, stage1
from .seeds import SeedSet, seeds_from_obj

DEFAULT_TTL_SECS = 3600.0
MIN_MARGIN_POINTS = 2


class SessionStatus(str, Enum):
    AWAITING_POINTS = "awaiting_points"
    SEGMENTED = "segmented"
    ACCEPTED = "accepted"


@dataclass
class SessionState:
    id: str
    image: ScalarGrid
    status: SessionStatus = SessionStatus.AWAITING_POINTS
    margin_points: SeedSet | None = None
    # histories are append-only except undo (pop); index k = state after k
    # refinement rounds, so mask_history is one longer than click_history
    ctx_history: list[SegContext] = field(default_factory=list)
    mask_history: list[BinaryMask] = field(default_factory=list)
    click_history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)

    def rounds(self) -> int:
        return len(self.click_history)

    def check_histories(self) -> None:
        if self.status != SessionStatus.AWAITING_POINTS:
            assert len(self.mask_history) == len(self.click_history) + 1
            assert len(self.ctx_history) == len(self.mask_history)


class ApiError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


class SessionStore:
    """In-memory sessions with TTL sweeping and optional disk write-through."""

    def __init__(self, session_dir: str | None, ttl_secs: float):
        self._sessions: dict[str, SessionState] = {}
        self._guard = threading.Lock()
        self.session_dir = Path(session_dir) if session_dir else None
        self.ttl_secs = ttl_secs
        if self.session_dir:
            self.session_dir.mkdir(parents=True, exist_ok=True)

    def sweep(self) -> None:
        now = time.monotonic()
        with self._guard:
            expired = [
                sid for sid, s in self._sessions.items() if now - s.last_access > self.ttl_secs
            ]
            for sid in expired:
                del self._sessions[sid]

    def add(self, session: SessionState) -> None:
        with self._guard:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> SessionState:
        self.sweep()
        with self._guard:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id}")
        session.last_access = time.monotonic()
        return session

    # -- write-through persistence ------------------------------------------

    def _dir_for(self, session_id: str) -> Path | None:
        return self.session_dir / session_id if self.session_dir else None

    def persist_image(self, session: SessionState, raw: bytes) -> None:
        d = self._dir_for(session.id)
        if d is None:
            return
        d.mkdir(parents=True, exist_ok=True)
        (d / "image.bin").write_bytes(raw)
        (d / "interactions.json").write_text(json.dumps({"points": None, "clicks": []}))

    def _interactions_path(self, session_id: str) -> Path | None:
        d = self._dir_for(session_id)
        return d / "interactions.json" if d else None

    def persist_interactions(self, session: SessionState, points_obj, clicks_obj) -> None:
        path = self._interactions_path(session.id)
        if path is None:
            return
        path.write_text(json.dumps({"points": points_obj, "clicks": clicks_obj}, indent=2))
        d = self._dir_for(session.id)
        for k, mask in enumerate(session.mask_history):
            target = d / f"mask_{k:03d}.sgrid"
            if not target.exists():
                target.write_bytes(write_sgrid_bytes(mask))
        # undo removes persisted masks past the current round
        k = len(session.mask_history)
        while (d / f"mask_{k:03d}.sgrid").exists():
            (d / f"mask_{k:03d}.sgrid").unlink()
            k += 1

    def restore_all(self, config: PipelineConfig) -> int:
        """Rebuild sessions from the write-through directory by replaying the
        recorded interactions through the deterministic pipeline."""
        if self.session_dir is None:
            return 0
        restored = 0
        for d in sorted(self.session_dir.iterdir()):
            if not d.is_dir() or not (d / "image.bin").exists():
                continue
            try:
                raw = (d / "image.bin").read_bytes()
                record = json.loads((d / "interactions.json").read_text())
                session = SessionState(id=d.name, image=load_image_bytes(raw))
                if record["points"] is not None:
                    _run_points(session, record["points"], config)
                    for batch in record["clicks"]:
                        _run_clicks(session, batch)
                self.add(session)
                restored += 1
            except (IntersegError, ApiError, OSError, json.JSONDecodeError, KeyError):
                continue  # skip unreadable/partial sessions
        return restored


def _parse_points(body) -> SeedSet:
    fg, bg = seeds_from_obj(body)
    if not bg.is_empty():
        raise ValidationError("margin points must all be labeled fg")
    if len(fg) < MIN_MARGIN_POINTS:
        raise ValidationError(f"at least {MIN_MARGIN_POINTS} margin points required, got {len(fg)}")
    return fg


def _run_points(session: SessionState, body, config: PipelineConfig) -> None:
    points = _parse_points(body)
    provider = make_baseline_provider(config.connectivity)
    ctx, mask, _ = stage1(session.image, points, provider, config)
    session.margin_points = points
    session.ctx_history = [ctx]
    session.mask_history = [mask]
    session.click_history = []
    session.status = SessionStatus.SEGMENTED


def _run_clicks(session: SessionState, body) -> None:
    fg, bg = seeds_from_obj(body)
    if fg.is_empty() and bg.is_empty():
        raise ValidationError("refinement requires at least one click")
    ctx, mask, _ = refine_step(session.ctx_history[-1], fg.points, bg.points)
    session.ctx_history.append(ctx)
    session.mask_history.append(mask)
    session.click_history.append(body)


def _meta(session: SessionState) -> dict:
    return {
        "id": session.id,
        "status": session.status.value,
        "rank": session.image.rank,
        "dims": list(session.image.dims),
        "spacing": list(session.image.spacing),
        "rounds": session.rounds(),
        "bbox": None
        if not session.ctx_history
        else {"lo": list(session.ctx_history[0].bbox.lo), "hi": list(session.ctx_history[0].bbox.hi)},
    }


def _mask_response(session: SessionState, round_idx: int | None, slice_idx: int | None, fmt: str) -> Response:
    if session.status == SessionStatus.AWAITING_POINTS:
        raise ApiError(409, "no mask yet: session is awaiting margin points")
    masks = session.mask_history
    if round_idx is None:
        round_idx = len(masks) - 1
    if not (0 <= round_idx < len(masks)):
        raise ApiError(400, f"round {round_idx} out of range [0, {len(masks) - 1}]")
    mask = masks[round_idx]
    if fmt == "sgrid":
        return Response(write_sgrid_bytes(mask, DTYPE_UINT8), media_type="application/octet-stream")
    if fmt != "png":
        raise ApiError(400, f"unknown mask format {fmt!r} (sgrid|png)")
    data = mask.data
    if mask.rank == 3:
        if slice_idx is None:
            raise ApiError(400, "3D masks require a slice query parameter for PNG")
        if not (0 <= slice_idx < data.shape[0]):
            raise ApiError(400, f"slice {slice_idx} out of range [0, {data.shape[0] - 1}]")
        data = data[slice_idx]
    return Response(mask_to_png_bytes(data), media_type="image/png")


def create_app(
    session_dir: str | None = None,
    ttl_secs: float | None = None,
    config: PipelineConfig | None = None,
) -> FastAPI:
    session_dir = session_dir if session_dir is not None else os.environ.get("INTERSEG_SESSION_DIR")
    if ttl_secs is None:
        ttl_secs = float(os.environ.get("INTERSEG_TTL_SECS", DEFAULT_TTL_SECS))
    config = config or PipelineConfig()
    store = SessionStore(session_dir, ttl_secs)
    store.restore_all(config)

    app = FastAPI(title="interseg", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.exception_handler(ValidationError)
    async def _validation_error(_req, exc: ValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(IoError)
    async def _io_error(_req, exc: IoError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        raw = await request.body()
        if not raw:
            raise ApiError(400, "empty image payload")
        image = load_image_bytes(raw)
        session = SessionState(id=uuid.uuid4().hex, image=image)
        store.add(session)
        store.persist_image(session, raw)
        return _meta(session)

    def _locked(session_id: str):
        session = store.get(session_id)
        return session, session.lock

    @app.get("/sessions/{session_id}/meta")
    def get_meta(session_id: str):
        session, lock = _locked(session_id)
        with lock:
            return _meta(session)

    @app.post("/sessions/{session_id}/points")
    async def submit_points(session_id: str, request: Request):
        body = await request.json()
        session, lock = _locked(session_id)
        with lock:
            if session.status != SessionStatus.AWAITING_POINTS:
                raise ApiError(409, f"session is {session.status.value}, not awaiting_points")
            _run_points(session, body, config)
            store.persist_interactions(session, body, session.click_history)
            session.check_histories()
            return _meta(session)

    @app.post("/sessions/{session_id}/clicks")
    async def submit_clicks(session_id: str, request: Request):
        body = await request.json()
        session, lock = _locked(session_id)
        with lock:
            if session.status != SessionStatus.SEGMENTED:
                if session.status == SessionStatus.ACCEPTED:
                    raise ApiError(409, "session accepted")
                raise ApiError(409, "session is awaiting margin points")
            _run_clicks(session, body)
            store.persist_interactions(
                session,
                [
                    {"coords": list(p), "label": session.margin_points.label.value}
                    for p in session.margin_points.points
                ],
                session.click_history,
            )
            session.check_histories()
            return _meta(session)

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session, lock = _locked(session_id)
        with lock:
            if session.status != SessionStatus.SEGMENTED:
                if session.status == SessionStatus.ACCEPTED:
                    raise ApiError(409, "session accepted")
                raise ApiError(409, "session is awaiting margin points")
            if session.rounds() == 0:
                raise ApiError(400, "nothing to undo")
            session.click_history.pop()
            session.mask_history.pop()
            session.ctx_history.pop()
            store.persist_interactions(
                session,
                [
                    {"coords": list(p), "label": session.margin_points.label.value}
                    for p in session.margin_points.points
                ],
                session.click_history,
            )
            session.check_histories()
            return _meta(session)

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str):
        session, lock = _locked(session_id)
        with lock:
            if session.status != SessionStatus.SEGMENTED:
                if session.status == SessionStatus.ACCEPTED:
                    raise ApiError(409, "session already accepted")
                raise ApiError(409, "session is awaiting margin points")
            session.status = SessionStatus.ACCEPTED
            return _meta(session)

    @app.get("/sessions/{session_id}/mask")
    def get_mask(
        session_id: str,
        round: int | None = None,
        slice: int | None = None,
        format: str = "sgrid",
    ):
        session, lock = _locked(session_id)
        with lock:
            return _mask_response(session, round, slice, format)

    @app.get("/sessions/{session_id}/image")
    def get_image(session_id: str, slice: int | None = None):
        session, lock = _locked(session_id)
        with lock:
            data = session.image.data
            if session.image.rank == 3:
                if slice is None:
                    raise ApiError(400, "3D images require a slice query parameter")
                if not (0 <= slice < data.shape[0]):
                    raise ApiError(400, f"slice {slice} out of range [0, {data.shape[0] - 1}]")
                data = data[slice]
            return Response(image_to_png_bytes(data), media_type="image/png")

    return app


def run_server(host: str = "127.0.0.1", port: int | None = None, **app_kwargs) -> None:
    import uvicorn

    if port is None:
        port = int(os.environ.get("INTERSEG_PORT", 8008))
    uvicorn.run(create_app(**app_kwargs), host=host, port=port)
