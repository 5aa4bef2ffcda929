"""Interactive segmentation service: sessions, seed painting, solves, overlays.

A session holds one uploaded image, the current seed set, a model config and
the last solve result. Mutations bump a revision counter; results are tagged
with the revision they were computed from, and stale results are still
served (with an ``X-Stale`` header) until the next solve. Sessions live in
memory with LRU eviction and an idle TTL; per-session solves are serialized
(concurrent solve requests get 409).
"""

from __future__ import annotations

import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from PIL import Image as PILImage

from . import image_io
from .evaluation import place_next_seed
from .graph_core import ProbabilityField, SeedMap, SolverConvergenceError, segment
from .noise_models import NoiseModelConfig, model_from_name

DEFAULT_MAX_PIXELS = 4_194_304
DEFAULT_SESSION_CAP = 32
DEFAULT_IDLE_TTL = 30 * 60.0


@dataclass
class Session:
    id: str
    image: np.ndarray
    model: NoiseModelConfig
    k: int = 1
    seeds: SeedMap | None = None
    revision: int = 0
    result: ProbabilityField | None = None
    result_revision: int | None = None
    result_labels_png: bytes | None = None
    ground_truth: np.ndarray | None = None
    last_used: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)
    solve_lock: threading.Lock = field(default_factory=threading.Lock)

    def summary(self) -> dict:
        h, w = self.image.shape[:2]
        return {
            "id": self.id,
            "width": w,
            "height": h,
            "channels": 1 if self.image.ndim == 2 else self.image.shape[2],
            "model": getattr(self.model, "kind", "unknown"),
            "k": self.k,
            "revision": self.revision,
            "seeds": self.seeds.to_points() if self.seeds else [],
            "result_revision": self.result_revision,
            "stale": self.result_revision is not None and self.result_revision != self.revision,
            "has_ground_truth": self.ground_truth is not None,
        }


class SessionStore:
    """Thread-safe LRU map of sessions with idle expiry."""

    def __init__(self, cap: int = DEFAULT_SESSION_CAP, ttl: float = DEFAULT_IDLE_TTL):
        self.cap = cap
        self.ttl = ttl
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def _evict(self) -> None:
        now = time.monotonic()
        expired = [sid for sid, s in self._sessions.items() if now - s.last_used > self.ttl]
        for sid in expired:
            del self._sessions[sid]
        while len(self._sessions) > self.cap:
            oldest = min(self._sessions.values(), key=lambda s: s.last_used)
            del self._sessions[oldest.id]

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session
            self._evict()

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_used = time.monotonic()
            return session

    def delete(self, sid: str) -> None:
        with self._lock:
            if sid not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown session")
            del self._sessions[sid]


def _decode_upload(data: bytes, max_pixels: int) -> np.ndarray:
    try:
        if data[:2] == b"P5":
            import tempfile, os

            # PIL reads most PGMs, but 16-bit handling is safer via our reader
            fd, tmp = tempfile.mkstemp(suffix=".pgm")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                img = image_io.read_pgm(tmp)
            finally:
                os.unlink(tmp)
        else:
            with PILImage.open(io.BytesIO(data)) as im:
                if im.mode not in ("L", "I", "I;16", "F"):
                    im = im.convert("L")
                img = np.asarray(im, dtype=float)
    except HTTPException:
        raise
    except Exception:
        raise HTTPException(status_code=400, detail="undecodable image") from None
    if img.size == 0:
        raise HTTPException(status_code=400, detail="empty image")
    if img.shape[0] * img.shape[1] > max_pixels:
        raise HTTPException(status_code=413, detail="image exceeds the pixel limit")
    return img


def _parse_model(spec: str | None) -> tuple[NoiseModelConfig, int]:
    cfg = {"model": "poisson"}
    if spec:
        try:
            cfg.update(json.loads(spec))
        except json.JSONDecodeError:
            raise HTTPException(status_code=400, detail="model config is not valid JSON")
    try:
        model = model_from_name(cfg.get("model", "poisson"), beta=cfg.get("beta"))
        k = int(cfg.get("k", 1))
        if k < 1:
            raise ValueError("k must be >= 1")
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return model, k


def create_app(
    max_pixels: int = DEFAULT_MAX_PIXELS,
    static_dir: str | None = None,
    session_cap: int = DEFAULT_SESSION_CAP,
    idle_ttl: float = DEFAULT_IDLE_TTL,
) -> FastAPI:
    app = FastAPI(title="noisewalker service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Stale"],
    )
    store = SessionStore(cap=session_cap, ttl=idle_ttl)
    app.state.store = store

    @app.post("/api/sessions", status_code=201)
    async def create_session(image: UploadFile = File(...), model: str | None = Form(None)):
        data = await image.read()
        img = _decode_upload(data, max_pixels)
        model_cfg, k = _parse_model(model)
        session = Session(id=uuid.uuid4().hex, image=img, model=model_cfg, k=k)
        store.add(session)
        return {"id": session.id}

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        return store.get(sid).summary()

    @app.delete("/api/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        store.delete(sid)
        return Response(status_code=204)

    @app.put("/api/sessions/{sid}/seeds")
    def put_seeds(sid: str, seeds: list[dict]):
        session = store.get(sid)
        try:
            points = image_io.validate_seed_list(seeds)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if not points:
            raise HTTPException(status_code=422, detail="seed list must not be empty")
        try:
            seed_map = SeedMap.from_points(session.image.shape[:2], points)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with session.lock:
            session.seeds = seed_map
            session.revision += 1
            return {"revision": session.revision}

    @app.put("/api/sessions/{sid}/model")
    def put_model(sid: str, config: dict):
        session = store.get(sid)
        model_cfg, k = _parse_model(json.dumps(config))
        with session.lock:
            session.model = model_cfg
            session.k = k
            session.revision += 1
            return {"revision": session.revision}

    @app.post("/api/sessions/{sid}/segment")
    def run_segment(sid: str):
        session = store.get(sid)
        with session.lock:
            seeds = session.seeds
            revision = session.revision
        if seeds is None or len(seeds.label_ids()) < 2:
            raise HTTPException(status_code=422, detail="need seeds for at least 2 labels")
        if not session.solve_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a solve is already running")
        try:
            start = time.monotonic()
            try:
                result, labels = segment(session.image, seeds, session.model, k=session.k)
            except SolverConvergenceError as exc:
                raise HTTPException(status_code=500, detail=str(exc))
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            elapsed = time.monotonic() - start
            png = image_io.label_png_bytes(labels)
            with session.lock:
                session.result = result
                session.result_revision = revision
                session.result_labels_png = png
            return {"revision": revision, "seconds": elapsed}
        finally:
            session.solve_lock.release()

    def _result_or_404(session: Session) -> tuple[ProbabilityField, bytes, bool]:
        with session.lock:
            if session.result is None:
                raise HTTPException(status_code=404, detail="no result computed yet")
            stale = session.result_revision != session.revision
            return session.result, session.result_labels_png, stale

    @app.get("/api/sessions/{sid}/labels.png")
    def get_labels(sid: str):
        session = store.get(sid)
        _, png, stale = _result_or_404(session)
        return Response(png, media_type="image/png", headers={"X-Stale": str(stale).lower()})

    @app.get("/api/sessions/{sid}/prob/{label}.pfm")
    def get_probability(sid: str, label: int):
        session = store.get(sid)
        result, _, stale = _result_or_404(session)
        ids = result.labels.tolist()
        if label not in ids:
            raise HTTPException(status_code=404, detail=f"label {label} not in result")
        plane = result.probabilities[ids.index(label)]
        return Response(
            image_io.pfm_bytes(plane),
            media_type="application/octet-stream",
            headers={"X-Stale": str(stale).lower()},
        )

    @app.get("/api/sessions/{sid}/overlay.png")
    def get_overlay(sid: str):
        session = store.get(sid)
        result, _, stale = _result_or_404(session)
        png = image_io.render_overlay(session.image, result.argmax_map)
        return Response(png, media_type="image/png", headers={"X-Stale": str(stale).lower()})

    @app.post("/api/sessions/{sid}/suggest")
    def suggest_seed(sid: str, body: dict | None = None):
        session = store.get(sid)
        if body and "truth" in body:
            truth = np.asarray(body["truth"], dtype=np.int32)
            if truth.shape != session.image.shape[:2]:
                raise HTTPException(status_code=422, detail="ground truth shape mismatch")
            with session.lock:
                session.ground_truth = truth
        with session.lock:
            truth = session.ground_truth
            result = session.result
            seeds = session.seeds
        if truth is None:
            raise HTTPException(status_code=422, detail="no ground truth attached")
        if result is None or seeds is None:
            raise HTTPException(status_code=422, detail="segment before asking for a suggestion")
        new_seeds, converged = place_next_seed(truth, result.argmax_map, seeds)
        if converged:
            return {"converged": True}
        added = [p for p in new_seeds.to_points() if p not in seeds.to_points()]
        return {"converged": False, **added[0]}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
