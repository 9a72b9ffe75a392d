"""HTTP session service for interactive scribble segmentation.

Wire protocol (all bodies JSON, images and masks base64-encoded PNG):

    POST /sessions                    {"image_png": base64} -> {"id", "width", "height"}
    POST /sessions/{id}/scribbles     {"strokes": [{"label": "fg"|"bg"|"erase",
                                       "points": [[x, y], ...], "radius": r}]}
                                      -> {"fg_count", "bg_count"}
    POST /sessions/{id}/segment       optional config overrides -> 202 {"status"}
    GET  /sessions/{id}/result        -> {"status", "mask_png"?, "trace", "error"?}
    GET  /healthz                     -> {"status": "ok"}

Segmentation runs on a background thread, one run per session at a time;
clients poll the result endpoint. Scribble updates during a run are
rejected. Results are swapped in atomically under the session lock, so a
reader sees either the previous complete mask or the new one, never a
partial state. The store is in-memory with an optional spill directory
that persists sessions as PNG plus JSON for inspection and restart.
"""

from __future__ import annotations

import base64
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field, fields, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .core import BG, FG, UNLABELED, DfrfConfig, ImageObservation, LabelField, SeedMask
from .errors import DecodeError, DfrfError
from .inference import run_dfrf

DEFAULT_MAX_PIXELS = 4_000_000

STROKE_LABELS = {"fg": FG, "bg": BG, "erase": UNLABELED}


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def rasterize_stroke(points, radius, width, height) -> np.ndarray:
    """Pixels covered by a disc brush dragged along a polyline.

    The shared client/server rule: sample each segment at steps of at most
    half a pixel, stamp a filled disc of the given radius at every sample
    (a pixel (px, py) is covered when (px-cx)^2 + (py-cy)^2 <= r^2), and
    clip to the image bounds. Returns an (n, 2) array of unique (x, y)
    integer coordinates.
    """
    pts = [(float(x), float(y)) for x, y in points]
    centers = []
    if len(pts) == 1:
        centers.append(pts[0])
    else:
        for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
            dist = max(abs(x1 - x0), abs(y1 - y0))
            steps = max(1, int(np.ceil(dist * 2)))
            for s in range(steps + 1):
                t = s / steps
                centers.append((x0 + (x1 - x0) * t, y0 + (y1 - y0) * t))
    covered = set()
    r = float(radius)
    for cx, cy in centers:
        x_lo = max(0, int(np.floor(cx - r)))
        x_hi = min(width - 1, int(np.ceil(cx + r)))
        y_lo = max(0, int(np.floor(cy - r)))
        y_hi = min(height - 1, int(np.ceil(cy + r)))
        for py in range(y_lo, y_hi + 1):
            for px in range(x_lo, x_hi + 1):
                if (px - cx) ** 2 + (py - cy) ** 2 <= r * r:
                    covered.add((px, py))
    if not covered:
        return np.empty((0, 2), dtype=np.int64)
    return np.array(sorted(covered), dtype=np.int64)


@dataclass
class Session:
    id: str
    image: ImageObservation
    seed_states: np.ndarray  # (H, W) uint8, mutable working copy
    status: str = "IDLE"  # IDLE -> RUNNING -> DONE | ERROR -> RUNNING ...
    mask: LabelField | None = None
    trace: list = field(default_factory=list)
    error: str | None = None
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """Thread-safe in-memory session registry with optional disk spill."""

    def __init__(self, max_pixels: int = DEFAULT_MAX_PIXELS, state_dir: str | None = None):
        self.max_pixels = max_pixels
        self.state_dir = Path(state_dir) if state_dir else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    def create(self, png_bytes: bytes) -> Session:
        image = ImageObservation.from_png(png_bytes)
        if image.n_pixels > self.max_pixels:
            raise ServiceError(
                413, "TooLarge",
                f"image has {image.n_pixels} pixels, limit is {self.max_pixels}",
            )
        session = Session(
            id=uuid.uuid4().hex,
            image=image,
            seed_states=np.zeros((image.height, image.width), dtype=np.uint8),
        )
        with self._lock:
            self._sessions[session.id] = session
        self._spill(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "UnknownSession", f"no session {session_id}")
        return session

    def apply_scribbles(self, session_id: str, strokes: list) -> dict:
        session = self.get(session_id)
        with session.lock:
            if session.status == "RUNNING":
                raise ServiceError(
                    409, "AlreadyRunning", "scribble updates are rejected while a run is active"
                )
            h, w = session.seed_states.shape
            for stroke in strokes:
                label = STROKE_LABELS.get(str(stroke.get("label", "")).lower())
                if label is None:
                    raise ServiceError(400, "BadRequest", f"unknown stroke label {stroke.get('label')!r}")
                points = stroke.get("points", [])
                if not points:
                    continue
                for x, y in points:
                    if not (0 <= float(x) <= w - 1 and 0 <= float(y) <= h - 1):
                        raise ServiceError(
                            400, "OutOfBounds", f"stroke point ({x}, {y}) outside {w}x{h} image"
                        )
                pixels = rasterize_stroke(points, stroke.get("radius", 1.0), w, h)
                if pixels.size:
                    session.seed_states[pixels[:, 1], pixels[:, 0]] = label
            session.updated = time.time()
            counts = {
                "fg_count": int((session.seed_states == FG).sum()),
                "bg_count": int((session.seed_states == BG).sum()),
            }
        self._spill(session)
        return counts

    def start_run(self, session_id: str, overrides: dict | None) -> None:
        session = self.get(session_id)
        config = _config_from_overrides(overrides or {})
        with session.lock:
            if session.status == "RUNNING":
                raise ServiceError(409, "AlreadyRunning", "a run is already in progress")
            seeds = SeedMask(session.seed_states.copy())
            if seeds.fg_count < 5 or seeds.bg_count < 5:
                raise ServiceError(
                    400, "MissingSeedClass",
                    f"need at least 5 seed pixels per class, have fg={seeds.fg_count} bg={seeds.bg_count}",
                )
            session.status = "RUNNING"
            session.error = None
            session.updated = time.time()
        worker = threading.Thread(
            target=self._run, args=(session, seeds, config), daemon=True
        )
        worker.start()

    def _run(self, session: Session, seeds: SeedMask, config: DfrfConfig) -> None:
        try:
            mask, trace = run_dfrf(session.image, seeds, config)
            with session.lock:
                session.mask = mask
                session.trace = trace.to_jsonable()
                session.status = "DONE"
                session.updated = time.time()
        except Exception as exc:  # surface any failure to the client
            with session.lock:
                session.status = "ERROR"
                session.error = str(exc)
                session.updated = time.time()
        self._spill(session)

    def result(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            payload = {
                "status": session.status,
                "trace": list(session.trace),
                "error": session.error,
                "mask_png": None,
            }
            if session.mask is not None:
                payload["mask_png"] = base64.b64encode(session.mask.to_png()).decode()
        return payload

    def _spill(self, session: Session) -> None:
        if not self.state_dir:
            return
        with session.lock:
            target = self.state_dir / session.id
            target.mkdir(exist_ok=True)
            (target / "image.png").write_bytes(session.image.to_png())
            (target / "seeds.png").write_bytes(SeedMask(session.seed_states.copy()).to_png())
            if session.mask is not None:
                (target / "mask.png").write_bytes(session.mask.to_png())
            meta = {
                "id": session.id,
                "status": session.status if session.status != "RUNNING" else "IDLE",
                "error": session.error,
                "trace": session.trace,
                "created": session.created,
                "updated": session.updated,
            }
            (target / "meta.json").write_text(json.dumps(meta, indent=2))

    def _restore(self) -> None:
        for meta_path in sorted(self.state_dir.glob("*/meta.json")):
            try:
                meta = json.loads(meta_path.read_text())
                root = meta_path.parent
                image = ImageObservation.from_png((root / "image.png").read_bytes())
                seeds = SeedMask.from_png((root / "seeds.png").read_bytes())
                session = Session(
                    id=meta["id"],
                    image=image,
                    seed_states=seeds.states.copy(),
                    status=meta.get("status", "IDLE"),
                    error=meta.get("error"),
                    trace=meta.get("trace", []),
                    created=meta.get("created", time.time()),
                    updated=meta.get("updated", time.time()),
                )
                mask_path = root / "mask.png"
                if mask_path.is_file():
                    session.mask = LabelField.from_png(mask_path.read_bytes())
                self._sessions[session.id] = session
            except (OSError, KeyError, ValueError, DfrfError):
                continue


def _config_from_overrides(overrides: dict) -> DfrfConfig:
    preset = str(overrides.pop("preset", "desk")).lower()
    if preset == "desk":
        config = DfrfConfig.desk()
    elif preset == "full":
        config = DfrfConfig()
    else:
        raise ServiceError(400, "BadRequest", f"unknown preset {preset!r}")
    known = {f.name for f in fields(DfrfConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ServiceError(400, "BadRequest", f"unknown config fields: {sorted(unknown)}")
    try:
        return replace(config, **overrides)
    except (TypeError, ValueError) as exc:
        raise ServiceError(400, "BadRequest", f"bad config override: {exc}") from exc


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore = None  # set by make_server
    ui_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: dict | bytes, content_type="application/json"):
        body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _json_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            payload = json.loads(raw or b"{}")
        except json.JSONDecodeError as exc:
            raise ServiceError(400, "BadRequest", f"invalid JSON body: {exc}") from exc
        if not isinstance(payload, dict):
            raise ServiceError(400, "BadRequest", "body must be a JSON object")
        return payload

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            if self.path == "/healthz":
                self._send(200, {"status": "ok"})
                return
            m = re.fullmatch(r"/sessions/([0-9a-f]+)/result", self.path)
            if m:
                self._send(200, self.store.result(m.group(1)))
                return
            if self.ui_dir and self._serve_static():
                return
            self._send(404, {"error": "NotFound", "message": f"no route {self.path}"})
        except ServiceError as exc:
            self._send(exc.status, {"error": exc.code, "message": exc.message})

    def _serve_static(self) -> bool:
        rel = self.path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            return False
        types = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
                 ".png": "image/png", ".map": "application/json"}
        self._send(200, target.read_bytes(), types.get(target.suffix, "application/octet-stream"))
        return True

    def do_POST(self):
        try:
            if self.path == "/sessions":
                body = self._json_body()
                png_b64 = body.get("image_png")
                if not isinstance(png_b64, str):
                    raise ServiceError(400, "BadRequest", "image_png (base64 string) is required")
                try:
                    png = base64.b64decode(png_b64, validate=True)
                except Exception as exc:
                    raise ServiceError(400, "DecodeError", f"invalid base64: {exc}") from exc
                try:
                    session = self.store.create(png)
                except DecodeError as exc:
                    raise ServiceError(400, "DecodeError", str(exc)) from exc
                self._send(
                    200,
                    {
                        "id": session.id,
                        "width": session.image.width,
                        "height": session.image.height,
                    },
                )
                return
            m = re.fullmatch(r"/sessions/([0-9a-f]+)/scribbles", self.path)
            if m:
                body = self._json_body()
                strokes = body.get("strokes")
                if not isinstance(strokes, list):
                    raise ServiceError(400, "BadRequest", "strokes (list) is required")
                self._send(200, self.store.apply_scribbles(m.group(1), strokes))
                return
            m = re.fullmatch(r"/sessions/([0-9a-f]+)/segment", self.path)
            if m:
                body = self._json_body()
                self.store.start_run(m.group(1), body)
                self._send(202, {"status": "RUNNING"})
                return
            self._send(404, {"error": "NotFound", "message": f"no route {self.path}"})
        except ServiceError as exc:
            self._send(exc.status, {"error": exc.code, "message": exc.message})


def make_server(
    port: int = 8080,
    max_pixels: int = DEFAULT_MAX_PIXELS,
    state_dir: str | None = None,
    ui_dir: str | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    store = SessionStore(max_pixels=max_pixels, state_dir=state_dir)
    handler = type("BoundHandler", (_Handler,), {
        "store": store,
        "ui_dir": Path(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer(("0.0.0.0", port), handler)


def serve_forever(**kwargs) -> None:
    server = make_server(**kwargs)
    host, port = server.server_address
    print(f"dfrf service listening on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
