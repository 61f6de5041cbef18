"""Local HTTP service for landmark annotation.

Serves the images awaiting annotation, accepts validated landmark files from
the browser tool, and hosts the static annotator UI.  Single-process,
thread-per-request; writes are serialized per image id.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from ._io import atomic_write_json
from .errors import DataError
from .geometry import landmarks_from_json

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")
CONTENT_TYPES = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".bmp": "image/bmp",
    ".html": "text/html; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".json": "application/json",
}


def default_ui_dir() -> Path:
    return Path(__file__).parent / "annotator_ui"


class AnnotationState:
    def __init__(self, images_dir, out_dir):
        self.images_dir = Path(images_dir)
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def image_files(self) -> dict[str, Path]:
        files = {}
        for path in sorted(self.images_dir.iterdir()):
            if path.suffix.lower() in IMAGE_EXTENSIONS and path.is_file():
                files[path.stem] = path
        return files

    def landmarks_path(self, image_id: str) -> Path:
        return self.out_dir / f"{image_id}.json"

    def lock_for(self, image_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(image_id, threading.Lock())


class AnnotationHandler(BaseHTTPRequestHandler):
    state: AnnotationState
    ui_dir: Path

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, body: bytes, content_type: str):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, obj):
        self._send(code, json.dumps(obj, sort_keys=True).encode(), "application/json")

    def _image_id(self, prefix: str) -> str | None:
        image_id = self.path[len(prefix):].split("?", 1)[0]
        if not image_id or "/" in image_id or ".." in image_id:
            return None
        return image_id

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/images":
            files = self.state.image_files()
            show_all = "all=1" in (self.path.split("?", 1) + [""])[1]
            images = []
            for image_id, file in files.items():
                annotated = self.state.landmarks_path(image_id).exists()
                if annotated and not show_all:
                    continue
                images.append({"id": image_id, "file": file.name, "annotated": annotated})
            self._send_json(200, {"images": images})
        elif path.startswith("/api/image/"):
            image_id = self._image_id("/api/image/")
            file = self.state.image_files().get(image_id or "")
            if file is None:
                self._send_json(404, {"error": f"unknown image id {image_id!r}"})
                return
            self._send(200, file.read_bytes(), CONTENT_TYPES.get(file.suffix.lower(), "application/octet-stream"))
        elif path.startswith("/api/landmarks/"):
            image_id = self._image_id("/api/landmarks/")
            if image_id is None:
                self._send_json(404, {"error": "bad image id"})
                return
            lm_path = self.state.landmarks_path(image_id)
            if not lm_path.exists():
                self._send_json(404, {"error": f"no landmarks stored for {image_id!r}"})
                return
            self._send(200, lm_path.read_bytes(), "application/json")
        else:
            self._serve_static(path)

    def do_POST(self):
        if not self.path.startswith("/api/landmarks/"):
            self._send_json(404, {"error": "unknown endpoint"})
            return
        image_id = self._image_id("/api/landmarks/")
        if image_id is None or image_id not in self.state.image_files():
            self._send_json(404, {"error": f"unknown image id {image_id!r}"})
            return
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": f"invalid JSON: {exc}"})
            return
        try:
            landmarks_from_json(payload)  # full schema + invariant validation
        except DataError as exc:
            self._send_json(422, {"error": str(exc)})
            return
        with self.state.lock_for(image_id):
            atomic_write_json(self.state.landmarks_path(image_id), payload)
        self._send_json(200, {"saved": image_id})

    def _serve_static(self, path: str):
        name = "index.html" if path in ("/", "") else path.lstrip("/")
        if ".." in name:
            self._send_json(404, {"error": "not found"})
            return
        file = self.ui_dir / name
        if not file.is_file():
            self._send_json(404, {"error": f"no such asset: {name}"})
            return
        self._send(200, file.read_bytes(), CONTENT_TYPES.get(file.suffix.lower(), "application/octet-stream"))


def make_server(images_dir, out_dir, port: int = 0, ui_dir=None) -> ThreadingHTTPServer:
    """Build the HTTP server (not yet serving); port 0 picks a free port."""
    state = AnnotationState(images_dir, out_dir)
    handler = type(
        "BoundAnnotationHandler",
        (AnnotationHandler,),
        {"state": state, "ui_dir": Path(ui_dir) if ui_dir else default_ui_dir()},
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(images_dir, out_dir, port: int, ui_dir=None):
    server = make_server(images_dir, out_dir, port, ui_dir)
    host, actual_port = server.server_address
    print(json.dumps({"serving": f"http://{host}:{actual_port}/", "port": actual_port}, sort_keys=True), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
