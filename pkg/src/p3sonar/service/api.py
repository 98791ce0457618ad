"""HTTP JSON/PNG API over the scan store.

Endpoints:
    GET  /api/scans
    GET  /api/scans/{id}
    GET  /api/scans/{id}/raster?mode=rect|fan&processed=0|1[&ppm=60]
    GET  /api/scans/{id}/mask?annotator=NAME
    PUT  /api/scans/{id}/mask?annotator=NAME           (PNG body)
    POST /api/simulate        {"experiment": 1..10 | "scene": {...}, "seed": N}
    POST /api/preprocess      {"scan_id": ..., "roi_min": m, "roi_max": m}
    GET  /api/eval?scan={id}&pred={annotator}[&true=simulator]

Errors are JSON bodies: 404 unknown resource, 409 dimension mismatch,
422 malformed request. Mask PUTs are last-writer-wins; the response says
whether the write clobbered a revision the client had not seen.
"""

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlparse, parse_qs

from .. import simulator
from ..preprocess import RoiSpec, ThresholdRule, preprocess_sweep
from .store import (DimensionMismatchError, ScanStore, StoreError,
                    UnknownScanError)

__all__ = ["ApiServer", "serve_http"]

from .store import ANNOTATOR_RE as _ANNOTATOR_RE


class _ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "p3sonar"

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):
        if self.server.verbose:
            super().log_message(fmt, *args)

    @property
    def store(self) -> ScanStore:
        return self.server.store

    def _send(self, status: int, body: bytes, content_type: str,
              headers: dict | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, If-Match")
        self.send_header("Access-Control-Expose-Headers", "ETag")
        for key, value in (headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, doc, headers: dict | None = None) -> None:
        self._send(status, json.dumps(doc).encode("utf-8"),
                   "application/json", headers)

    def _error(self, status: int, message: str) -> None:
        self._json(status, {"error": message})

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _route(self, method: str) -> None:
        url = urlparse(self.path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            handled = self._handle(method, url.path.rstrip("/"), query)
        except UnknownScanError as exc:
            self._error(404, str(exc))
            return
        except DimensionMismatchError as exc:
            self._error(409, str(exc))
            return
        except (StoreError, ValueError) as exc:
            self._error(422, str(exc))
            return
        if not handled:
            self._error(404, f"no route for {method} {url.path}")

    # -- routes ------------------------------------------------------------

    def _handle(self, method: str, path: str, query: dict) -> bool:
        if method == "OPTIONS":
            self._send(204, b"", "text/plain")
            return True
        if path == "/api/scans" and method == "GET":
            self._json(200, {"scans": self.store.list_scans()})
            return True
        if path == "/api/simulate" and method == "POST":
            return self._simulate()
        if path == "/api/preprocess" and method == "POST":
            return self._preprocess()
        if path == "/api/eval" and method == "GET":
            return self._eval(query)
        m = re.fullmatch(r"/api/scans/([^/]+)", path)
        if m and method == "GET":
            self._json(200, self.store.get(m.group(1)).detail())
            return True
        m = re.fullmatch(r"/api/scans/([^/]+)/raster", path)
        if m and method == "GET":
            return self._raster(m.group(1), query)
        m = re.fullmatch(r"/api/scans/([^/]+)/mask", path)
        if m:
            return self._mask(method, m.group(1), query)
        return False

    def _simulate(self) -> bool:
        doc = self._parse_json_body()
        if doc is None:
            return True
        seed = int(doc.get("seed", 0))
        if "experiment" in doc:
            scene = simulator.experiment_scene(int(doc["experiment"]), seed)
        elif "scene" in doc:
            scene = _scene_from_json(doc["scene"], seed)
        else:
            self._error(422, "body needs 'experiment' or 'scene'")
            return True
        sweep, truth = simulator.simulate_sweep(scene, simulator.pool_config())
        scan_id = self.store.add_sweep(sweep, truth.object_mask())
        self._json(200, {"scan_id": scan_id})
        return True

    def _preprocess(self) -> bool:
        doc = self._parse_json_body()
        if doc is None:
            return True
        if "scan_id" not in doc:
            self._error(422, "body needs 'scan_id'")
            return True
        res = self.store.get(str(doc["scan_id"]))
        roi = RoiSpec(float(doc.get("roi_min", 0.75)),
                      float(doc.get("roi_max", 6.0)))
        rule = ThresholdRule(doc.get("rule", "2mu+sigma"))
        processed = preprocess_sweep(res.raw, roi, rule)
        self.store.put_processed(res.scan_id, processed)
        self._json(200, {"scan_id": res.scan_id})
        return True

    def _eval(self, query: dict) -> bool:
        if "scan" not in query or "pred" not in query:
            self._error(422, "need scan= and pred= query parameters")
            return True
        report = self.store.evaluate_masks(
            query["scan"], query["pred"],
            true_annotator=query.get("true", "simulator"))
        self._json(200, report.as_dict())
        return True

    def _raster(self, scan_id: str, query: dict) -> bool:
        mode = query.get("mode", "rect")
        if mode not in ("rect", "fan"):
            self._error(422, f"mode must be rect or fan, got {mode!r}")
            return True
        processed = query.get("processed", "0") not in ("0", "false", "")
        ppm = float(query.get("ppm", 60.0))
        png = self.store.raster_png(scan_id, mode=mode, processed=processed,
                                    pixels_per_meter=ppm)
        self._send(200, png, "image/png")
        return True

    def _mask(self, method: str, scan_id: str, query: dict) -> bool:
        annotator = query.get("annotator", "")
        if not _ANNOTATOR_RE.fullmatch(annotator):
            self._error(422, f"annotator must match {_ANNOTATOR_RE.pattern}")
            return True
        if method == "GET":
            data, etag = self.store.get_mask(scan_id, annotator)
            self._send(200, data, "image/png", {"ETag": etag})
            return True
        if method == "PUT":
            body = self._read_body()
            if not body:
                self._error(422, "empty mask body")
                return True
            previous = self.store.mask_etag(scan_id, annotator)
            claimed = self.headers.get("If-Match")
            try:
                etag = self.store.put_mask(scan_id, annotator, body)
            except (OSError, SyntaxError, ValueError) as exc:
                self._error(422, f"mask body is not a decodable PNG: {exc}")
                return True
            conflict = bool(claimed and previous and claimed != previous)
            self._json(200, {"scan_id": scan_id, "annotator": annotator,
                             "etag": etag, "conflict": conflict},
                       {"ETag": etag})
            return True
        return False

    def _parse_json_body(self):
        try:
            return json.loads(self._read_body() or b"{}")
        except json.JSONDecodeError as exc:
            self._error(422, f"malformed JSON body: {exc}")
            return None

    # -- verb entry points ---------------------------------------------------

    def do_GET(self):  # noqa: N802  (http.server naming)
        self._route("GET")

    def do_PUT(self):  # noqa: N802
        self._route("PUT")

    def do_POST(self):  # noqa: N802
        self._route("POST")

    def do_OPTIONS(self):  # noqa: N802
        self._route("OPTIONS")


def _scene_from_json(doc: dict, seed: int) -> simulator.PoolScene:
    objects = tuple(
        simulator.SceneObject(
            kind=o["kind"], center_x_m=float(o["x"]),
            center_y_m=float(o.get("y", 0.0)),
            width_m=float(o.get("width", 0.0)),
            reflectivity=float(o.get("reflectivity", 0.0)))
        for o in doc.get("objects", ()))
    noise = simulator.NoiseModel(seed=seed)
    return simulator.PoolScene(
        width_m=float(doc.get("width", 3.0)),
        length_m=float(doc.get("length", 6.0)),
        wall_reflectivity=float(doc.get("wall_reflectivity", 0.9)),
        sonar_lateral_offset_m=float(doc.get("sonar_lateral_offset", 0.0)),
        objects=objects, noise=noise, name=str(doc.get("name", "custom")))


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, store: ScanStore, verbose: bool = False):
        super().__init__(address, _ApiHandler)
        self.store = store
        self.verbose = verbose

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_http(host: str, port: int, data_dir, verbose: bool = False
               ) -> ApiServer:
    server = ApiServer((host, port), ScanStore(data_dir), verbose=verbose)
    server.serve_background()
    return server
