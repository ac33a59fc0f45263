"""HTTP facade over the analyzer: POST /api/analyze, GET /api/health.

Stateless and safe under concurrent requests: each analysis runs in its
own worker thread with a wall-clock timeout, and identical requests with
identical seeds produce identical response bytes. When a request omits
the seed it defaults to 0 so repeated calls stay reproducible. Verdict
order in the response follows the echoed ``input.edges`` (canonical
order), which may differ from the order edges were submitted in.

With a static directory configured, files are served under ``/`` while
the API stays under ``/api/``; this hosts the UI bundle same-origin.
"""

from __future__ import annotations

import functools
import json
import os
import threading
import uuid
from dataclasses import dataclass
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from ._version import __version__
from .engine import (
    DEFAULT_COND_LIMIT,
    DEFAULT_NSAMPLES,
    DEFAULT_TOL_ENTRY,
    DEFAULT_TOL_RANK,
    EngineError,
    analyze,
)
from .report import build_document, dumps_canonical, export_json
from .topology import TopologyError, validate_selections, validate_topology

MAX_BODY_BYTES = 1 << 20
DEFAULT_TIMEOUT_SECONDS = 10.0

_GRAPH_FIELDS = ("n", "edges", "excited", "measured")


@dataclass(frozen=True)
class ServiceConfig:
    static_dir: Optional[str]
    timeout_seconds: float
    cors: bool
    quiet: bool


class RequestError(Exception):
    """Client-visible request failure with an HTTP status and stable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _require_number(data: dict, name: str, minimum: float) -> Optional[float]:
    if name not in data or data[name] is None:
        return None
    value = data[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RequestError(400, "invalid_params", f"{name} must be a number")
    if value <= minimum:
        raise RequestError(400, "invalid_params", f"{name} must exceed {minimum:g}")
    return float(value)


def parse_request(data):
    """Validate an analyze request body.

    Graph structure problems map to 400, excitation/measurement set
    problems to 422, option problems to 400. Unknown fields (such as UI
    node positions) are ignored.
    """
    if not isinstance(data, dict):
        raise RequestError(400, "invalid_request", "request body must be a JSON object")
    missing = [f for f in _GRAPH_FIELDS if f not in data]
    if missing:
        raise RequestError(400, "missing_field",
                           f"missing required fields: {', '.join(missing)}")
    if not isinstance(data["edges"], list):
        raise RequestError(400, "invalid_graph", "edges must be a list of [j, i] pairs")
    try:
        topo = validate_topology(data["n"], data["edges"])
    except TopologyError as err:
        raise RequestError(400, "invalid_graph", str(err)) from err
    for name in ("excited", "measured"):
        if not isinstance(data[name], list):
            raise RequestError(422, "invalid_selection",
                               f"{name} must be a list of node indices")
    try:
        sets = validate_selections(topo, data["excited"], data["measured"])
    except TopologyError as err:
        raise RequestError(422, "invalid_selection", str(err)) from err

    opts = {}
    if "nsamples" in data and data["nsamples"] is not None:
        v = data["nsamples"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise RequestError(400, "invalid_params", "nsamples must be a positive integer")
        opts["nsamples"] = v
    if "seed" in data and data["seed"] is not None:
        v = data["seed"]
        if isinstance(v, bool) or not isinstance(v, int):
            raise RequestError(400, "invalid_params", "seed must be an integer")
        opts["seed"] = v
    for name, minimum in (("tol_rank", 0.0), ("tol_entry", 0.0), ("cond_limit", 1.0)):
        value = _require_number(data, name, minimum)
        if value is not None:
            opts[name] = value
    return topo, sets, opts


class _Handler(SimpleHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = f"netident/{__version__}"

    @property
    def config(self) -> ServiceConfig:
        return self.server.config

    def log_message(self, fmt, *args):
        if not self.config.quiet:
            super().log_message(fmt, *args)

    def _send_payload(self, status: int, payload: bytes,
                      content_type: str = "application/json",
                      extra_headers: Optional[dict] = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        if self.config.cors:
            self.send_header("Access-Control-Allow-Origin", "*")
        for key, value in (extra_headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, body: dict,
                   extra_headers: Optional[dict] = None) -> None:
        self._send_payload(status, dumps_canonical(body), extra_headers=extra_headers)

    def _send_error_json(self, status: int, code: str, message: str,
                         incident: Optional[str] = None,
                         extra_headers: Optional[dict] = None) -> None:
        error = {"code": code, "message": message}
        if incident is not None:
            error["id"] = incident
        self._send_json(status, {"error": error}, extra_headers=extra_headers)

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/health":
            self._send_json(200, {"status": "ok", "version": __version__})
        elif path == "/api/analyze":
            self._send_error_json(405, "method_not_allowed", "use POST",
                                  extra_headers={"Allow": "POST"})
        elif path.startswith("/api/"):
            self._send_error_json(404, "not_found", f"no such endpoint: {path}")
        elif self.config.static_dir:
            super().do_GET()
        else:
            self._send_error_json(404, "not_found",
                                  "no static directory configured; API lives under /api/")

    def do_OPTIONS(self):
        path = self.path.split("?", 1)[0]
        if self.config.cors and path.startswith("/api/"):
            self._send_payload(
                204,
                b"",
                extra_headers={
                    "Access-Control-Allow-Methods": "GET, POST, OPTIONS",
                    "Access-Control-Allow-Headers": "Content-Type",
                },
            )
        else:
            self._send_error_json(405, "method_not_allowed", "OPTIONS not supported",
                                  extra_headers={"Allow": "GET, POST"})

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path != "/api/analyze":
            self._send_error_json(404, "not_found", f"no such endpoint: {path}")
            return
        try:
            payload = self._analyze_response()
        except RequestError as err:
            self._send_error_json(err.status, err.code, err.message)
            return
        except Exception:
            incident = uuid.uuid4().hex
            self.log_error("internal error, incident %s", incident)
            self._send_error_json(500, "internal_error",
                                  f"internal error (incident {incident})",
                                  incident=incident)
            return
        self._send_payload(200, payload)

    def _read_body(self) -> bytes:
        # every rejection here leaves body bytes unread on the socket, so
        # the connection cannot be reused for a further request
        if "Content-Length" not in self.headers:
            self.close_connection = True
            raise RequestError(411, "length_required", "Content-Length header required")
        try:
            length = int(self.headers["Content-Length"])
        except ValueError:
            self.close_connection = True
            raise RequestError(400, "invalid_request", "Content-Length is not an integer")
        if length > MAX_BODY_BYTES:
            self.close_connection = True
            raise RequestError(413, "body_too_large",
                               f"body exceeds {MAX_BODY_BYTES} bytes")
        if self.headers.get_content_type() != "application/json":
            self.close_connection = True
            raise RequestError(415, "unsupported_media_type",
                               "Content-Type must be application/json")
        return self.rfile.read(length)

    def _analyze_response(self) -> bytes:
        body = self._read_body()
        try:
            data = json.loads(body)
        except json.JSONDecodeError as err:
            raise RequestError(400, "malformed_json",
                               f"line {err.lineno} column {err.colno}: {err.msg}") from err
        topo, sets, opts = parse_request(data)

        box: dict = {}

        def work():
            try:
                box["result"] = analyze(
                    topo,
                    sets,
                    nsamples=opts.get("nsamples", DEFAULT_NSAMPLES),
                    seed=opts.get("seed", 0),
                    tol_rank=opts.get("tol_rank", DEFAULT_TOL_RANK),
                    tol_entry=opts.get("tol_entry", DEFAULT_TOL_ENTRY),
                    cond_limit=opts.get("cond_limit", DEFAULT_COND_LIMIT),
                )
            except Exception as err:
                box["error"] = err

        worker = threading.Thread(target=work, daemon=True)
        worker.start()
        worker.join(self.config.timeout_seconds)
        if worker.is_alive():
            raise RequestError(408, "timeout",
                               f"analysis exceeded {self.config.timeout_seconds:g} s")
        if "error" in box:
            err = box["error"]
            if isinstance(err, EngineError):
                raise RequestError(422, "analysis_failed", str(err))
            raise err
        return export_json(build_document(topo, sets, box["result"]))


def create_server(
    host: str = "127.0.0.1",
    port: int = 8000,
    static_dir: Optional[str] = None,
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS,
    cors: bool = False,
    quiet: bool = False,
) -> ThreadingHTTPServer:
    """Build a ready-to-run threaded server; call serve_forever() on it.

    Port 0 binds an ephemeral port, readable from server.server_address.
    """
    if timeout_seconds <= 0:
        raise ValueError("timeout_seconds must be positive")
    if static_dir is not None and not os.path.isdir(static_dir):
        raise ValueError(f"static directory does not exist: {static_dir}")
    handler = functools.partial(_Handler, directory=static_dir or os.getcwd())
    server = ThreadingHTTPServer((host, port), handler)
    server.config = ServiceConfig(
        static_dir=static_dir,
        timeout_seconds=timeout_seconds,
        cors=cors,
        quiet=quiet,
    )
    return server
