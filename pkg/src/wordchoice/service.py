"""HTTP suggestion service.

``POST /api/suggest`` ranks replacements for one token of a pre-split
sentence; ``GET /api/health`` reports the loaded model.  The model and
lexicon are immutable after startup, so request handling is fully
concurrent and responses are deterministic: identical requests yield
byte-identical bodies apart from the ``latency_ms`` field.

The optional static directory is served under ``/`` for the browser
editor; clients send tokens, never raw text, keeping tokenization on the
corpus side.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .corpus import SentenceTooLongError, encode
from .posfilter import TagSource, filter_candidates

INTERNAL_K = 100
MAX_K = 100
DEFAULT_K = 10


class ApiError(Exception):
    """Maps straight to an HTTP status + machine-readable reason code."""

    def __init__(self, status: int, reason: str):
        super().__init__(reason)
        self.status = status
        self.reason = reason


class SuggestService:
    """Request logic, independent of the HTTP plumbing (unit-testable)."""

    def __init__(self, model=None, lexicon: TagSource | None = None,
                 static_dir: str | None = None):
        self.model = model
        self.lexicon = lexicon
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self.started = time.monotonic()
        self.request_count = 0
        self._count_lock = threading.Lock()

    def _require_model(self):
        if self.model is None:
            raise ApiError(503, "model_not_loaded")

    def suggest(self, payload) -> dict:
        """Validate a SuggestRequest payload and produce the response dict."""
        self._require_model()
        if not isinstance(payload, dict):
            raise ApiError(400, "bad_request_body")
        tokens = payload.get("tokens")
        if not isinstance(tokens, list) or not tokens or not all(
                isinstance(t, str) and t for t in tokens):
            raise ApiError(400, "tokens_must_be_nonempty_strings")
        target_index = payload.get("target_index")
        if not isinstance(target_index, int) or isinstance(target_index, bool) \
                or not 0 <= target_index < len(tokens):
            raise ApiError(400, "target_out_of_range")
        k = payload.get("k", DEFAULT_K)
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
            raise ApiError(400, "k_out_of_range")
        filter_pos = payload.get("filter_pos", True)
        if not isinstance(filter_pos, bool):
            raise ApiError(400, "filter_pos_must_be_bool")
        model_name = payload.get("model")
        if model_name is not None and model_name != self.model.name:
            raise ApiError(400, "unknown_model")

        started = time.perf_counter()
        try:
            sent = encode([t.lower() for t in tokens], self.model.vocab,
                          self.model.hyper.max_len)
        except SentenceTooLongError:
            raise ApiError(400, "sentence_too_long")
        rank_fn = getattr(self.model, "suggest", None) or self.model.rank
        ranked = rank_fn(sent, target_index + 1, INTERNAL_K)
        bypassed = False
        if filter_pos and self.lexicon is not None:
            result = filter_candidates(self.lexicon, tokens[target_index], ranked)
            ranked, bypassed = result.suggestions, result.bypassed
        ranked = ranked[:k]
        with self._count_lock:
            self.request_count += 1
        return {
            "suggestions": [
                {"word": s.word, "probability": s.score, "rank": r}
                for r, s in enumerate(ranked, start=1)
            ],
            "bypassed_pos_filter": bypassed,
            "model": self.model.name,
            "latency_ms": (time.perf_counter() - started) * 1000.0,
        }

    def health(self) -> dict:
        self._require_model()
        return {
            "model": self.model.name,
            "vocab_size": len(self.model.vocab),
            "hyperparams": self.model.hyper.to_dict(),
            "uptime_s": time.monotonic() - self.started,
        }


def _encode_body(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def make_handler(service: SuggestService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, status: int, obj: dict) -> None:
            body = _encode_body(obj)
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path != "/api/suggest":
                self._send_json(404, {"error": "not_found"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length).decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError):
                    raise ApiError(400, "bad_json")
                self._send_json(200, service.suggest(payload))
            except ApiError as exc:
                self._send_json(exc.status, {"error": exc.reason})

        def do_GET(self):
            if self.path == "/api/health":
                try:
                    self._send_json(200, service.health())
                except ApiError as exc:
                    self._send_json(exc.status, {"error": exc.reason})
                return
            self._serve_static()

        def _serve_static(self):
            if service.static_dir is None:
                if self.path in ("/", "/index.html"):
                    body = (b"wordchoice suggestion service\n"
                            b"POST /api/suggest   GET /api/health\n")
                    self.send_response(200)
                    self.send_header("Content-Type", "text/plain; charset=utf-8")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                else:
                    self._send_json(404, {"error": "not_found"})
                return
            rel = self.path.lstrip("/") or "index.html"
            target = (service.static_dir / rel).resolve()
            if not target.is_relative_to(service.static_dir) or not target.is_file():
                self._send_json(404, {"error": "not_found"})
                return
            body = target.read_bytes()
            ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    # default listen backlog (5) drops connections under a request storm
    request_queue_size = 128


def make_server(service: SuggestService, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind a threaded server (port 0 picks an ephemeral port)."""
    return _Server((host, port), make_handler(service))


def serve_forever(service: SuggestService, host: str, port: int) -> None:
    server = make_server(service, host, port)
    print(f"serving on http://{server.server_address[0]}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
