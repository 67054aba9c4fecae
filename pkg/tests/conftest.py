from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


def _topics_of(text: str) -> set[str]:
    return {
        tok[:3]
        for tok in text.split()
        if len(tok) >= 3 and tok[0] == "t" and tok[1:3].isdigit()
    }


def topic_overlap_score(u1: str, u2: str) -> float:
    """Deterministic stand-in for a trained coherence model: 1.0 when the
    utterances share a synthetic-topic prefix (tNN... tokens), else 0.0;
    0.5 when a side carries no recognizable token."""
    t1, t2 = _topics_of(u1), _topics_of(u2)
    if not t1 or not t2:
        return 0.5
    return 1.0 if t1 & t2 else 0.0


class StubScorerServer:
    """Minimal in-process server speaking the scorer wire protocol."""

    def __init__(self, score_fn=topic_overlap_score, max_batch: int = 64):
        self.score_fn = score_fn
        self.max_batch = max_batch
        self.request_log: list[int] = []  # batch sizes of /score posts

        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _reply(self, status: int, obj: dict):
                body = json.dumps(obj).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path == "/health":
                    self._reply(200, {"status": "ok"})
                else:
                    self._reply(404, {"error": "not found"})

            def do_POST(self):
                if self.path != "/score":
                    self._reply(404, {"error": "not found"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                    pairs = payload["pairs"]
                    assert isinstance(pairs, list)
                    assert all(isinstance(p, list) and len(p) == 2 for p in pairs)
                except Exception:
                    self._reply(400, {"error": "malformed request"})
                    return
                if len(pairs) > outer.max_batch:
                    self._reply(413, {"error": f"batch limit is {outer.max_batch} pairs"})
                    return
                outer.request_log.append(len(pairs))
                scores = [max(0.0, min(1.0, float(outer.score_fn(p[0], p[1])))) for p in pairs]
                self._reply(200, {"scores": scores})

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def start(self):
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_scorer():
    server = StubScorerServer().start()
    yield server
    server.stop()
