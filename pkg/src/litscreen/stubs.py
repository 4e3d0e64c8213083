"""Deterministic stub servers for tests and local development.

* Stub model server — speaks the text-generation wire contract
  (POST /generate). Answers follow a fixed script cycled per request, or a
  constant default answer.
* Stub connector server — speaks the connector wire contract
  (GET /search) over a JSON corpus file or a synthetic corpus of a given
  size.

Both are stdlib ThreadingHTTPServer instances: importable for in-process
test use and runnable via the CLI.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse


class _SilentHandler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):  # keep test output clean
        pass

    def _send_json(self, payload: dict, status: int = 200):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class StubModelServer(ThreadingHTTPServer):
    """POST /generate -> {"text": answer}; answers cycle through a script."""

    def __init__(self, port: int = 0, *, script: list[str] | None = None, default_answer: str = "yes"):
        self.script = list(script) if script else None
        self.default_answer = default_answer
        self.requests: list[dict] = []
        self._counter = 0
        self._state_lock = threading.Lock()
        super().__init__(("127.0.0.1", port), _ModelHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def next_answer(self, request: dict) -> str:
        with self._state_lock:
            self.requests.append(request)
            index = self._counter
            self._counter += 1
        if self.script:
            return self.script[index % len(self.script)]
        return self.default_answer


class _ModelHandler(_SilentHandler):
    server: StubModelServer

    def do_POST(self):
        if urlparse(self.path).path != "/generate":
            self._send_json({"error": "not found"}, 404)
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            request = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            self._send_json({"error": "bad json"}, 400)
            return
        self._send_json({"text": self.server.next_answer(request)})


def synthetic_record(index: int) -> dict:
    return {
        "title": f"Synthetic study {index:05d} on screening automation",
        "abstract": f"Abstract body for synthetic study number {index}.",
        "authors": [f"Author {index % 7}"],
        "venue": "Synthetic Proceedings",
        "year": 2024,
        "doi": None,
        "url": f"https://example.org/synthetic/{index}",
        "source_id": f"syn-{index}",
    }


class StubConnectorServer(ThreadingHTTPServer):
    """GET /search?q&limit&offset[&min_year] over a fixed or synthetic corpus."""

    def __init__(
        self,
        port: int = 0,
        *,
        corpus: list[dict] | None = None,
        synthetic_total: int | None = None,
    ):
        self.corpus = corpus
        self.synthetic_total = synthetic_total
        self.request_log: list[dict] = []
        self._state_lock = threading.Lock()
        super().__init__(("127.0.0.1", port), _ConnectorHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def search(self, query: str, limit: int, offset: int, min_year: int | None) -> dict:
        with self._state_lock:
            self.request_log.append(
                {"q": query, "limit": limit, "offset": offset, "min_year": min_year}
            )
        if self.synthetic_total is not None:
            total = self.synthetic_total
            end = min(offset + limit, total)
            results = [synthetic_record(i) for i in range(offset, max(offset, end))]
            if min_year is not None:
                results = [r for r in results if r["year"] is None or r["year"] >= min_year]
            return {"total": total, "results": results}
        rows = self.corpus or []
        if min_year is not None:
            rows = [r for r in rows if r.get("year") is None or r["year"] >= min_year]
        return {"total": len(rows), "results": rows[offset : offset + limit]}


class _ConnectorHandler(_SilentHandler):
    server: StubConnectorServer

    def do_GET(self):
        parsed = urlparse(self.path)
        if parsed.path != "/search":
            self._send_json({"error": "not found"}, 404)
            return
        qs = parse_qs(parsed.query)

        def int_param(name: str, default: int | None) -> int | None:
            values = qs.get(name)
            return int(values[0]) if values else default

        self._send_json(
            self.server.search(
                query=qs.get("q", [""])[0],
                limit=int_param("limit", 10),
                offset=int_param("offset", 0),
                min_year=int_param("min_year", None),
            )
        )


def start_in_thread(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread


def load_corpus(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if isinstance(payload, dict):
        payload = payload.get("results", [])
    if not isinstance(payload, list):
        raise ValueError("corpus file must be a JSON array or {results: [...]}")
    return payload
