"""Local HTTP task service: dispenses HITs to workers and logs their answers.

Endpoints (JSON):
  GET  /hits/next?worker_id=W  -> next HIT document; 204 when none remain for W
  POST /answers                -> {status}; 409 on duplicate, 422 on invalid selection
  GET  /progress               -> {hits_total, hits_complete, answers}

Answers append to a JSON-lines log under a lock, one full line per write, so
a crash never leaves a torn record.  CORS headers are permissive because the
answering UI is a static page served from elsewhere.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .crowd import HIT, WorkerAnswer, answer_to_line, hit_to_doc, read_answers


class TaskState:
    """Shared dispatch state; all mutation happens under the lock."""

    def __init__(self, hits: list[HIT], log_path: str | Path):
        self.hits = {h.id: h for h in hits}
        self.order = [h.id for h in hits]
        self.log_path = Path(log_path)
        self.lock = threading.Lock()
        self.answered: dict[str, set[str]] = {hid: set() for hid in self.order}
        if self.log_path.exists():
            for a in read_answers(self.log_path):
                if a.hit_id in self.answered:
                    self.answered[a.hit_id].add(a.worker_id)

    def next_hit(self, worker_id: str) -> HIT | None:
        with self.lock:
            for hid in self.order:
                hit = self.hits[hid]
                done = self.answered[hid]
                if worker_id not in done and len(done) < hit.assignments_required:
                    return hit
        return None

    def submit(self, payload: dict) -> tuple[int, dict]:
        try:
            hit_id = payload["hit_id"]
            worker_id = payload["worker_id"]
            selected_instances = tuple(payload.get("selected_instances", ()))
            selected_properties = tuple(payload.get("selected_properties", ()))
        except (TypeError, KeyError):
            return 400, {"status": "malformed", "error": "hit_id and worker_id are required"}
        if not isinstance(worker_id, str) or not worker_id:
            return 400, {"status": "malformed", "error": "worker_id must be a non-empty string"}
        hit = self.hits.get(hit_id)
        if hit is None:
            return 422, {"status": "invalid", "error": f"unknown hit_id {hit_id!r}"}
        bad_instances = [e for e in selected_instances if e not in hit.instances]
        if bad_instances:
            return 422, {"status": "invalid", "error": f"instances not in HIT: {bad_instances}"}
        bad_props = [p for p in selected_properties if p not in hit.candidate_properties]
        if bad_props:
            return 422, {"status": "invalid", "error": f"properties not in HIT: {bad_props}"}
        answer = WorkerAnswer(
            hit_id=hit_id,
            worker_id=worker_id,
            selected_instances=selected_instances,
            selected_properties=selected_properties,
            submitted_at=datetime.now(timezone.utc).isoformat(),
        )
        with self.lock:
            if worker_id in self.answered[hit_id]:
                return 409, {"status": "conflict", "error": "already answered"}
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(answer_to_line(answer) + "\n")
            self.answered[hit_id].add(worker_id)
        return 200, {"status": "accepted"}

    def progress(self) -> dict:
        with self.lock:
            complete = sum(
                1
                for hid, workers in self.answered.items()
                if len(workers) >= self.hits[hid].assignments_required
            )
            total_answers = sum(len(w) for w in self.answered.values())
        return {
            "hits_total": len(self.hits),
            "hits_complete": complete,
            "answers": total_answers,
        }

    @property
    def complete(self) -> bool:
        return self.progress()["hits_complete"] == len(self.hits)


class _Handler(BaseHTTPRequestHandler):
    state: TaskState  # injected by make_server

    def _send(self, code: int, body: dict | None):
        data = b"" if body is None else json.dumps(body).encode("utf-8")
        self.send_response(code)
        self.send_header("Access-Control-Allow-Origin", "*")
        if data:
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if data:
            self.wfile.write(data)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/hits/next":
            params = parse_qs(url.query)
            worker = params.get("worker_id", [""])[0]
            if not worker:
                self._send(400, {"status": "malformed", "error": "worker_id query parameter required"})
                return
            hit = self.state.next_hit(worker)
            if hit is None:
                self._send(204, None)
            else:
                self._send(200, hit_to_doc(hit))
        elif url.path == "/progress":
            self._send(200, self.state.progress())
        else:
            self._send(404, {"status": "not_found"})

    def do_POST(self):
        if urlparse(self.path).path != "/answers":
            self._send(404, {"status": "not_found"})
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send(400, {"status": "malformed", "error": "body must be JSON"})
            return
        code, body = self.state.submit(payload)
        self._send(code, body)

    def log_message(self, fmt, *args):  # quiet by default; tests assert on responses
        pass


def make_server(hits: list[HIT], log_path: str | Path, bind: str = "127.0.0.1:0") -> ThreadingHTTPServer:
    """Build (but do not start) the task server; port 0 picks a free port."""
    host, _, port = bind.partition(":")
    state = TaskState(hits, log_path)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port or 0)), handler)
    server.task_state = state  # type: ignore[attr-defined]
    return server


def serve_tasks(
    hits: list[HIT],
    log_path: str | Path,
    bind: str = "127.0.0.1:8765",
    poll_interval: float = 0.5,
    timeout: float | None = None,
    announce=print,
) -> None:
    """Run the service until every HIT has its required assignments (or the
    timeout fires).  Blocks the calling thread."""
    import time

    server = make_server(hits, log_path, bind)
    state: TaskState = server.task_state  # type: ignore[attr-defined]
    host, port = server.server_address[:2]
    announce(f"task service listening on http://{host}:{port} ({len(hits)} HITs)")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    started = time.monotonic()
    try:
        while not state.complete:
            if timeout is not None and time.monotonic() - started > timeout:
                announce("task service timeout reached; shutting down")
                break
            time.sleep(poll_interval)
        else:
            announce("all HITs complete; shutting down")
    finally:
        server.shutdown()
        thread.join()
