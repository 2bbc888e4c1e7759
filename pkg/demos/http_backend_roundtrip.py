"""Run a search against a generation service speaking the HTTP contract.

Wire format:
    POST <generate_url>  {"prompt": str, "temperature": float, "n": int, "max_tokens": int}
        -> {"samples": ["...", ...]}
    POST <tune_url>      {"records": [{"prompt","completion","fitness"}, ...], "config": {...}}
        -> {"ok": true}

This demo hosts a deliberately dumb local service (it ignores the prompt
and cycles through canned genomes) just to show the client, the retry
path, and the adaptation upload working end to end.

Usage:
    python3 demos/http_backend_roundtrip.py
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

from evosearch import (
    CallableEvaluator,
    HttpBackend,
    SearchConfig,
    SelectionMode,
    load_snapshot,
    parse_genome,
    run_search,
    synthetic_metrics,
)

SEEDS = ["64:64:64:64:64", "32:32:32:32:32", "8:64:8:64:8", "16:24:32:40:48"]
CANNED = ["24:24:24:24:24", "16:16:16:16:16", "8:16:8:16:8", "40:32:24:16:8",
          "8:8:16:8:8", "48:24:16:8:8", "8:8:8:8:16", "8:8:8:8:8"]


class StubHandler(BaseHTTPRequestHandler):
    cursor = 0
    tune_calls = 0
    flaked_once = False

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.path == "/generate":
            # fail the very first request to show the client-side retry
            if not StubHandler.flaked_once:
                StubHandler.flaked_once = True
                self.send_response(503)
                self.end_headers()
                return
            n = body["n"]
            samples = [CANNED[(StubHandler.cursor + i) % len(CANNED)] for i in range(n)]
            StubHandler.cursor += n
            payload = {"samples": samples}
        elif self.path == "/tune":
            StubHandler.tune_calls += 1
            payload = {"ok": True}
        else:
            self.send_response(404)
            self.end_headers()
            return
        blob = json.dumps(payload).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def log_message(self, fmt, *args):
        pass  # keep the demo output readable


def main() -> int:
    logging.basicConfig(level=logging.WARNING)
    server = HTTPServer(("127.0.0.1", 0), StubHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    host, port = server.server_address
    print(f"stub generation service on http://{host}:{port}")

    backend = HttpBackend(
        f"http://{host}:{port}/generate",
        tune_url=f"http://{host}:{port}/tune",
        request_timeout=10,
        max_retries=3,
        backoff=0.05,
    )
    ledger_path = os.path.join(tempfile.mkdtemp(prefix="evohttp_"), "http_run.jsonl")
    config = SearchConfig(
        num_rounds=3, prompts_per_round=2, samples_per_prompt=4, completion_stub="", rng_seed=3
    )
    top = run_search(
        config,
        SelectionMode.FITNESS_TOP,
        backend,
        CallableEvaluator(lambda code: synthetic_metrics(parse_genome(code)), name="genome"),
        SEEDS,
        ledger_path,
    )
    server.shutdown()

    print(f"search finished; ledger at {ledger_path}")
    print("first generate request got a 503 and was retried transparently")
    print(f"adaptation uploads: {StubHandler.tune_calls} (one per non-final round)")
    if top:
        for candidate in top[:3]:
            print(f"  top id={candidate.id} code={candidate.code} fitness={candidate.fitness:.4f}")
    else:
        snapshot = load_snapshot(ledger_path)
        best = max(
            (c for c in snapshot.candidates.values() if c.fitness is not None),
            key=lambda c: c.fitness,
        )
        print(f"  every survivor was consumed as a parent; best seen: {best.code} "
              f"fitness={best.fitness:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
