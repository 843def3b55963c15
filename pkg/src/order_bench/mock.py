"""Mock wire-protocol endpoints for conformance testing.

Modes: ``gold`` replies the gold marker labels, ``noisy:<p>`` swaps one
random adjacent pair with probability p, ``invalid`` always emits malformed
output so the harness repair path is exercised on every instance.
"""

import json
import socket
import sys
from dataclasses import dataclass
from typing import Optional

from order_bench.corpus import Corpus
from order_bench.harness import make_instance
from order_bench.seeding import derive_rng
from order_bench.wire import PROTOCOL


@dataclass(frozen=True)
class MockSpec:
    kind: str  # "gold" | "noisy" | "invalid"
    noise: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "MockSpec":
        if text == "gold":
            return cls(kind="gold")
        if text == "invalid":
            return cls(kind="invalid")
        if text.startswith("noisy:"):
            p = float(text[len("noisy:"):])
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"noise probability must be in [0,1], got {p}")
            return cls(kind="noisy", noise=p)
        raise ValueError(f"unknown mock mode {text!r} (expected gold|noisy:<p>|invalid)")


class MockEndpoint:
    """Recomputes the harness's seeded shuffles to answer requests."""

    def __init__(self, spec: MockSpec, corpus: Corpus, seed: int,
                 max_sentences: Optional[int] = None):
        self.spec = spec
        self.seed = seed
        self.max_sentences = max_sentences
        self.docs = {doc.id: doc for doc in corpus}

    @property
    def name(self) -> str:
        return f"mock-{self.spec.kind}"

    def _gold_markers(self, instance_id: str, n: int):
        base_id, _, repeat = instance_id.partition("@")
        doc = self.docs.get(base_id)
        if doc is None:
            return None
        instance = make_instance(
            doc, self.seed, self.max_sentences, int(repeat) if repeat else 0
        )
        if instance.n != n:
            return None
        return instance.gold_markers

    def answer(self, request: dict) -> dict:
        instance_id = str(request["id"])
        n = int(request["n"])
        markers = request.get("markers") or list(range(1, n + 1))
        if self.spec.kind == "invalid":
            return {"id": instance_id, "output": "order: 0 0"}
        gold = self._gold_markers(instance_id, n)
        if gold is None:
            return {"id": instance_id, "output": ""}
        y = list(gold)
        if self.spec.kind == "noisy" and n >= 2:
            rng = derive_rng("mock-noisy", self.seed, instance_id)
            if rng.random() < self.spec.noise:
                k = rng.randrange(n - 1)
                y[k], y[k + 1] = y[k + 1], y[k]
        return {"id": instance_id, "output": " ".join(str(markers[slot - 1]) for slot in y)}

    def serve_stream(self, reader, writer) -> int:
        """Serve one connection over line streams; returns an exit code."""
        hello_line = reader.readline()
        if not hello_line:
            return 3
        try:
            hello = json.loads(hello_line)
        except json.JSONDecodeError:
            hello = None
        if not isinstance(hello, dict) or hello.get("protocol") != PROTOCOL:
            writer.write(json.dumps({"error": "protocol mismatch"}) + "\n")
            writer.flush()
            return 3
        writer.write(json.dumps({"protocol": PROTOCOL, "name": self.name}) + "\n")
        writer.flush()
        for line in reader:
            if not line.strip():
                continue
            try:
                request = json.loads(line)
            except json.JSONDecodeError:
                continue
            writer.write(json.dumps(self.answer(request)) + "\n")
            writer.flush()
        return 0

    def serve_stdio(self) -> int:
        return self.serve_stream(sys.stdin, sys.stdout)

    def serve_tcp(self, port: int, max_connections: Optional[int] = None) -> int:
        """Serve connections sequentially on localhost; 0 = ephemeral port."""
        server = socket.create_server(("127.0.0.1", port))
        print(f"mock listening on 127.0.0.1:{server.getsockname()[1]}", file=sys.stderr)
        served = 0
        try:
            while max_connections is None or served < max_connections:
                conn, _ = server.accept()
                with conn, conn.makefile("r", encoding="utf-8") as reader, \
                        conn.makefile("w", encoding="utf-8") as writer:
                    self.serve_stream(reader, writer)
                served += 1
        finally:
            server.close()
        return 0
