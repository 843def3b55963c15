"""Wire-protocol endpoint: ndjson over stdio, one model per process.

Handshake first ({"protocol": "order-bench/1"}), then requests
{"id", "text", "n", "markers"} answered as {"id", "output"}. Requests may
arrive pipelined; replies carry the request id, so answering in arrival
order is valid. Decoding is greedy; per-request failures become empty
output (repair is the harness's job).
"""

import json
import sys

from order_bench_adapter.model import greedy_decode, load_artifact

PROTOCOL = "order-bench/1"
ENDPOINT_NAME = "seq2seq-adapter"


class Endpoint:
    def __init__(self, model_dir):
        self.tokenizer, self.model = load_artifact(model_dir)

    def answer(self, request: dict) -> dict:
        request_id = str(request.get("id", ""))
        try:
            text = str(request["text"])
            n = int(request["n"])
            # n marker tokens plus room for eos / a stray token.
            output = greedy_decode(self.tokenizer, self.model, text, n + 2)
        except Exception:
            output = ""
        return {"id": request_id, "output": output}

    def serve_stream(self, reader, writer) -> int:
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
        writer.write(json.dumps({"protocol": PROTOCOL, "name": ENDPOINT_NAME}) + "\n")
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
