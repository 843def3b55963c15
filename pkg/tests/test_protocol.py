import json
import socket
import subprocess
import sys
import threading
from fractions import Fraction

import pytest

from order_bench import wire
from order_bench.codec import MarkerMode
from order_bench.corpus import generate_synthetic, save_corpus
from order_bench.harness import RunConfig, evaluate
from order_bench.mock import MockEndpoint, MockSpec
from order_bench.orderers import ExternalOrderer, OrdererError

SEED = 11


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    corpus = generate_synthetic(25, 5, seed=1, name="wire")
    path = tmp_path_factory.mktemp("wire") / "wire.jsonl"
    save_corpus(corpus, path)
    return corpus, path


def _mock_uri(path, mode, seed=SEED):
    return (f"exec:{sys.executable} -m order_bench serve-mock "
            f"--mock {mode} --corpus {path} --seed {seed}")


def test_gold_mock_round_trip(corpus_file):
    corpus, path = corpus_file
    orderer = ExternalOrderer(_mock_uri(path, "gold"))
    report = evaluate(corpus, orderer, RunConfig("wire", "external", seed=SEED))
    orderer.close()
    assert report.summary.pmr == 1
    assert report.repairs == 0
    assert report.errors == 0


def test_gold_mock_with_random_markers(corpus_file):
    corpus, path = corpus_file
    orderer = ExternalOrderer(_mock_uri(path, "gold"), mode=MarkerMode.random_labels(SEED))
    report = evaluate(corpus, orderer,
                      RunConfig("wire", "external", mode="random", seed=SEED))
    orderer.close()
    assert report.summary.pmr == 1


def test_invalid_mock_repairs_every_instance(corpus_file):
    corpus, path = corpus_file
    orderer = ExternalOrderer(_mock_uri(path, "invalid"))
    report = evaluate(corpus, orderer, RunConfig("wire", "external", seed=SEED))
    orderer.close()
    assert report.repairs == report.summary.n_instances == len(corpus)
    assert report.errors == 0


def test_noisy_mock_tau_exact(corpus_file):
    corpus, path = corpus_file
    orderer = ExternalOrderer(_mock_uri(path, "noisy:1.0"))
    report = evaluate(corpus, orderer, RunConfig("wire", "external", seed=SEED))
    orderer.close()
    # one adjacent swap on n=5 is exactly one inversion: tau = 1 - 2/10
    assert report.summary.tau == Fraction(4, 5)
    assert report.summary.pmr == 0


def test_unreachable_endpoint_records_errors(corpus_file):
    corpus, path = corpus_file
    orderer = ExternalOrderer("exec:/nonexistent/endpoint-binary")
    report = evaluate(corpus, orderer, RunConfig("wire", "external", seed=SEED))
    assert report.errors == len(corpus)
    assert report.summary.n_instances == 0


def test_tcp_transport(corpus_file):
    corpus, path = corpus_file
    endpoint = MockEndpoint(MockSpec.parse("gold"), corpus, SEED)
    server = socket.create_server(("127.0.0.1", 0))
    port = server.getsockname()[1]

    def serve():
        conn, _ = server.accept()
        with conn, conn.makefile("r", encoding="utf-8") as r, \
                conn.makefile("w", encoding="utf-8") as w:
            endpoint.serve_stream(r, w)

    thread = threading.Thread(target=serve, daemon=True)
    thread.start()
    orderer = ExternalOrderer(f"tcp://127.0.0.1:{port}")
    report = evaluate(corpus, orderer, RunConfig("wire", "external", seed=SEED))
    orderer.close()
    server.close()
    assert report.summary.pmr == 1


def test_pipelined_out_of_order_replies_matched_by_id(corpus_file, tmp_path):
    # endpoint that answers every batch of requests in reverse order
    script = tmp_path / "reverser.py"
    script.write_text(
        "import json, sys\n"
        "hello = json.loads(sys.stdin.readline())\n"
        "print(json.dumps({'protocol': hello['protocol'], 'name': 'reverser'}), flush=True)\n"
        "batch = []\n"
        "for line in sys.stdin:\n"
        "    req = json.loads(line)\n"
        "    batch.append(req)\n"
        "    if len(batch) == 5:\n"
        "        for r in reversed(batch):\n"
        "            out = ' '.join(str(v) for v in range(1, r['n'] + 1))\n"
        "            print(json.dumps({'id': r['id'], 'output': out}), flush=True)\n"
        "        batch = []\n",
        encoding="utf-8",
    )
    conn = wire.Connection(f"exec:{sys.executable} {script}", timeout=10)
    ids = [f"req-{k}" for k in range(5)]
    for rid in ids:
        conn.send_request(rid, "text", 3, [1, 2, 3])
    replies = {rid: conn.wait_reply(rid) for rid in ids}
    conn.close()
    assert all(replies[rid] == "1 2 3" for rid in ids)


def test_handshake_mismatch_rejected(corpus_file):
    corpus, path = corpus_file
    proc = subprocess.Popen(
        [sys.executable, "-m", "order_bench", "serve-mock",
         "--mock", "gold", "--corpus", str(path), "--seed", str(SEED)],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True,
    )
    proc.stdin.write(json.dumps({"protocol": "wrong/9"}) + "\n")
    proc.stdin.flush()
    reply = json.loads(proc.stdout.readline())
    proc.stdin.close()
    assert "error" in reply
    assert proc.wait(timeout=10) == 3


def test_timeout_is_transport_error(tmp_path):
    script = tmp_path / "sleeper.py"
    script.write_text("import time\ntime.sleep(60)\n", encoding="utf-8")
    with pytest.raises(wire.TransportError, match="timed out"):
        wire.Connection(f"exec:{sys.executable} {script}", timeout=0.5)


def test_timeout_env_override(monkeypatch):
    monkeypatch.setenv(wire.TIMEOUT_ENV_VAR, "12.5")
    assert wire.default_timeout() == 12.5
    monkeypatch.setenv(wire.TIMEOUT_ENV_VAR, "nope")
    with pytest.raises(ValueError):
        wire.default_timeout()


def test_protocol_error_on_garbage_reply(tmp_path):
    script = tmp_path / "garbage.py"
    script.write_text("print('not json at all', flush=True)\nimport time\ntime.sleep(5)\n",
                      encoding="utf-8")
    with pytest.raises(wire.ProtocolError):
        wire.Connection(f"exec:{sys.executable} {script}", timeout=5)
