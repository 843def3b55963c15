"""Newline-delimited JSON wire protocol for external orderers.

Endpoints are addressed by URI: ``exec:<command line>`` speaks over the
stdio of a child process, ``tcp://host:port`` over a TCP socket. After a
handshake, requests carry ``{"id", "text", "n", "markers"}`` and replies
``{"id", "output"}``; replies may arrive out of order and are matched by id.
"""

import json
import os
import select
import shlex
import socket
import subprocess
import time

PROTOCOL = "order-bench/1"
DEFAULT_TIMEOUT_SECS = 30.0
TIMEOUT_ENV_VAR = "ORDER_BENCH_TIMEOUT_SECS"


class TransportError(RuntimeError):
    """Endpoint unreachable, closed, or unresponsive."""


class ProtocolError(RuntimeError):
    """Endpoint reachable but speaking the protocol incorrectly."""


def default_timeout() -> float:
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw is None:
        return DEFAULT_TIMEOUT_SECS
    try:
        value = float(raw)
    except ValueError as e:
        raise ValueError(f"{TIMEOUT_ENV_VAR} must be a number, got {raw!r}") from e
    if value <= 0:
        raise ValueError(f"{TIMEOUT_ENV_VAR} must be positive")
    return value


class _ExecTransport:
    def __init__(self, command: str):
        argv = shlex.split(command)
        if not argv:
            raise ValueError("exec: endpoint has an empty command")
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as e:
            raise TransportError(f"cannot start endpoint {command!r}: {e}") from e

    def write(self, data: bytes) -> None:
        try:
            self.proc.stdin.write(data)
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as e:
            raise TransportError(f"endpoint process closed its input: {e}") from e

    def read_some(self, timeout: float) -> bytes:
        fd = self.proc.stdout.fileno()
        ready, _, _ = select.select([fd], [], [], timeout)
        if not ready:
            raise TransportError(f"endpoint timed out after {timeout:.1f}s")
        chunk = os.read(fd, 65536)
        if not chunk:
            raise TransportError("endpoint process closed its output")
        return chunk

    def close(self) -> None:
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        self.proc.terminate()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class _TcpTransport:
    def __init__(self, host: str, port: int, timeout: float):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as e:
            raise TransportError(f"cannot connect to {host}:{port}: {e}") from e

    def write(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as e:
            raise TransportError(f"socket send failed: {e}") from e

    def read_some(self, timeout: float) -> bytes:
        self.sock.settimeout(timeout)
        try:
            chunk = self.sock.recv(65536)
        except socket.timeout as e:
            raise TransportError(f"endpoint timed out after {timeout:.1f}s") from e
        except OSError as e:
            raise TransportError(f"socket receive failed: {e}") from e
        if not chunk:
            raise TransportError("endpoint closed the connection")
        return chunk

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


def _open_transport(uri: str, timeout: float):
    if uri.startswith("exec:"):
        return _ExecTransport(uri[len("exec:"):])
    if uri.startswith("tcp://"):
        rest = uri[len("tcp://"):]
        host, sep, port = rest.rpartition(":")
        if not sep or not host:
            raise ValueError(f"tcp endpoint must be tcp://host:port, got {uri!r}")
        return _TcpTransport(host, int(port), timeout)
    raise ValueError(f"unsupported endpoint URI {uri!r} (expected exec:... or tcp://...)")


class Connection:
    """One handshaken client connection with id-matched, pipelineable replies."""

    def __init__(self, uri: str, timeout: float = None):
        self.timeout = default_timeout() if timeout is None else timeout
        self.transport = _open_transport(uri, self.timeout)
        self._buffer = b""
        self._pending: dict = {}
        try:
            self._send({"protocol": PROTOCOL})
            hello = self._read_message()
        except TransportError:
            self.transport.close()
            raise
        if not isinstance(hello, dict) or hello.get("protocol") != PROTOCOL:
            self.transport.close()
            raise ProtocolError(f"bad handshake reply: {hello!r}")
        self.endpoint_name = str(hello.get("name", "external"))

    def _send(self, obj: dict) -> None:
        self.transport.write(json.dumps(obj).encode("utf-8") + b"\n")

    def _read_message(self) -> dict:
        deadline = time.monotonic() + self.timeout
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportError(f"endpoint timed out after {self.timeout:.1f}s")
            self._buffer += self.transport.read_some(remaining)
        line, _, self._buffer = self._buffer.partition(b"\n")
        try:
            return json.loads(line)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"endpoint sent invalid JSON: {line[:200]!r}") from e

    def send_request(self, request_id: str, text: str, n: int, markers) -> None:
        self._send({"id": request_id, "text": text, "n": n, "markers": list(markers)})

    def wait_reply(self, request_id: str) -> str:
        """Block until the reply with this id arrives; buffer others."""
        while request_id not in self._pending:
            msg = self._read_message()
            if not isinstance(msg, dict) or "id" not in msg or "output" not in msg:
                raise ProtocolError(f"malformed reply: {msg!r}")
            self._pending[str(msg["id"])] = str(msg["output"])
        return self._pending.pop(request_id)

    def request(self, request_id: str, text: str, n: int, markers) -> str:
        self.send_request(request_id, text, n, markers)
        return self.wait_reply(request_id)

    def close(self) -> None:
        self.transport.close()
