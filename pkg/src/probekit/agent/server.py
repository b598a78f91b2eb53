"""TCP front end for :class:`probekit.agent.core.Agent`."""
import logging
import socket
import threading

from probekit.agent.core import Agent
from probekit.agent.protocol import MAX_LINE_BYTES, encode_record, error_record

log = logging.getLogger(__name__)


def parse_endpoint(text):
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


class _Connection:
    def __init__(self, sock):
        self.sock = sock
        self.lock = threading.Lock()
        self.open = True

    def send(self, rec):
        data = encode_record(rec).encode("utf-8")
        with self.lock:
            if not self.open:
                raise ConnectionError("client gone")
            try:
                self.sock.sendall(data)
            except OSError:
                self.open = False
                raise

    def close(self):
        with self.lock:
            self.open = False
        try:
            self.sock.close()
        except OSError:
            pass


def _serve_connection(agent, sock):
    conn = _Connection(sock)
    reader = sock.makefile("rb")
    try:
        while not agent.stopping:
            line = reader.readline(MAX_LINE_BYTES + 1)
            if not line:
                break
            if len(line) > MAX_LINE_BYTES and not line.endswith(b"\n"):
                # discard the rest of an oversized line
                while line and not line.endswith(b"\n"):
                    line = reader.readline(MAX_LINE_BYTES)
                try:
                    conn.send(error_record("?", "line too long"))
                except OSError:
                    break
                continue
            agent.submit(line, conn.send)
    except OSError:
        pass
    finally:
        reader.close()
        conn.close()


def bind(endpoint):
    host, port = parse_endpoint(endpoint) if isinstance(endpoint, str) else endpoint
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        srv.bind((host, port))
        srv.listen(8)
    except OSError:
        srv.close()
        raise
    return srv


def serve(endpoint, agent, ready=None):
    """Serve line-delimited commands on ``endpoint`` until a quit command.

    Returns a process exit code: 0 after a clean quit, 1 if the endpoint
    cannot be bound. ``ready`` (optional callable) receives the bound
    (host, port) once listening.
    """
    try:
        srv = endpoint if isinstance(endpoint, socket.socket) else bind(endpoint)
    except (OSError, ValueError) as exc:
        log.error("cannot listen on %s: %s", endpoint, exc)
        return 1
    srv.settimeout(0.1)
    agent.start()
    if ready is not None:
        ready(srv.getsockname())
    clients = []
    try:
        while not agent.stopping:
            try:
                sock, _ = srv.accept()
            except socket.timeout:
                continue
            sock.settimeout(None)
            t = threading.Thread(target=_serve_connection, args=(agent, sock), daemon=True)
            t.start()
            clients.append(t)
    finally:
        srv.close()
        agent.shutdown()
    return 0
