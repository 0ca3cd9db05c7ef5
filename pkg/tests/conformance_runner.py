"""Executes the conformance script against live daemons, byte-exactly.

The script format is documented at the top of the script file itself.
Each !reset section gets a fresh daemon (spawned with the listed flags)
and a fresh raw-socket connection over the requested transport.
"""

import socket

from conftest import Daemon


class RawConn:
    """Raw byte-level reader: no protocol decoding, framing asserted here."""

    def __init__(self, sock):
        self.sock = sock
        self.buf = bytearray()

    def send_line(self, content):
        self.sock.sendall(content + b"\r\n")

    def read_raw_line(self):
        while True:
            nl = self.buf.find(b"\n")
            if nl >= 0:
                raw = bytes(self.buf[: nl + 1])
                del self.buf[: nl + 1]
                return raw
            data = self.sock.recv(65536)
            if not data:
                return b""
            self.buf.extend(data)

    def assert_closed(self):
        self.sock.settimeout(5.0)
        while self.buf:
            self.buf.clear()
        data = self.sock.recv(65536)
        if data:
            raise AssertionError(f"expected close, got {data!r}")

    def close(self):
        self.sock.close()


def parse_script(path):
    """Yields (kind, payload) directives."""
    directives = []
    with open(path, "rb") as fh:
        for raw in fh.read().split(b"\n"):
            if raw.startswith(b"#") or not raw.strip():
                continue
            if raw.startswith(b"!reset"):
                flags = raw[len(b"!reset") :].decode().split()
                directives.append(("reset", flags))
            elif raw == b"!closed":
                directives.append(("closed", None))
            elif raw == b">" or raw.startswith(b"> "):
                directives.append(("send", raw[2:] if len(raw) > 1 else b""))
            elif raw == b"<" or raw.startswith(b"< "):
                directives.append(("expect", raw[2:] if len(raw) > 1 else b""))
            else:
                raise ValueError(f"bad script line {raw!r}")
    return directives


def run_script(path, transport, unix_path_factory=None):
    """Runs every section; returns the number of requests exercised."""
    directives = parse_script(path)
    daemon = None
    conn = None
    requests = 0
    try:
        i = 0
        n = len(directives)
        while i < n:
            kind, payload = directives[i]
            if kind == "reset":
                if conn:
                    conn.close()
                if daemon:
                    daemon.stop()
                unix_path = unix_path_factory() if transport == "unix" else None
                daemon = Daemon(extra_args=payload, unix_path=unix_path)
                conn = _connect(daemon, transport)
                i += 1
            elif kind == "send":
                conn.send_line(payload)
                requests += 1
                i += 1
                while i < n and directives[i][0] == "expect":
                    expected = directives[i][1]
                    raw = conn.read_raw_line()
                    assert raw.endswith(b"\r\n"), (
                        f"request {payload!r}: line {raw!r} not CRLF-terminated"
                    )
                    got = raw[:-2]
                    assert got == expected, (
                        f"request {payload!r}: expected {expected!r}, got {got!r}"
                    )
                    i += 1
            elif kind == "closed":
                conn.assert_closed()
                conn.close()
                conn = None
                i += 1
            else:
                raise AssertionError(f"unhandled directive {kind}")
    finally:
        if conn:
            conn.close()
        if daemon:
            daemon.stop()
    return requests


def _connect(daemon, transport):
    if transport == "unix":
        sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        sock.settimeout(10.0)
        sock.connect(daemon.unix_path)
    else:
        sock = socket.create_connection((daemon.host, daemon.port), timeout=10.0)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return RawConn(sock)
