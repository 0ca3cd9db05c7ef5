"""Minimal blocking wire client used by the harness and the test suite.

One in-flight request per connection; replies are fully read before the
next request goes out (mirrors the per-connection ordering contract).
"""

import socket

from ..protocol import decode_row


class ServerError(Exception):
    def __init__(self, code, message):
        super().__init__(f"{code} {message}")
        self.code = code
        self.message = message


class WireError(Exception):
    """Malformed frame or unexpected connection drop."""


class Reply:
    __slots__ = ("kind", "columns", "rows", "count", "stats")

    def __init__(self, kind, columns=0, rows=None, count=0, stats=None):
        self.kind = kind  # rows | done | pong | bye | stats
        self.columns = columns
        self.rows = rows if rows is not None else []
        self.count = count
        self.stats = stats or {}


class WireClient:
    def __init__(self, sock):
        self.sock = sock
        self._buf = bytearray()

    @classmethod
    def connect_tcp(cls, host, port, timeout=10.0):
        sock = socket.create_connection((host, port), timeout=timeout)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        return cls(sock)

    @classmethod
    def connect_unix(cls, path, timeout=10.0):
        sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        sock.settimeout(timeout)
        sock.connect(path)
        return cls(sock)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass

    def send_line(self, text):
        self.sock.sendall(text.encode("utf-8", "surrogateescape") + b"\r\n")

    def read_line(self):
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                raw = bytes(self._buf[:nl])
                del self._buf[: nl + 1]
                if raw.endswith(b"\r"):
                    raw = raw[:-1]
                return raw.decode("utf-8", "surrogateescape")
            data = self.sock.recv(65536)
            if not data:
                raise WireError("connection closed mid-frame")
            self._buf.extend(data)

    def request(self, text):
        """Send one statement or admin command and decode the reply."""
        self.send_line(text)
        return self.read_reply()

    def read_reply(self):
        line = self.read_line()
        if line.startswith("OK "):
            try:
                _, ncols, nrows = line.split(" ")
                ncols, nrows = int(ncols), int(nrows)
            except ValueError:
                raise WireError(f"bad OK line {line!r}") from None
            rows = [decode_row(self.read_line()) for _ in range(nrows)]
            end = self.read_line()
            if end != "END":
                raise WireError(f"missing END, got {end!r}")
            return Reply("rows", columns=ncols, rows=rows)
        if line.startswith("DONE "):
            return Reply("done", count=int(line[5:]))
        if line.startswith("ERR "):
            _, code, message = (line + " ").split(" ", 2)
            raise ServerError(code, message.rstrip())
        if line == "PONG":
            return Reply("pong")
        if line == "BYE":
            return Reply("bye")
        if line.startswith("STAT ") or line == "END":
            stats = {}
            while line != "END":
                _, name, value = line.split(" ", 2)
                stats[name] = int(value) if value.lstrip("-").isdigit() else value
                line = self.read_line()
            return Reply("stats", stats=stats)
        raise WireError(f"unrecognized status line {line!r}")

    # convenience wrappers ---------------------------------------------------

    def query(self, sql):
        """Rows for SELECT, affected count for writes/DDL."""
        reply = self.request(sql)
        if reply.kind == "rows":
            return reply.rows
        return reply.count

    def ping(self):
        return self.request("PING").kind == "pong"

    def stats(self):
        return self.request("STATS").stats

    def flush(self, table=None):
        return self.request(f"FLUSH {table if table else 'ALL'}").count

    def sweep(self, table):
        return self.request(f"SWEEP {table}").count

    def set_policy(self, table, kind, amount=None):
        cmd = f"POLICY {table} {kind}"
        if amount is not None:
            cmd += f" {amount}"
        return self.request(cmd).count
