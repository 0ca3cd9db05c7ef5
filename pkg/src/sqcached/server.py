"""The daemon: readiness-driven listeners feeding one statement executor.

Socket accepts, reads, and writes interleave freely across connections,
but decode-execute-encode runs inline on the single event-loop thread, so
at most one statement ever touches engine state (per-connection response
order follows from per-connection request order).

Only protocol-level faults (an oversized line) close a connection; SQL
and admin errors answer ERR and keep it open.
"""

import logging
import os
import selectors
import socket
import time
from dataclasses import dataclass

from .engine import Engine
from .errors import EngineError, ProtocolError, ResponseTooLargeError
from .executor import ResultSet
from . import protocol

log = logging.getLogger("sqcached")

RECV_SIZE = 65536


@dataclass
class ServerConfig:
    tcp: tuple | None = ("127.0.0.1", 8124)  # (host, port); None disables
    unix_path: str | None = None
    max_line_bytes: int = 1 << 20
    max_response_rows: int = 100_000
    ops_per_sweep: int = 1000
    idle_timeout: float | None = None

    def validate(self):
        if self.tcp is None and self.unix_path is None:
            raise ValueError("at least one listener must be enabled")
        if self.max_line_bytes < 1024:
            raise ValueError("max_line_bytes must be >= 1 KiB")


class Connection:
    __slots__ = ("sock", "peer", "buf", "out", "seq", "close_after_write", "last_activity")

    def __init__(self, sock, peer):
        self.sock = sock
        self.peer = peer
        self.buf = bytearray()
        self.out = bytearray()
        self.seq = 0
        self.close_after_write = False
        self.last_activity = time.monotonic()


class Stats:
    FIELDS = (
        "connections_accepted",
        "requests",
        "requests_select",
        "requests_insert",
        "requests_update",
        "requests_delete",
        "requests_ddl",
        "requests_admin",
        "requests_error",
        "rows_returned",
    )

    def __init__(self):
        for f in self.FIELDS:
            setattr(self, f, 0)

    def bump(self, name, amount=1):
        setattr(self, name, getattr(self, name) + amount)


class Server:
    def __init__(self, config, engine=None):
        config.validate()
        self.config = config
        self.engine = engine or Engine(default_ops_per_sweep=config.ops_per_sweep)
        self.stats = Stats()
        self.started_at = time.monotonic()
        self.tcp_address = None
        self._stop = False
        self._selector = None
        self._listeners = []

    # lifecycle -------------------------------------------------------------

    def shutdown(self):
        self._stop = True

    def run(self, ready_callback=None):
        """Serve until shutdown(); binds listeners first, then announces."""
        self._selector = selectors.DefaultSelector()
        try:
            self._bind_listeners()
            self._announce(ready_callback)
            while not self._stop:
                for key, _ in self._selector.select(timeout=0.2):
                    if key.data is None:
                        self._accept(key.fileobj)
                    else:
                        self._service(key)
                self._reap_idle()
        finally:
            self._teardown()

    def _bind_listeners(self):
        if self.config.tcp is not None:
            host, port = self.config.tcp
            sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            sock.bind((host, port))
            sock.listen(128)
            sock.setblocking(False)
            self.tcp_address = sock.getsockname()[:2]
            self._selector.register(sock, selectors.EVENT_READ, None)
            self._listeners.append(sock)
        if self.config.unix_path is not None:
            path = self.config.unix_path
            if os.path.exists(path):
                os.unlink(path)
            sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            sock.bind(path)
            sock.listen(128)
            sock.setblocking(False)
            self._selector.register(sock, selectors.EVENT_READ, None)
            self._listeners.append(sock)

    def _announce(self, ready_callback):
        parts = ["READY"]
        if self.tcp_address:
            parts.append(f"tcp={self.tcp_address[0]}:{self.tcp_address[1]}")
        if self.config.unix_path:
            parts.append(f"unix={self.config.unix_path}")
        line = " ".join(parts)
        log.info("%s", line)
        print(line, flush=True)
        if ready_callback:
            ready_callback(self)

    def _teardown(self):
        for key in list(self._selector.get_map().values()):
            conn = key.data
            if conn is not None:
                self._drain_best_effort(conn)
                conn.sock.close()
        for sock in self._listeners:
            sock.close()
        self._listeners.clear()
        if self.config.unix_path and os.path.exists(self.config.unix_path):
            os.unlink(self.config.unix_path)
        self._selector.close()

    def _drain_best_effort(self, conn):
        if not conn.out:
            return
        conn.sock.setblocking(True)
        conn.sock.settimeout(1.0)
        try:
            conn.sock.sendall(bytes(conn.out))
        except OSError:
            pass

    # connection handling ------------------------------------------------------

    def _accept(self, listener):
        try:
            sock, addr = listener.accept()
        except OSError:
            return
        sock.setblocking(False)
        conn = Connection(sock, addr or "unix")
        self.stats.bump("connections_accepted")
        self._selector.register(sock, selectors.EVENT_READ, conn)
        log.debug("accepted %s", conn.peer)

    def _service(self, key):
        conn = key.data
        events = key.events
        try:
            self._read(conn)
            self._write(conn)
        except (ConnectionError, OSError):
            self._close(conn)
            return
        if conn.close_after_write and not conn.out:
            self._close(conn)
            return
        wanted = selectors.EVENT_READ
        if conn.out:
            wanted |= selectors.EVENT_WRITE
        if wanted != events:
            self._selector.modify(conn.sock, wanted, conn)

    def _read(self, conn):
        if conn.close_after_write:
            return
        try:
            data = conn.sock.recv(RECV_SIZE)
        except BlockingIOError:
            return
        if data == b"":
            raise ConnectionError("peer closed")
        if not data:
            return
        conn.last_activity = time.monotonic()
        conn.buf.extend(data)
        while True:
            nl = conn.buf.find(b"\n")
            if nl < 0:
                if len(conn.buf) > self.config.max_line_bytes:
                    self._protocol_fault(conn, "line too long")
                return
            raw = bytes(conn.buf[:nl])
            del conn.buf[: nl + 1]
            if len(raw) > self.config.max_line_bytes:
                self._protocol_fault(conn, "line too long")
                return
            if raw.endswith(b"\r"):
                raw = raw[:-1]
            self._handle_line(conn, raw)
            if conn.close_after_write:
                return

    def _protocol_fault(self, conn, message):
        conn.out += protocol.err_response("PROTO", message)
        conn.buf.clear()
        conn.close_after_write = True
        self.stats.bump("requests_error")

    def _write(self, conn):
        if not conn.out:
            return
        sent = conn.sock.send(bytes(conn.out))
        if sent > 0:
            del conn.out[:sent]
            conn.last_activity = time.monotonic()

    def _close(self, conn):
        try:
            self._selector.unregister(conn.sock)
        except (KeyError, ValueError):
            pass
        conn.sock.close()
        log.debug("closed %s", conn.peer)

    def _reap_idle(self):
        limit = self.config.idle_timeout
        if limit is None:
            return
        now = time.monotonic()
        for key in list(self._selector.get_map().values()):
            conn = key.data
            if conn is not None and now - conn.last_activity > limit:
                self._close(conn)

    # request execution ----------------------------------------------------------

    def _handle_line(self, conn, raw):
        text = raw.decode("utf-8", "surrogateescape")
        try:
            request = protocol.decode_request(text)
        except ProtocolError as err:
            self.stats.bump("requests")
            self.stats.bump("requests_error")
            conn.out += protocol.err_response(err.code, err.message)
            return
        if request is None:
            return
        conn.seq += 1
        self.stats.bump("requests")
        log.debug("%s #%d: %s", conn.peer, conn.seq, text[:200])
        try:
            conn.out += self._dispatch(conn, request)
        except EngineError as err:
            self.stats.bump("requests_error")
            conn.out += protocol.err_response(err.code, err.message)
        except Exception:
            log.exception("internal error on %r", text[:200])
            self.stats.bump("requests_error")
            conn.out += protocol.err_response("INTERNAL", "unexpected error")

    def _dispatch(self, conn, request):
        if isinstance(request, protocol.SqlRequest):
            result = self.engine.execute_sql(request.text)
            if isinstance(result, ResultSet):
                if len(result.rows) > self.config.max_response_rows:
                    raise ResponseTooLargeError(
                        f"{len(result.rows)} rows exceed cap "
                        f"{self.config.max_response_rows}"
                    )
                self.stats.bump("requests_select")
                self.stats.bump("rows_returned", len(result.rows))
                return protocol.ok_response(len(result.columns), result.rows)
            self._bump_sql_verb(request.text)
            return protocol.done_response(result.count)
        # admin
        verb = request.verb
        self.stats.bump("requests_admin")
        if verb == "PING":
            return protocol.pong_response()
        if verb == "QUIT":
            conn.close_after_write = True
            return protocol.bye_response()
        if verb == "STATS":
            return protocol.stats_response(self._stat_pairs())
        if verb == "POLICY":
            result = self.engine.set_policy(request.table, request.kind, request.amount)
            return protocol.done_response(result.count)
        if verb == "FLUSH":
            result = self.engine.flush_table(request.table)
            return protocol.done_response(result.count)
        if verb == "SWEEP":
            result = self.engine.sweep_table(request.table)
            return protocol.done_response(result.count)
        raise ProtocolError(f"unhandled verb {verb}")

    def _bump_sql_verb(self, text):
        head = text.lstrip().split(None, 1)[0].upper()
        if head == "INSERT":
            self.stats.bump("requests_insert")
        elif head == "UPDATE":
            self.stats.bump("requests_update")
        elif head == "DELETE":
            self.stats.bump("requests_delete")
        else:
            self.stats.bump("requests_ddl")

    def _stat_pairs(self):
        pairs = [(name, getattr(self.stats, name)) for name in Stats.FIELDS]
        engine_stats = self.engine.stats()
        for name in (
            "rows_expired_age",
            "rows_expired_size",
            "rows_expired_flush",
            "tables",
            "est_bytes",
        ):
            pairs.append((name, engine_stats[name]))
        pairs.append(("uptime_s", int(time.monotonic() - self.started_at)))
        return pairs
