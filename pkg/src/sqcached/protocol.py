"""Wire protocol: request classification and bit-exact response framing.

Responses are CRLF-framed status lines; SELECT rows are tab-separated
fields. Field encoding is bijective over cell values:

    null    -> \\N
    integer -> decimal
    real    -> decimal containing '.' (or exponent form)
    blob    -> X'hexpairs' (uppercase X)
    text    -> backslash-escaped (\\\\ \\t \\n \\r)

A text value whose escaped form would read back as one of the other
classes (e.g. "5", "1.50", "X'00'") is emitted with its first character
backslash-escaped; the decoder treats a backslash before any other byte
as that byte, so decode(encode(v)) == v for every value, type included.
"""

import re

from .errors import ProtocolError

ADMIN_VERBS = frozenset({"PING", "QUIT", "STATS", "POLICY", "FLUSH", "SWEEP"})

CRLF = b"\r\n"

_INT_RE = re.compile(r"-?[0-9]+\Z")
_REAL_RE = re.compile(r"-?(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")
_BLOB_RE = re.compile(r"X'(?:[0-9A-Fa-f]{2})*'\Z")

_ESCAPES = {ord("\\"): "\\\\", ord("\t"): "\\t", ord("\n"): "\\n", ord("\r"): "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}

_INF = float("inf")


def encode_field(v):
    if v is None:
        return "\\N"
    t = type(v)
    if t is int:
        return str(v)
    if t is float:
        return _encode_real(v)
    if t is bytes:
        return "X'" + v.hex().upper() + "'"
    s = v.translate(_ESCAPES)
    if s and (_INT_RE.match(s) or _REAL_RE.match(s) or _BLOB_RE.match(s)):
        s = "\\" + s
    return s


def _encode_real(f):
    if f == _INF:
        return "1.0e999"
    if f == -_INF:
        return "-1.0e999"
    if f != f:
        return "\\N"  # nan never leaves the engine, but never emit it
    r = repr(f)
    if "e" in r:
        if "." not in r:
            r = r.replace("e", ".0e")
    elif "." not in r:
        r += ".0"
    return r


def decode_field(s):
    if s == "\\N":
        return None
    if s and "\\" not in s:
        if _INT_RE.match(s):
            return int(s)
        if _REAL_RE.match(s):
            return float(s)
        if _BLOB_RE.match(s):
            return bytes.fromhex(s[2:-1])
    return _unescape(s)


def _unescape(s):
    if "\\" not in s:
        return s
    out = []
    i = 0
    n = len(s)
    while i < n:
        c = s[i]
        if c == "\\":
            if i + 1 >= n:
                raise ProtocolError("dangling backslash in field")
            nxt = s[i + 1]
            out.append(_UNESCAPES.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def encode_row(values):
    return "\t".join(encode_field(v) for v in values)


def decode_row(line):
    return tuple(decode_field(f) for f in line.split("\t"))


# response framing -----------------------------------------------------------


def _out(text):
    return text.encode("utf-8", "surrogateescape")


def ok_response(ncols, rows):
    """rows: iterable of value tuples."""
    parts = [f"OK {ncols} {len(rows)}"]
    parts.extend(encode_row(r) for r in rows)
    parts.append("END")
    return _out("\r\n".join(parts) + "\r\n")


def done_response(count):
    return _out(f"DONE {count}\r\n")


def err_response(code, message):
    msg = " ".join(str(message).split()) or "error"
    return _out(f"ERR {code} {msg}\r\n")


def pong_response():
    return b"PONG\r\n"


def bye_response():
    return b"BYE\r\n"


def stats_response(pairs):
    parts = [f"STAT {name} {value}" for name, value in pairs]
    parts.append("END")
    return _out("\r\n".join(parts) + "\r\n")


# request classification -------------------------------------------------------


class SqlRequest:
    __slots__ = ("text",)

    def __init__(self, text):
        self.text = text


class AdminRequest:
    __slots__ = ("verb", "table", "kind", "amount")

    def __init__(self, verb, table=None, kind=None, amount=None):
        self.verb = verb
        self.table = table
        self.kind = kind
        self.amount = amount


def decode_request(line):
    """Classify one request line (str, newline already stripped).

    Returns None for empty lines, which are ignored per protocol.
    """
    stripped = line.strip()
    if not stripped:
        return None
    parts = stripped.split(None, 1)
    verb = parts[0].upper()
    if verb not in ADMIN_VERBS:
        return SqlRequest(stripped)
    return _parse_admin(verb, parts[1].strip() if len(parts) > 1 else "")


def _parse_admin(verb, rest):
    if verb in ("PING", "QUIT", "STATS"):
        if rest:
            raise ProtocolError(f"{verb} takes no arguments")
        return AdminRequest(verb)
    if verb == "FLUSH":
        if not rest or len(rest.split()) != 1:
            raise ProtocolError("usage: FLUSH <table>|ALL")
        name = rest.strip()
        return AdminRequest(verb, table=None if name.upper() == "ALL" else name)
    if verb == "SWEEP":
        if not rest or len(rest.split()) != 1:
            raise ProtocolError("usage: SWEEP <table>")
        return AdminRequest(verb, table=rest.strip())
    # POLICY <table> AGE s | ROWS n | OPS k | OFF
    words = rest.split()
    if len(words) == 2 and words[1].upper() == "OFF":
        return AdminRequest(verb, table=words[0], kind="OFF")
    if len(words) != 3:
        raise ProtocolError("usage: POLICY <table> AGE s|ROWS n|OPS k|OFF")
    table, kind, amount_text = words[0], words[1].upper(), words[2]
    if kind not in ("AGE", "ROWS", "OPS"):
        raise ProtocolError(f"unknown POLICY kind {words[1]}")
    try:
        amount = float(amount_text) if kind == "AGE" else int(amount_text)
    except ValueError:
        raise ProtocolError(f"bad POLICY amount {amount_text}") from None
    if amount < 0:
        raise ProtocolError("POLICY amount must be >= 0")
    return AdminRequest(verb, table=table, kind=kind, amount=amount)
