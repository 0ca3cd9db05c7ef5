"""Daemon command line. Environment variables mirror the flags with a
SQCACHED_ prefix (SQCACHED_TCP, SQCACHED_UNIX, ...); flags win."""

import argparse
import logging
import os
import signal
import sys

from .server import Server, ServerConfig


def _env(name, default=None):
    return os.environ.get(f"SQCACHED_{name}", default)


def _parse_hostport(text):
    host, sep, port = text.rpartition(":")
    if not sep:
        raise argparse.ArgumentTypeError("expected HOST:PORT")
    try:
        return (host, int(port))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad port {port!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sqcached",
        description="In-memory cache daemon speaking a SQL subset over a "
        "line-based text protocol.",
    )
    parser.add_argument(
        "--tcp",
        type=_parse_hostport,
        default=None,
        metavar="HOST:PORT",
        help="TCP listen address (default 127.0.0.1:8124)",
    )
    parser.add_argument("--no-tcp", action="store_true", help="disable the TCP listener")
    parser.add_argument(
        "--unix", default=None, metavar="PATH", help="also listen on a local socket"
    )
    parser.add_argument(
        "--max-line",
        type=int,
        default=None,
        metavar="BYTES",
        help="request line cap (default 1 MiB)",
    )
    parser.add_argument(
        "--max-rows",
        type=int,
        default=None,
        metavar="N",
        help="response row cap (default 100000)",
    )
    parser.add_argument(
        "--ops-per-sweep",
        type=int,
        default=None,
        metavar="K",
        help="default write count between expiry sweeps (default 1000)",
    )
    parser.add_argument("--verbose", action="store_true", help="per-request logging")
    return parser


def config_from_args(args):
    tcp = args.tcp
    if tcp is None:
        env_tcp = _env("TCP")
        tcp = _parse_hostport(env_tcp) if env_tcp else ("127.0.0.1", 8124)
    no_tcp = args.no_tcp or (_env("NO_TCP", "") not in ("", "0"))
    unix_path = args.unix if args.unix is not None else _env("UNIX")
    max_line = args.max_line if args.max_line is not None else int(_env("MAX_LINE", 1 << 20))
    max_rows = args.max_rows if args.max_rows is not None else int(_env("MAX_ROWS", 100_000))
    ops = (
        args.ops_per_sweep
        if args.ops_per_sweep is not None
        else int(_env("OPS_PER_SWEEP", 1000))
    )
    return ServerConfig(
        tcp=None if no_tcp else tcp,
        unix_path=unix_path,
        max_line_bytes=max_line,
        max_response_rows=max_rows,
        ops_per_sweep=ops,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    verbose = args.verbose or (_env("VERBOSE", "") not in ("", "0"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
        server = Server(config)
    except ValueError as err:
        print(f"sqcached: {err}", file=sys.stderr)
        return 2

    def stop(signum, frame):
        server.shutdown()

    signal.signal(signal.SIGTERM, stop)
    signal.signal(signal.SIGINT, stop)
    server.run()
    return 0


if __name__ == "__main__":
    sys.exit(main())
