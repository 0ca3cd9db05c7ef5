"""Benchmark command line.

    sqcached-bench kv-read  --host H --port P --records N --ops K ...
    sqcached-bench kv-write ...
    sqcached-bench expiry   --records N --pages P --users U --reps R ...
    sqcached-bench kernels  --ops N

kv-read, kv-write and expiry need a running daemon (--host/--port or
--unix); kernels compares the compiled and pure-Python B-tree backends
in-process.
"""

import argparse
import sys

from .conn import WireClient
from .runners import BenchError, run_expiry, run_kernels, run_kv_read, run_kv_write


def _add_connection_args(p):
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8124)
    p.add_argument("--unix", default=None, metavar="PATH")


def _add_common_args(p):
    p.add_argument("--records", type=int, default=100_000)
    p.add_argument("--mean-value-bytes", type=int, default=512)
    p.add_argument("--seed", type=int, default=1)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true", help="machine-readable report")
    group.add_argument("--table", action="store_true", help="human-readable report")


def build_parser():
    parser = argparse.ArgumentParser(prog="sqcached-bench")
    sub = parser.add_subparsers(dest="command", required=True)

    kv_read = sub.add_parser("kv-read", help="point-SELECT throughput")
    _add_connection_args(kv_read)
    _add_common_args(kv_read)
    kv_read.add_argument("--clients", type=int, default=4)
    kv_read.add_argument("--ops", type=int, default=10_000)
    kv_read.add_argument(
        "--no-compare-unindexed",
        action="store_true",
        help="skip the unindexed-baseline pass",
    )

    kv_write = sub.add_parser("kv-write", help="UPDATE-by-key throughput")
    _add_connection_args(kv_write)
    _add_common_args(kv_write)
    kv_write.add_argument("--clients", type=int, default=4)
    kv_write.add_argument("--ops", type=int, default=10_000)

    expiry = sub.add_parser("expiry", help="forced-expiry scenario timings")
    _add_connection_args(expiry)
    _add_common_args(expiry)
    expiry.add_argument("--pages", type=int, default=30_000)
    expiry.add_argument("--users", type=int, default=1_000)
    expiry.add_argument("--reps", type=int, default=30)

    kernels = sub.add_parser("kernels", help="compare kernel backends in-process")
    kernels.add_argument("--ops", type=int, default=50_000)
    kernels.add_argument("--seed", type=int, default=1)
    group = kernels.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true")
    group.add_argument("--table", action="store_true")
    return parser


def _client_factory(args):
    if args.unix:
        return lambda: WireClient.connect_unix(args.unix)
    return lambda: WireClient.connect_tcp(args.host, args.port)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "kv-read":
            report = run_kv_read(
                _client_factory(args),
                args.records,
                args.ops,
                args.clients,
                args.mean_value_bytes,
                args.seed,
                compare_unindexed=not args.no_compare_unindexed,
            )
        elif args.command == "kv-write":
            report = run_kv_write(
                _client_factory(args),
                args.records,
                args.ops,
                args.clients,
                args.mean_value_bytes,
                args.seed,
            )
        elif args.command == "expiry":
            report = run_expiry(
                _client_factory(args),
                args.records,
                args.pages,
                args.users,
                args.mean_value_bytes,
                args.seed,
                reps=args.reps,
            )
        else:
            report = run_kernels(args.ops, args.seed)
    except BenchError as err:
        print(f"benchmark aborted: {err}", file=sys.stderr)
        return 1
    except ConnectionError as err:
        print(f"daemon unreachable: {err}", file=sys.stderr)
        return 1

    if args.json:
        print(report.to_json())
    else:
        print(report.render_table())
    return 0


if __name__ == "__main__":
    sys.exit(main())
