"""Benchmark runners.

Every timed operation is checked first: a run that returns wrong data or
wrong affected-row counts raises BenchError instead of reporting timings.
"""

import random
import statistics
import threading
import time

from .fixture import (
    _value_at,
    build_expiry_fixture,
    build_kv,
    geometric_size,
    rows_for_page,
    rows_for_user,
    value_pool,
)
from .report import BenchReport, latency_summary, percentile


class BenchError(Exception):
    """A timed operation produced incorrect results; the run is void."""


# key-value read/write -------------------------------------------------------


class _Worker(threading.Thread):
    def __init__(self, factory, ops, records, seed, op_fn):
        super().__init__(daemon=True)
        self.factory = factory
        self.ops = ops
        self.records = records
        self.rng = random.Random(seed)
        self.op_fn = op_fn
        self.samples = []  # (key_index, latency_us)
        self.misses = 0
        self.error = None

    def run(self):
        try:
            client = self.factory()
            try:
                for _ in range(self.ops):
                    r = self.rng.randrange(self.records)
                    t0 = time.perf_counter()
                    hit = self.op_fn(client, r)
                    dt_us = (time.perf_counter() - t0) * 1e6
                    if not hit:
                        self.misses += 1
                    self.samples.append((r, dt_us))
            finally:
                client.close()
        except Exception as err:  # surfaced by the coordinator
            self.error = err


def _read_op(client, r):
    rows = client.query(f"SELECT value FROM kv WHERE key = 'k{r}'")
    if len(rows) > 1:
        raise BenchError(f"key k{r} returned {len(rows)} rows")
    return len(rows) == 1


def _make_write_op(pool, mean, seed):
    rng = random.Random(seed ^ 0x77)

    def op(client, r):
        size = geometric_size(rng, mean)
        v = _value_at(pool, rng.randrange(1 << 16), size)
        affected = client.query(f"UPDATE kv SET value = '{v}' WHERE key = 'k{r}'")
        if affected > 1:
            raise BenchError(f"key k{r} updated {affected} rows")
        return affected == 1

    return op


def _run_clients(factory, records, ops, clients, seed, op_fn):
    per_client = max(1, ops // clients)
    workers = [
        _Worker(factory, per_client, records, seed + 1000 * i, op_fn)
        for i in range(clients)
    ]
    t0 = time.perf_counter()
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    wall = time.perf_counter() - t0
    for w in workers:
        if w.error is not None:
            raise BenchError(f"client failed: {w.error}") from w.error
    samples = [s for w in workers for s in w.samples]
    misses = sum(w.misses for w in workers)
    return samples, misses, wall


def _size_buckets(samples, sizes):
    ordered_sizes = sorted(sizes)
    edges = [percentile(ordered_sizes, d * 10) for d in range(1, 11)]
    buckets = []
    for d in range(10):
        low = edges[d - 1] if d else 0
        lat = [
            us for r, us in samples if low < sizes[r] <= edges[d]
        ]
        summary = latency_summary(lat)
        summary.update({"decile": d + 1, "max_bytes": edges[d]})
        buckets.append(summary)
    return buckets


def run_kv_read(
    factory,
    records,
    ops,
    clients,
    mean_value_bytes,
    seed,
    compare_unindexed=True,
):
    """Point-SELECT throughput on the kv fixture, bucketed by value size."""
    setup = factory()
    sizes = build_kv(setup, records, mean_value_bytes, seed, with_index=True)
    setup.close()
    samples, misses, wall = _run_clients(factory, records, ops, clients, seed, _read_op)
    report = BenchReport("kv_read")
    report.params = {
        "records": records,
        "ops": len(samples),
        "clients": clients,
        "mean_value_bytes": mean_value_bytes,
        "seed": seed,
    }
    lat = latency_summary([us for _, us in samples])
    report.metrics = {
        "throughput_ops_per_s": len(samples) / wall if wall > 0 else 0.0,
        "misses": misses,
        **lat,
    }
    if records:
        report.buckets = _size_buckets(samples, sizes)
    if compare_unindexed and records:
        setup = factory()
        build_kv(setup, records, mean_value_bytes, seed, with_index=False)
        setup.close()
        unindexed_ops = max(50, min(ops // 20, 500))
        u_samples, _, u_wall = _run_clients(
            factory, records, unindexed_ops, clients, seed, _read_op
        )
        u_tput = len(u_samples) / u_wall if u_wall > 0 else 0.0
        report.metrics["unindexed_throughput_ops_per_s"] = u_tput
        report.metrics["index_speedup"] = (
            report.metrics["throughput_ops_per_s"] / u_tput if u_tput else None
        )
    return report


def run_kv_write(factory, records, ops, clients, mean_value_bytes, seed):
    """UPDATE-by-key throughput (the set() analogue) on the kv fixture."""
    setup = factory()
    sizes = build_kv(setup, records, mean_value_bytes, seed, with_index=True)
    setup.close()
    pool = value_pool(seed)
    op = _make_write_op(pool, mean_value_bytes, seed)
    samples, misses, wall = _run_clients(factory, records, ops, clients, seed, op)
    report = BenchReport("kv_write")
    report.params = {
        "records": records,
        "ops": len(samples),
        "clients": clients,
        "mean_value_bytes": mean_value_bytes,
        "seed": seed,
    }
    report.metrics = {
        "throughput_ops_per_s": len(samples) / wall if wall > 0 else 0.0,
        "misses": misses,
        **latency_summary([us for _, us in samples]),
    }
    if records:
        report.buckets = _size_buckets(samples, sizes)
    return report


# forced expiry ---------------------------------------------------------------


def _timed_request(client, line, expected):
    t0 = time.perf_counter()
    count = client.query(line)
    dt_us = (time.perf_counter() - t0) * 1e6
    if count != expected:
        raise BenchError(f"{line!r} removed {count}, expected {expected}")
    return dt_us


def run_expiry(factory, records, pages, users, mean_value_bytes, seed, reps=30):
    """Times the three forced-expiry scenarios on fresh fixtures.

    Per repetition the fixture is rebuilt from scratch; medians over the
    repetitions are compared for the page < user < flush ordering.
    """
    rng = random.Random(seed)
    client = factory()
    scenarios = {}
    try:
        plans = [
            (
                "page_delete",
                lambda: _page_op(client, records, pages, rng),
            ),
            (
                "user_delete",
                lambda: _user_op(client, records, users, rng),
            ),
            (
                "flush_all",
                lambda: _timed_request(client, "FLUSH cache", records),
            ),
        ]
        for name, op in plans:
            times = []
            for _ in range(reps):
                build_expiry_fixture(
                    client, records, pages, users, mean_value_bytes, seed
                )
                times.append(op())
            scenarios[name] = {
                "reps": reps,
                "median_us": statistics.median(times) if times else None,
                "times_us": times,
            }
    finally:
        client.close()

    report = BenchReport("expiry")
    report.params = {
        "records": records,
        "pages": pages,
        "users": users,
        "mean_value_bytes": mean_value_bytes,
        "seed": seed,
        "reps": reps,
    }
    page_med = scenarios["page_delete"]["median_us"]
    user_med = scenarios["user_delete"]["median_us"]
    flush_med = scenarios["flush_all"]["median_us"]
    report.scenarios = scenarios
    if records == 0:
        report.notes.append("zero fixture: ordering assertion skipped")
    else:
        report.metrics = {
            "factor_user_over_page": user_med / page_med if page_med else None,
            "factor_flush_over_user": flush_med / user_med if user_med else None,
            "ordering_ok": bool(page_med < user_med < flush_med),
        }
    return report


def _page_op(client, records, pages, rng):
    page = rng.randrange(pages)
    expected = rows_for_page(records, pages, page)
    return _timed_request(
        client, f"DELETE FROM cache WHERE page_id = {page}", expected
    )


def _user_op(client, records, users, rng):
    user = rng.randrange(users)
    expected = rows_for_user(records, users, user)
    return _timed_request(
        client, f"DELETE FROM cache WHERE user_id = {user}", expected
    )


# kernel comparison -------------------------------------------------------------


def run_kernels(n_ops, seed):
    """Drive the compiled and pure-Python kernels through one workload."""
    from .. import kernel_py

    backends = [("python", kernel_py)]
    try:
        from .. import _ckernel

        backends.insert(0, ("compiled", _ckernel))
    except ImportError:
        pass

    rng = random.Random(seed)
    int_keys = rng.sample(range(n_ops * 4), n_ops)
    tuple_keys = [(f"k{v}", i) for i, v in enumerate(int_keys)]

    report = BenchReport("kernels")
    report.params = {"ops": n_ops, "seed": seed}
    for name, mod in backends:
        for label, keys in (("int", int_keys), ("tuple", tuple_keys)):
            tree = mod.BTree(64)
            t0 = time.perf_counter()
            for k in keys:
                tree.insert(k, k)
            t_insert = time.perf_counter() - t0
            t0 = time.perf_counter()
            for k in keys:
                tree.get(k)
            t_seek = time.perf_counter() - t0
            t0 = time.perf_counter()
            n_scanned = sum(1 for _ in tree.scan())
            t_scan = time.perf_counter() - t0
            if n_scanned != n_ops:
                raise BenchError("scan lost keys")
            t0 = time.perf_counter()
            for k in keys:
                tree.delete(k)
            t_delete = time.perf_counter() - t0
            prefix = f"{name}_{label}"
            report.metrics[f"{prefix}_insert_ops_per_s"] = n_ops / t_insert
            report.metrics[f"{prefix}_seek_ops_per_s"] = n_ops / t_seek
            report.metrics[f"{prefix}_scan_ops_per_s"] = n_ops / t_scan
            report.metrics[f"{prefix}_delete_ops_per_s"] = n_ops / t_delete
    if len(backends) == 2:
        for label in ("int", "tuple"):
            for op in ("insert", "seek", "scan", "delete"):
                c = report.metrics[f"compiled_{label}_{op}_ops_per_s"]
                p = report.metrics[f"python_{label}_{op}_ops_per_s"]
                report.metrics[f"speedup_{label}_{op}"] = c / p
    else:
        report.notes.append("compiled kernel unavailable; single-backend run")
    return report
