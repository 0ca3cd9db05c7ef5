"""Deterministic fixture generation for the benchmark experiments.

Two schemas: a plain key-value table for read/write throughput, and a
page/user-tagged cache table for the forced-expiry scenarios. Row counts
per page and per user follow from round-robin assignment, so expected
affected-row counts are exact and every timed operation can be checked.
"""

import math
import random
import string

from .conn import ServerError

_POOL_BYTES = 1 << 20
_MAX_VALUE = 16384


def value_pool(seed):
    rng = random.Random(seed ^ 0x5EED)
    alphabet = string.ascii_letters + string.digits
    return "".join(rng.choices(alphabet, k=_POOL_BYTES))


def geometric_size(rng, mean):
    """Sample a value length with mean ~`mean`, support starting at 1."""
    if mean <= 1:
        return 1
    p = 1.0 / mean
    u = rng.random()
    size = 1 + int(math.log(1.0 - u) / math.log(1.0 - p))
    return min(size, _MAX_VALUE)


def value_sizes(records, mean, seed):
    rng = random.Random(seed)
    return [geometric_size(rng, mean) for _ in range(records)]


def _value_at(pool, i, size):
    start = (i * 2654435761) % (_POOL_BYTES - _MAX_VALUE)
    return pool[start : start + size]


def drop_if_exists(client, table):
    try:
        client.query(f"DROP TABLE {table}")
    except ServerError as err:
        if err.code != "NOTABLE":
            raise


def build_kv(client, records, mean_value_bytes, seed, with_index=True, batch=400):
    """Create and populate kv(key, value, time); returns the size list."""
    drop_if_exists(client, "kv")
    client.query("CREATE TABLE kv (key TEXT, value TEXT, time INTEGER)")
    if with_index:
        client.query("CREATE INDEX kv_key ON kv (key)")
    sizes = value_sizes(records, mean_value_bytes, seed)
    pool = value_pool(seed)
    rows = []
    for i in range(records):
        rows.append(f"('k{i}','{_value_at(pool, i, sizes[i])}',{i})")
        if len(rows) == batch:
            client.query("INSERT INTO kv VALUES " + ",".join(rows))
            rows.clear()
    if rows:
        client.query("INSERT INTO kv VALUES " + ",".join(rows))
    return sizes


def build_expiry_fixture(
    client, records, pages, users, mean_value_bytes, seed, batch=400
):
    """Create and populate cache(key, page_id, user_id, value, time)."""
    drop_if_exists(client, "cache")
    client.query(
        "CREATE TABLE cache (key TEXT, page_id INTEGER, user_id INTEGER, "
        "value TEXT, time INTEGER)"
    )
    client.query("CREATE INDEX cache_key ON cache (key)")
    client.query("CREATE INDEX cache_page ON cache (page_id)")
    client.query("CREATE INDEX cache_user ON cache (user_id)")
    sizes = value_sizes(records, mean_value_bytes, seed)
    pool = value_pool(seed)
    rows = []
    for i in range(records):
        rows.append(
            f"('k{i}',{i % pages},{i % users},"
            f"'{_value_at(pool, i, sizes[i])}',{i})"
        )
        if len(rows) == batch:
            client.query("INSERT INTO cache VALUES " + ",".join(rows))
            rows.clear()
    if rows:
        client.query("INSERT INTO cache VALUES " + ",".join(rows))
    return sizes


def rows_for_page(records, pages, page_id):
    """Round-robin arithmetic: rows assigned to one page."""
    if page_id >= pages:
        return 0
    return records // pages + (1 if page_id < records % pages else 0)


def rows_for_user(records, users, user_id):
    if user_id >= users:
        return 0
    return records // users + (1 if user_id < records % users else 0)
