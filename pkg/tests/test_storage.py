import random

import pytest

from sqcached.errors import (
    DuplicateIndexError,
    DuplicateTableError,
    TableMissingError,
    UnknownColumnError,
)
from sqcached.storage import Catalog, TableSchema
from sqcached.values import value_bytes_estimate


def make_kv_catalog():
    catalog = Catalog()
    schema = TableSchema(
        "kv", [("key", "TEXT"), ("value", "TEXT"), ("time", "INTEGER")]
    )
    return catalog, catalog.create_table(schema)


class TestTableBasics:
    def test_first_rowid_is_one(self):
        _, table = make_kv_catalog()
        assert table.insert_row(["a", "1", 100], ts_ms=0) == 1

    def test_rowids_strictly_increase(self):
        _, table = make_kv_catalog()
        ids = [table.insert_row(["k", "v", i], ts_ms=i) for i in range(10)]
        assert ids == sorted(ids)
        assert len(set(ids)) == 10

    def test_rowids_never_reused(self):
        _, table = make_kv_catalog()
        r1 = table.insert_row(["a", "x", 1], ts_ms=0)
        table.delete_rows([r1])
        r2 = table.insert_row(["b", "y", 2], ts_ms=0)
        assert r2 > r1

    def test_affinity_coercion_on_insert(self):
        _, table = make_kv_catalog()
        rowid = table.insert_row(["a", "1", "250"], ts_ms=0)
        row = table.rows.get(rowid)
        assert row.values == ("a", "1", 250)  # TEXT column keeps "1"

    def test_delete_rows_counts(self):
        _, table = make_kv_catalog()
        rowid = table.insert_row(["a", "x", 1], ts_ms=0)
        assert table.delete_rows([]) == 0
        assert table.delete_rows([rowid]) == 1
        assert table.delete_rows([rowid]) == 0

    def test_ts_stamped(self):
        _, table = make_kv_catalog()
        rowid = table.insert_row(["a", "x", 1], ts_ms=12345)
        assert table.rows.get(rowid).ts_ms == 12345

    def test_update_keeps_ts(self):
        _, table = make_kv_catalog()
        rowid = table.insert_row(["a", "x", 1], ts_ms=777)
        table.update_row(rowid, ["a", "y", 2])
        row = table.rows.get(rowid)
        assert row.ts_ms == 777
        assert row.values == ("a", "y", 2)


class TestIndexes:
    def test_index_on_empty_table(self):
        catalog, table = make_kv_catalog()
        catalog.create_index("kv_key", "kv", ["key"])
        assert len(table.indexes[0].tree) == 0

    def test_backfill_entry_count(self):
        catalog, table = make_kv_catalog()
        for i in range(1000):
            table.insert_row([f"k{i % 100}", "v", i], ts_ms=i)
        catalog.create_index("kv_key", "kv", ["key"])
        assert len(table.indexes[0].tree) == 1000
        table.audit()

    def test_lookup_after_insert(self):
        catalog, table = make_kv_catalog()
        catalog.create_index("kv_key", "kv", ["key"])
        rowid = table.insert_row(["a", "x", 1], ts_ms=0)
        index = table.indexes[0]
        hits = [key[-1] for key, _ in index.tree.scan(("a",), ("a",))]
        assert hits == [rowid]

    def test_backfill_scan_equals_full_scan_sorted(self):
        catalog, table = make_kv_catalog()
        rng = random.Random(3)
        for i in range(500):
            table.insert_row([f"k{rng.randrange(50)}", "v", i], ts_ms=i)
        catalog.create_index("kv_key", "kv", ["key"])
        index = table.indexes[0]
        via_index = [key[:1] + (key[-1],) for key, _ in index.tree.scan()]
        via_scan = sorted(
            ((row.values[0], rowid) for rowid, row in table.rows.items()),
        )
        assert via_index == via_scan

    def test_duplicate_index_name(self):
        catalog, _ = make_kv_catalog()
        catalog.create_index("i1", "kv", ["key"])
        with pytest.raises(DuplicateIndexError):
            catalog.create_index("i1", "kv", ["value"])

    def test_unknown_column(self):
        catalog, _ = make_kv_catalog()
        with pytest.raises(UnknownColumnError):
            catalog.create_index("i1", "kv", ["nope"])

    def test_update_maintains_indexes(self):
        catalog, table = make_kv_catalog()
        catalog.create_index("kv_key", "kv", ["key"])
        rowid = table.insert_row(["a", "x", 1], ts_ms=0)
        table.update_row(rowid, ["b", "x", 1])
        index = table.indexes[0]
        assert [k[-1] for k, _ in index.tree.scan(("a",), ("a",))] == []
        assert [k[-1] for k, _ in index.tree.scan(("b",), ("b",))] == [rowid]
        table.audit()


class TestCatalog:
    def test_missing_table(self):
        catalog = Catalog()
        with pytest.raises(TableMissingError):
            catalog.get("nope")

    def test_duplicate_table(self):
        catalog, _ = make_kv_catalog()
        with pytest.raises(DuplicateTableError):
            catalog.create_table(TableSchema("KV", [("a", "NONE")]))

    def test_drop_releases_index_names(self):
        catalog, _ = make_kv_catalog()
        catalog.create_index("i1", "kv", ["key"])
        catalog.drop_table("kv")
        catalog.create_table(
            TableSchema("kv", [("key", "TEXT"), ("value", "TEXT"), ("time", "INTEGER")])
        )
        catalog.create_index("i1", "kv", ["key"])  # name free again


class TestConsistencyAudit:
    def test_random_workload_consistency(self):
        catalog, table = make_kv_catalog()
        catalog.create_index("kv_key", "kv", ["key"])
        catalog.create_index("kv_time", "kv", ["time", "key"])
        rng = random.Random(11)
        live = []
        for i in range(3000):
            action = rng.random()
            if action < 0.6 or not live:
                rowid = table.insert_row(
                    [f"k{rng.randrange(200)}", "v" * rng.randrange(5), i], ts_ms=i
                )
                live.append(rowid)
            elif action < 0.85:
                victim = live.pop(rng.randrange(len(live)))
                assert table.delete_rows([victim]) == 1
            else:
                rowid = rng.choice(live)
                table.update_row(
                    rowid, [f"k{rng.randrange(200)}", "w", i]
                )
        table.audit()
        assert table.row_count == len(live)


class TestByteEstimate:
    def test_within_2x_of_model(self):
        catalog, table = make_kv_catalog()
        rng = random.Random(5)
        model_bytes = 0
        for i in range(500):
            values = [f"key{i}", "x" * rng.randrange(1, 300), i]
            table.insert_row(values, ts_ms=i)
            # independent rough model: payload bytes plus a small constant
            model_bytes += sum(
                len(v) if isinstance(v, (str, bytes)) else 8 for v in values
            ) + 40
        assert model_bytes / 2 <= table.est_bytes <= model_bytes * 2

    def test_estimate_shrinks_on_delete(self):
        _, table = make_kv_catalog()
        rowids = [table.insert_row(["k", "v" * 100, i], ts_ms=i) for i in range(50)]
        before = table.est_bytes
        table.delete_rows(rowids)
        assert table.est_bytes < before
        assert table.est_bytes == 0

    def test_value_estimator_monotone_in_payload(self):
        assert value_bytes_estimate("ab") < value_bytes_estimate("abcdef")
        assert value_bytes_estimate(None) < value_bytes_estimate(b"12345678")
