"""Memory-only table storage.

Each table is a B-tree row store keyed by a monotone rowid plus zero or
more secondary B-trees keyed by (column values..., rowid). Rows carry a
hidden insertion timestamp used by age-based expiry; it is invisible to
SQL and never refreshed by UPDATE.
"""

from .errors import (
    DuplicateIndexError,
    TableMissingError,
    UnknownColumnError,
)
from .expiry import ExpiryPolicy
from .kernel import BTree
from .values import coerce_for_column, value_bytes_estimate

AFFINITIES = ("INTEGER", "REAL", "TEXT", "BLOB", "NONE")

_ROW_OVERHEAD = 24
_INDEX_ENTRY_OVERHEAD = 16


class TableSchema:
    def __init__(self, name, columns):
        """columns: list of (name, affinity); affinity NONE when undeclared."""
        self.name = name
        self.columns = list(columns)
        self.column_names = [c[0] for c in columns]
        self._positions = {c[0].lower(): i for i, c in enumerate(columns)}

    def column_index(self, name):
        pos = self._positions.get(name.lower())
        if pos is None:
            raise UnknownColumnError(f"no column {name} in table {self.name}")
        return pos

    def has_column(self, name):
        return name.lower() in self._positions


class Index:
    def __init__(self, name, column_indexes):
        self.name = name
        self.column_indexes = list(column_indexes)
        self.tree = BTree()

    def key_for(self, rowid, values):
        return tuple(values[i] for i in self.column_indexes) + (rowid,)


class Row:
    """Row payload stored in the row store: cell values plus hidden ts_ms."""

    __slots__ = ("values", "ts_ms")

    def __init__(self, values, ts_ms):
        self.values = values
        self.ts_ms = ts_ms


class Table:
    def __init__(self, schema, branching=64, ops_per_sweep=1000):
        self.schema = schema
        self.rows = BTree(branching)
        self.indexes = []
        self.branching = branching
        self.next_rowid = 1
        self.policy = ExpiryPolicy(ops_per_sweep=ops_per_sweep)
        self.op_counter = 0
        self.est_bytes = 0

    @property
    def name(self):
        return self.schema.name

    @property
    def row_count(self):
        return len(self.rows)

    def insert_row(self, values, ts_ms):
        """Insert one row (arity already checked); returns its rowid."""
        coerced = tuple(
            coerce_for_column(v, aff)
            for v, (_, aff) in zip(values, self.schema.columns)
        )
        rowid = self.next_rowid
        self.next_rowid += 1
        row = Row(coerced, ts_ms)
        self.rows.insert(rowid, row)
        for index in self.indexes:
            index.tree.insert(index.key_for(rowid, coerced), None)
        self.est_bytes += self._row_bytes(coerced)
        return rowid

    def update_row(self, rowid, new_values):
        """Replace a row's values in place; ts_ms is deliberately kept."""
        row = self.rows.get(rowid)
        old_values = row.values
        coerced = tuple(
            coerce_for_column(v, aff)
            for v, (_, aff) in zip(new_values, self.schema.columns)
        )
        for index in self.indexes:
            old_key = index.key_for(rowid, old_values)
            new_key = index.key_for(rowid, coerced)
            if old_key != new_key:
                index.tree.delete(old_key)
                index.tree.insert(new_key, None)
        row.values = coerced
        self.est_bytes += self._row_bytes(coerced) - self._row_bytes(old_values)

    def delete_rows(self, rowids):
        """Remove rows by id from the store and all indexes; returns count."""
        removed = 0
        for rowid in rowids:
            row = self.rows.get(rowid)
            if row is None:
                continue
            self.rows.delete(rowid)
            for index in self.indexes:
                index.tree.delete(index.key_for(rowid, row.values))
            self.est_bytes -= self._row_bytes(row.values)
            removed += 1
        return removed

    def create_index(self, name, column_names):
        for existing in self.indexes:
            if existing.name.lower() == name.lower():
                raise DuplicateIndexError(f"index {name} already exists")
        cols = [self.schema.column_index(c) for c in column_names]
        index = Index(name, cols)
        for rowid, row in self.rows.items():
            index.tree.insert(index.key_for(rowid, row.values), None)
        self.indexes.append(index)
        return index

    def scan_rowids(self):
        for rowid, _ in self.rows.items():
            yield rowid

    def _row_bytes(self, values):
        n = _ROW_OVERHEAD + len(self.indexes) * _INDEX_ENTRY_OVERHEAD
        for v in values:
            n += value_bytes_estimate(v)
        return n

    def audit(self):
        """Cross-check row store and indexes; raises ValueError on drift."""
        self.rows.validate()
        for index in self.indexes:
            index.tree.validate()
            if len(index.tree) != len(self.rows):
                raise ValueError(
                    f"index {index.name} holds {len(index.tree)} entries "
                    f"for {len(self.rows)} rows"
                )
            for key, _ in index.tree.items():
                rowid = key[-1]
                row = self.rows.get(rowid)
                if row is None:
                    raise ValueError(f"index {index.name} points at missing row")
                if index.key_for(rowid, row.values) != key:
                    raise ValueError(f"index {index.name} key drifted from row")


class Catalog:
    """All tables plus catalog-wide index name bookkeeping."""

    def __init__(self, branching=64, default_ops_per_sweep=1000):
        self.tables = {}
        self.branching = branching
        self.default_ops_per_sweep = default_ops_per_sweep
        self._index_names = set()

    def create_table(self, schema):
        key = schema.name.lower()
        if key in self.tables:
            from .errors import DuplicateTableError

            raise DuplicateTableError(f"table {schema.name} already exists")
        table = Table(
            schema,
            branching=self.branching,
            ops_per_sweep=self.default_ops_per_sweep,
        )
        self.tables[key] = table
        return table

    def drop_table(self, name):
        table = self.get(name)
        for index in table.indexes:
            self._index_names.discard(index.name.lower())
        del self.tables[name.lower()]

    def get(self, name):
        table = self.tables.get(name.lower())
        if table is None:
            raise TableMissingError(f"no such table {name}")
        return table

    def create_index(self, index_name, table_name, column_names):
        if index_name.lower() in self._index_names:
            raise DuplicateIndexError(f"index {index_name} already exists")
        table = self.get(table_name)
        index = table.create_index(index_name, column_names)
        self._index_names.add(index_name.lower())
        return index

    def total_est_bytes(self):
        return sum(t.est_bytes for t in self.tables.values())
