"""The statement engine: one entry point per request, no concurrency.

All SQL plus the table-level admin operations (POLICY/FLUSH/SWEEP) come
through here; the server serializes calls, so nothing in the engine
locks. Statement failures leave tables untouched.
"""

import time

from . import ast_nodes as A
from . import expiry
from .errors import EngineError, ParseError, ProtocolError
from .executor import Executor, ResultSet
from .parser import parse_statement
from .storage import Catalog, TableSchema


def _default_clock_ms():
    return int(time.time() * 1000)


class Affected:
    """Result of a write/DDL/admin operation: number of rows touched."""

    __slots__ = ("count",)

    def __init__(self, count):
        self.count = count


class Engine:
    def __init__(self, default_ops_per_sweep=1000, clock_ms=None, branching=64):
        self.catalog = Catalog(
            branching=branching, default_ops_per_sweep=default_ops_per_sweep
        )
        self.executor = Executor(self.catalog)
        self.clock_ms = clock_ms or _default_clock_ms
        self.expired_by_age = 0
        self.expired_by_size = 0
        self.expired_by_flush = 0

    # SQL ------------------------------------------------------------------

    def execute_sql(self, text):
        """Parse and run one SQL statement; ResultSet or Affected."""
        stmt = parse_statement(text)
        t = type(stmt)
        if t is A.Select:
            return self.executor.execute_select(stmt)
        if t is A.Insert:
            count = self.executor.execute_insert(stmt, self.clock_ms())
            table = self.catalog.get(stmt.table)
            self._note_write(table)
            self._enforce_rows(table)
            return Affected(count)
        if t is A.Update:
            count = self.executor.execute_update(stmt)
            self._note_write(self.catalog.get(stmt.table))
            return Affected(count)
        if t is A.Delete:
            count = self.executor.execute_delete(stmt)
            self._note_write(self.catalog.get(stmt.table))
            return Affected(count)
        if t is A.CreateTable:
            self._create_table(stmt)
            return Affected(0)
        if t is A.DropTable:
            self.catalog.get(stmt.name)
            self.catalog.drop_table(stmt.name)
            return Affected(0)
        if t is A.CreateIndex:
            self.catalog.create_index(stmt.name, stmt.table, stmt.columns)
            return Affected(0)
        raise EngineError(f"unhandled statement {stmt!r}")

    def _create_table(self, stmt):
        seen = set()
        for name, _ in stmt.columns:
            if name.lower() in seen:
                raise ParseError(f"duplicate column {name}")
            seen.add(name.lower())
        columns = [(n, a or "NONE") for n, a in stmt.columns]
        self.catalog.create_table(TableSchema(stmt.name, columns))

    def _note_write(self, table):
        result = expiry.note_operation(table, self.clock_ms())
        if result is not None:
            self.expired_by_age += result.age_removed
            self.expired_by_size += result.size_removed

    def _enforce_rows(self, table):
        removed = expiry.enforce_max_rows(table)
        self.expired_by_size += removed

    # admin ------------------------------------------------------------------

    def set_policy(self, table_name, kind, amount):
        """POLICY <table> AGE s | ROWS n | OPS k | OFF."""
        table = self.catalog.get(table_name)
        policy = table.policy
        if kind == "AGE":
            policy.max_age_ms = int(amount * 1000)
        elif kind == "ROWS":
            policy.max_rows = int(amount)
        elif kind == "OPS":
            if amount < 1:
                raise ProtocolError("OPS must be >= 1")
            policy.ops_per_sweep = int(amount)
        elif kind == "OFF":
            policy.max_age_ms = None
            policy.max_rows = None
        else:
            raise ProtocolError(f"unknown POLICY kind {kind}")
        return Affected(0)

    def sweep_table(self, table_name):
        table = self.catalog.get(table_name)
        result = expiry.sweep(table, self.clock_ms())
        self.expired_by_age += result.age_removed
        self.expired_by_size += result.size_removed
        return Affected(result.total)

    def flush_table(self, table_name):
        if table_name is None:
            removed = 0
            for table in self.catalog.tables.values():
                removed += expiry.flush(table)
        else:
            removed = expiry.flush(self.catalog.get(table_name))
        self.expired_by_flush += removed
        return Affected(removed)

    # introspection ---------------------------------------------------------

    def plan_for(self, sql):
        stmt = parse_statement(sql)
        return self.executor.plan_select(stmt)

    def stats(self):
        return {
            "rows_expired_age": self.expired_by_age,
            "rows_expired_size": self.expired_by_size,
            "rows_expired_flush": self.expired_by_flush,
            "tables": len(self.catalog.tables),
            "est_bytes": self.catalog.total_est_bytes(),
        }

    def audit(self):
        """Validate every table's trees and index consistency (tests)."""
        for table in self.catalog.tables.values():
            table.audit()


__all__ = ["Engine", "Affected", "ResultSet"]
