"""Automatic data expiry: age, row-count, and operation-count triggers.

Sweeps are lazy: they piggyback on write statements through a per-table
operation counter, so an idle table keeps stale rows until the next write
or an explicit SWEEP. The row-count trigger additionally fires right after
INSERT so the table never overshoots max_rows between sweeps.
"""

from dataclasses import dataclass


@dataclass
class ExpiryPolicy:
    """Per-table policy; None disables a trigger."""

    max_age_ms: int | None = None
    max_rows: int | None = None
    ops_per_sweep: int = 1000

    def __post_init__(self):
        if self.ops_per_sweep < 1:
            raise ValueError("ops_per_sweep must be >= 1")


@dataclass
class SweepResult:
    age_removed: int = 0
    size_removed: int = 0

    @property
    def total(self):
        return self.age_removed + self.size_removed


def sweep(table, now_ms):
    """Apply the age trigger then the row-count trigger to one table."""
    result = SweepResult()
    policy = table.policy
    if policy.max_age_ms is not None:
        cutoff = now_ms - policy.max_age_ms
        stale = []
        # ts_ms is nondecreasing in rowid order, so stop at the first keeper
        for rowid, row in table.rows.items():
            if row.ts_ms >= cutoff:
                break
            stale.append(rowid)
        result.age_removed = table.delete_rows(stale)
    result.size_removed = enforce_max_rows(table)
    return result


def enforce_max_rows(table):
    """Evict oldest rows (ascending rowid) until the table fits max_rows."""
    policy = table.policy
    if policy.max_rows is None:
        return 0
    excess = table.row_count - policy.max_rows
    if excess <= 0:
        return 0
    victims = []
    for rowid, _ in table.rows.items():
        victims.append(rowid)
        if len(victims) == excess:
            break
    return table.delete_rows(victims)


def note_operation(table, now_ms):
    """Count one write statement; run a sweep every ops_per_sweep writes.

    Returns the SweepResult when a sweep ran, else None.
    """
    table.op_counter += 1
    if table.op_counter >= table.policy.ops_per_sweep:
        table.op_counter = 0
        return sweep(table, now_ms)
    return None


def flush(table):
    """Remove every row, retaining schema and (empty) indexes.

    Deletion goes row by row through the normal path: bulk expiry cost is
    part of what the expiry benchmark measures, so it must scale with the
    number of records rather than cheat by swapping in empty trees.
    """
    rowids = [rowid for rowid, _ in table.rows.items()]
    return table.delete_rows(rowids)
