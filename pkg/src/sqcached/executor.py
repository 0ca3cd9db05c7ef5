"""Statement execution: binding, access-path planning, and evaluation.

Joins are nested loops in FROM order. Every access path hands back rows in
ascending-rowid order (index hits are collected and sorted), so results
are identical whatever indexes exist; the full WHERE clause is re-checked
against every candidate row for the same reason.
"""

from functools import cmp_to_key

from . import ast_nodes as A
from .errors import (
    AggregateMisuseError,
    AmbiguousColumnError,
    ArityMismatchError,
    ParseError,
    TypeMismatchError,
    UnknownColumnError,
    UnknownFunctionError,
)
from .kernel import compare_values
from .parser import KEYWORDS
from .values import (
    AGGREGATE_FUNCTIONS,
    SCALAR_FUNCTIONS,
    eval_binop,
    eval_scalar,
    eval_unary,
    is_numeric,
    logical_and,
    logical_or,
    sql_like,
    truth,
)

MAX_JOIN_TABLES = 4


class ResultSet:
    def __init__(self, columns, rows):
        self.columns = columns
        self.rows = rows

    def __repr__(self):
        return f"ResultSet({self.columns!r}, {len(self.rows)} rows)"


class FullScan:
    def describe(self):
        return "scan"


class IndexSeek:
    def __init__(self, index, eq_exprs):
        self.index = index
        self.eq_exprs = eq_exprs

    def describe(self):
        return f"seek({self.index.name}, eq={len(self.eq_exprs)})"


class IndexRange:
    def __init__(self, index, eq_exprs, lo_expr, hi_expr):
        self.index = index
        self.eq_exprs = eq_exprs
        self.lo_expr = lo_expr
        self.hi_expr = hi_expr

    def describe(self):
        bounds = ("lo" if self.lo_expr is not None else "") + (
            "hi" if self.hi_expr is not None else ""
        )
        return f"range({self.index.name}, eq={len(self.eq_exprs)}, {bounds})"


class Plan:
    def __init__(self, paths):
        self.paths = paths

    def describe(self):
        return [p.describe() for p in self.paths]


class _Source:
    __slots__ = ("table", "label")

    def __init__(self, table, label):
        self.table = table
        self.label = label


class Binder:
    """Resolves column references against the FROM sources.

    Resolutions are held in a side table keyed by node identity, keeping
    the AST itself untouched.
    """

    def __init__(self, sources):
        self.sources = sources
        self.resolution = {}

    def resolve_ref(self, node):
        key = id(node)
        if key in self.resolution:
            return self.resolution[key]
        hits = []
        for i, src in enumerate(self.sources):
            if node.table is not None and node.table.lower() != src.label.lower():
                continue
            if src.table.schema.has_column(node.name):
                hits.append((i, src.table.schema.column_index(node.name)))
        if not hits:
            raise UnknownColumnError(f"no such column {_ref_text(node)}")
        if len(hits) > 1:
            raise AmbiguousColumnError(f"ambiguous column {_ref_text(node)}")
        self.resolution[key] = hits[0]
        return hits[0]

    def bind_expr(self, node):
        """Resolve every reference and validate calls in one walk."""
        t = type(node)
        if t is A.ColumnRef:
            self.resolve_ref(node)
        elif t is A.Unary:
            self.bind_expr(node.operand)
        elif t is A.Binary:
            self.bind_expr(node.left)
            self.bind_expr(node.right)
        elif t is A.Like:
            self.bind_expr(node.subject)
            self.bind_expr(node.pattern)
        elif t is A.IsNull:
            self.bind_expr(node.operand)
        elif t is A.FuncCall:
            if node.name in AGGREGATE_FUNCTIONS:
                if node.star:
                    if node.name != "COUNT":
                        raise ArityMismatchError(f"{node.name}(*) is not valid")
                elif len(node.args) != 1:
                    raise ArityMismatchError(f"{node.name} takes one argument")
            elif node.name in SCALAR_FUNCTIONS:
                if node.star or len(node.args) != 1:
                    raise ArityMismatchError(f"{node.name} takes one argument")
            else:
                raise UnknownFunctionError(f"unknown function {node.name}")
            for a in node.args:
                self.bind_expr(a)


def _ref_text(node):
    return f"{node.table}.{node.name}" if node.table else node.name


def _walk(node):
    yield node
    t = type(node)
    if t is A.Unary:
        yield from _walk(node.operand)
    elif t is A.Binary:
        yield from _walk(node.left)
        yield from _walk(node.right)
    elif t is A.Like:
        yield from _walk(node.subject)
        yield from _walk(node.pattern)
    elif t is A.IsNull:
        yield from _walk(node.operand)
    elif t is A.FuncCall:
        for a in node.args:
            yield from _walk(a)


def _aggregates_in(node):
    return [
        n for n in _walk(node) if type(n) is A.FuncCall and n.name in AGGREGATE_FUNCTIONS
    ]


def _split_conjuncts(node):
    if node is None:
        return []
    if type(node) is A.Binary and node.op == "AND":
        return _split_conjuncts(node.left) + _split_conjuncts(node.right)
    return [node]


class Executor:
    def __init__(self, catalog):
        self.catalog = catalog

    # SELECT ---------------------------------------------------------------

    def execute_select(self, stmt):
        bound = self._bind_select(stmt)
        combos = self._enumerate(bound)
        if bound.aggregate_mode:
            out_rows = self._aggregate_rows(bound, combos)
        else:
            out_rows = [
                (
                    tuple(self._eval(p.expr, bound, combo) for p in bound.projections),
                    tuple(
                        self._eval(o.expr, bound, combo) for o in bound.order_items
                    ),
                )
                for combo in combos
            ]
        if bound.order_items:
            out_rows = _order_rows(out_rows, bound.order_items)
        rows = [r[0] for r in out_rows]
        if stmt.limit is not None:
            rows = rows[: stmt.limit]
        return ResultSet(bound.column_names, rows)

    def plan_select(self, stmt):
        """Expose the chosen access paths (test and diagnostics hook)."""
        return Plan(self._bind_select(stmt).paths)

    def _bind_select(self, stmt):
        sources = self._resolve_sources(stmt.tables)
        binder = Binder(sources)
        bound = _BoundSelect(sources, binder)

        for proj in stmt.projections:
            if proj.expr is A.STAR:
                if not sources:
                    raise ParseError("* requires a FROM clause")
                for i, src in enumerate(sources):
                    for j, name in enumerate(src.table.schema.column_names):
                        ref = A.ColumnRef(src.label, name)
                        binder.resolution[id(ref)] = (i, j)
                        bound.projections.append(A.Projection(ref))
                        bound.column_names.append(name)
            else:
                binder.bind_expr(proj.expr)
                bound.projections.append(proj)
                bound.column_names.append(proj.alias or _projection_name(proj.expr))

        if stmt.where is not None:
            binder.bind_expr(stmt.where)
            if _aggregates_in(stmt.where):
                raise AggregateMisuseError("aggregate in WHERE")
        bound.where = stmt.where

        for ref in stmt.group_by:
            binder.bind_expr(ref)
            bound.group_refs.append(binder.resolve_ref(ref))
        for item in stmt.order_by:
            binder.bind_expr(item.expr)
            bound.order_items.append(item)

        agg_nodes = []
        for proj in bound.projections:
            agg_nodes.extend(_aggregates_in(proj.expr))
        for item in bound.order_items:
            agg_nodes.extend(_aggregates_in(item.expr))
        bound.aggregate_mode = bool(agg_nodes) or bool(stmt.group_by)
        if bound.aggregate_mode:
            for node in agg_nodes:
                for arg in node.args:
                    if _aggregates_in(arg):
                        raise AggregateMisuseError("nested aggregate")
            for proj in bound.projections:
                self._check_group_valid(proj.expr, bound)
            for item in bound.order_items:
                self._check_group_valid(item.expr, bound)

        bound.paths = self._plan_paths(bound)
        return bound

    def _resolve_sources(self, tablerefs):
        if len(tablerefs) > MAX_JOIN_TABLES:
            raise ParseError(f"at most {MAX_JOIN_TABLES} tables per statement")
        sources = []
        for ref in tablerefs:
            table = self.catalog.get(ref.name)
            sources.append(_Source(table, ref.alias or ref.name))
        return sources

    def _check_group_valid(self, node, bound):
        """Bare column references must be grouped; aggregate args are free."""
        t = type(node)
        if t is A.ColumnRef:
            if bound.binder.resolution[id(node)] not in bound.group_refs:
                raise AggregateMisuseError(
                    f"column {_ref_text(node)} is neither grouped nor aggregated"
                )
        elif t is A.Unary:
            self._check_group_valid(node.operand, bound)
        elif t is A.Binary:
            self._check_group_valid(node.left, bound)
            self._check_group_valid(node.right, bound)
        elif t is A.Like:
            self._check_group_valid(node.subject, bound)
            self._check_group_valid(node.pattern, bound)
        elif t is A.IsNull:
            self._check_group_valid(node.operand, bound)
        elif t is A.FuncCall:
            if node.name in AGGREGATE_FUNCTIONS:
                return  # arguments evaluate per group member
            for a in node.args:
                self._check_group_valid(a, bound)

    # planning --------------------------------------------------------------

    def _plan_paths(self, bound):
        conjuncts = _split_conjuncts(bound.where)
        paths = []
        for i, src in enumerate(bound.sources):
            eq_map = {}
            ranges = {}
            for conj in conjuncts:
                found = _index_conjunct(conj, i, bound)
                if found is None:
                    continue
                col, op, expr = found
                if op == "=":
                    eq_map.setdefault(col, expr)
                else:
                    lo, hi = ranges.setdefault(col, [None, None])
                    if op in (">", ">=") and lo is None:
                        ranges[col][0] = expr
                    elif op in ("<", "<=") and ranges[col][1] is None:
                        ranges[col][1] = expr
            paths.append(self._pick_path(src.table, eq_map, ranges))
        return paths

    def _pick_path(self, table, eq_map, ranges):
        best = None
        best_eq = 0
        for index in table.indexes:
            eq_len = 0
            for col in index.column_indexes:
                if col in eq_map:
                    eq_len += 1
                else:
                    break
            if eq_len > best_eq:
                best, best_eq = index, eq_len
        if best is not None:
            eq_exprs = [eq_map[c] for c in best.column_indexes[:best_eq]]
            if best_eq < len(best.column_indexes):
                nxt = best.column_indexes[best_eq]
                if nxt in ranges:
                    lo, hi = ranges[nxt]
                    return IndexRange(best, eq_exprs, lo, hi)
            return IndexSeek(best, eq_exprs)
        for index in table.indexes:
            first = index.column_indexes[0]
            if first in ranges:
                lo, hi = ranges[first]
                return IndexRange(index, [], lo, hi)
        return FullScan()

    # row enumeration ---------------------------------------------------------

    def _enumerate(self, bound):
        if not bound.sources:
            combo = ()
            if bound.where is not None:
                keep = self._eval(bound.where, bound, combo)
                if keep is None or not truth(keep):
                    return []
            return [combo]
        combos = []
        where = bound.where
        n = len(bound.sources)

        def recurse(depth, prefix):
            src = bound.sources[depth]
            for values in self._candidates(bound, depth, prefix):
                combo = prefix + (values,)
                if depth + 1 < n:
                    recurse(depth + 1, combo)
                else:
                    if where is not None:
                        keep = self._eval(where, bound, combo)
                        if keep is None or not truth(keep):
                            continue
                    combos.append(combo)

        recurse(0, ())
        return combos

    def _candidates(self, bound, depth, prefix):
        """Rows for one source, always in ascending rowid order."""
        path = bound.paths[depth]
        table = bound.sources[depth].table
        if type(path) is FullScan:
            for _, row in table.rows.items():
                yield row.values
            return
        eq = tuple(self._eval(e, bound, prefix) for e in path.eq_exprs)
        if type(path) is IndexSeek:
            lo = hi = eq
        else:
            lo = (
                eq + (self._eval(path.lo_expr, bound, prefix),)
                if path.lo_expr is not None
                else (eq or None)
            )
            hi = (
                eq + (self._eval(path.hi_expr, bound, prefix),)
                if path.hi_expr is not None
                else (eq or None)
            )
        rowids = sorted(key[-1] for key, _ in path.index.tree.scan(lo, hi))
        for rowid in rowids:
            yield table.rows.get(rowid).values

    # expression evaluation ----------------------------------------------------

    def _eval(self, node, bound, combo):
        t = type(node)
        if t is A.Literal:
            return node.value
        if t is A.ColumnRef:
            src, col = bound.binder.resolution[id(node)]
            return combo[src][col]
        if t is A.Unary:
            return eval_unary(node.op, self._eval(node.operand, bound, combo))
        if t is A.Binary:
            op = node.op
            if op == "AND":
                return logical_and(
                    self._eval(node.left, bound, combo),
                    self._eval(node.right, bound, combo),
                )
            if op == "OR":
                return logical_or(
                    self._eval(node.left, bound, combo),
                    self._eval(node.right, bound, combo),
                )
            return eval_binop(
                op,
                self._eval(node.left, bound, combo),
                self._eval(node.right, bound, combo),
            )
        if t is A.Like:
            return sql_like(
                self._eval(node.subject, bound, combo),
                self._eval(node.pattern, bound, combo),
            )
        if t is A.IsNull:
            v = self._eval(node.operand, bound, combo)
            hit = v is None
            if node.negated:
                hit = not hit
            return 1 if hit else 0
        if t is A.FuncCall:
            if node.name in AGGREGATE_FUNCTIONS:
                raise AggregateMisuseError(f"{node.name} outside aggregation")
            return eval_scalar(node.name, [self._eval(a, bound, combo) for a in node.args])
        raise TypeError(f"cannot evaluate {node!r}")

    # aggregation ---------------------------------------------------------------

    def _aggregate_rows(self, bound, combos):
        if bound.group_refs:
            groups = {}
            order = []
            for combo in combos:
                key = tuple(combo[s][c] for s, c in bound.group_refs)
                bucket = groups.get(key)
                if bucket is None:
                    groups[key] = [combo]
                    order.append(key)
                else:
                    bucket.append(combo)
            group_list = [groups[k] for k in order]
        else:
            group_list = [combos]  # one group, possibly empty
        out = []
        for members in group_list:
            out.append(
                (
                    tuple(
                        self._eval_agg(p.expr, bound, members)
                        for p in bound.projections
                    ),
                    tuple(
                        self._eval_agg(o.expr, bound, members)
                        for o in bound.order_items
                    ),
                )
            )
        return out

    def _eval_agg(self, node, bound, members):
        t = type(node)
        if t is A.FuncCall and node.name in AGGREGATE_FUNCTIONS:
            return self._compute_aggregate(node, bound, members)
        if t is A.ColumnRef:
            src, col = bound.binder.resolution[id(node)]
            return members[0][src][col]
        if t is A.Literal:
            return node.value
        if t is A.Unary:
            return eval_unary(node.op, self._eval_agg(node.operand, bound, members))
        if t is A.Binary:
            op = node.op
            if op == "AND":
                return logical_and(
                    self._eval_agg(node.left, bound, members),
                    self._eval_agg(node.right, bound, members),
                )
            if op == "OR":
                return logical_or(
                    self._eval_agg(node.left, bound, members),
                    self._eval_agg(node.right, bound, members),
                )
            return eval_binop(
                op,
                self._eval_agg(node.left, bound, members),
                self._eval_agg(node.right, bound, members),
            )
        if t is A.Like:
            return sql_like(
                self._eval_agg(node.subject, bound, members),
                self._eval_agg(node.pattern, bound, members),
            )
        if t is A.IsNull:
            v = self._eval_agg(node.operand, bound, members)
            hit = v is None
            if node.negated:
                hit = not hit
            return 1 if hit else 0
        if t is A.FuncCall:
            return eval_scalar(
                node.name, [self._eval_agg(a, bound, members) for a in node.args]
            )
        raise TypeError(f"cannot evaluate {node!r}")

    def _compute_aggregate(self, node, bound, members):
        if node.star:
            return len(members)
        values = (self._eval(node.args[0], bound, combo) for combo in members)
        name = node.name
        if name == "COUNT":
            return sum(1 for v in values if v is not None)
        if name in ("MIN", "MAX"):
            best = None
            for v in values:
                if v is None:
                    continue
                if best is None:
                    best = v
                else:
                    c = compare_values(v, best)
                    if (name == "MIN" and c < 0) or (name == "MAX" and c > 0):
                        best = v
            return best
        # SUM / AVG
        total = None
        count = 0
        for v in values:
            if v is None:
                continue
            if not is_numeric(v):
                raise TypeMismatchError(f"{name} of non-numeric value")
            count += 1
            total = v if total is None else eval_binop("+", total, v)
        if name == "SUM":
            return total
        if total is None:
            return None
        return eval_binop("/", float(total), float(count))

    # writes ---------------------------------------------------------------------

    def execute_insert(self, stmt, ts_ms):
        table = self.catalog.get(stmt.table)
        schema = table.schema
        ncols = len(schema.columns)
        if stmt.columns is not None:
            targets = []
            for name in stmt.columns:
                idx = schema.column_index(name)
                if idx in targets:
                    raise ArityMismatchError(f"column {name} given twice")
                targets.append(idx)
        else:
            targets = list(range(ncols))
        binder = Binder([])
        for row in stmt.rows:
            if len(row) != len(targets):
                raise ArityMismatchError(
                    f"{len(targets)} columns but {len(row)} values"
                )
            for e in row:
                binder.bind_expr(e)
                if _aggregates_in(e):
                    raise AggregateMisuseError("aggregate in VALUES")
        bound = _BoundSelect([], binder)
        # evaluate every row before touching the table: a failing expression
        # must leave the statement without effect
        pending = []
        for row in stmt.rows:
            values = [None] * ncols
            for idx, e in zip(targets, row):
                values[idx] = self._eval(e, bound, ())
            pending.append(values)
        for values in pending:
            table.insert_row(values, ts_ms)
        return len(pending)

    def execute_update(self, stmt):
        table = self.catalog.get(stmt.table)
        sources = [_Source(table, stmt.table)]
        binder = Binder(sources)
        bound = _BoundSelect(sources, binder)
        assigns = []
        for name, expr in stmt.assignments:
            col = table.schema.column_index(name)
            binder.bind_expr(expr)
            if _aggregates_in(expr):
                raise AggregateMisuseError("aggregate in UPDATE")
            assigns.append((col, expr))
        if stmt.where is not None:
            binder.bind_expr(stmt.where)
            if _aggregates_in(stmt.where):
                raise AggregateMisuseError("aggregate in WHERE")
        bound.where = stmt.where
        bound.paths = self._plan_paths(bound)

        # evaluate all assignments against pre-update values before applying
        # any of them: partial application on error is not acceptable
        pending = []
        for rowid, row in self._match_rows(bound, table):
            new_values = list(row.values)
            for col, expr in assigns:
                new_values[col] = self._eval(expr, bound, (row.values,))
            pending.append((rowid, new_values))
        for rowid, new_values in pending:
            table.update_row(rowid, new_values)
        return len(pending)

    def execute_delete(self, stmt):
        table = self.catalog.get(stmt.table)
        sources = [_Source(table, stmt.table)]
        binder = Binder(sources)
        bound = _BoundSelect(sources, binder)
        if stmt.where is not None:
            binder.bind_expr(stmt.where)
            if _aggregates_in(stmt.where):
                raise AggregateMisuseError("aggregate in WHERE")
        bound.where = stmt.where
        bound.paths = self._plan_paths(bound)
        rowids = [rowid for rowid, _ in self._match_rows(bound, table)]
        return table.delete_rows(rowids)

    def _match_rows(self, bound, table):
        """(rowid, row) pairs satisfying the bound WHERE for one table."""
        path = bound.paths[0]
        where = bound.where
        if type(path) is FullScan:
            pairs = table.rows.items()
        else:
            eq = tuple(self._eval(e, bound, ()) for e in path.eq_exprs)
            if type(path) is IndexSeek:
                lo = hi = eq
            else:
                lo = (
                    eq + (self._eval(path.lo_expr, bound, ()),)
                    if path.lo_expr is not None
                    else (eq or None)
                )
                hi = (
                    eq + (self._eval(path.hi_expr, bound, ()),)
                    if path.hi_expr is not None
                    else (eq or None)
                )
            rowids = sorted(key[-1] for key, _ in path.index.tree.scan(lo, hi))
            pairs = ((rowid, table.rows.get(rowid)) for rowid in rowids)
        for rowid, row in pairs:
            if where is not None:
                keep = self._eval(where, bound, (row.values,))
                if keep is None or not truth(keep):
                    continue
            yield rowid, row


class _BoundSelect:
    __slots__ = (
        "sources",
        "binder",
        "projections",
        "column_names",
        "where",
        "group_refs",
        "order_items",
        "aggregate_mode",
        "paths",
    )

    def __init__(self, sources, binder):
        self.sources = sources
        self.binder = binder
        self.projections = []
        self.column_names = []
        self.where = None
        self.group_refs = []
        self.order_items = []
        self.aggregate_mode = False
        self.paths = []


def _projection_name(expr):
    if type(expr) is A.ColumnRef:
        return expr.name
    return A.expr_sql(expr, KEYWORDS)


def _index_conjunct(conj, source_idx, bound):
    """Match `col OP expr` where col belongs to source_idx and expr only
    references earlier sources; returns (col, op, expr) or None."""
    if type(conj) is not A.Binary or conj.op not in ("=", "<", "<=", ">", ">="):
        return None
    for ref, other, op in (
        (conj.left, conj.right, conj.op),
        (conj.right, conj.left, _FLIP[conj.op]),
    ):
        if type(ref) is not A.ColumnRef:
            continue
        res = bound.binder.resolution.get(id(ref))
        if res is None or res[0] != source_idx:
            continue
        if _max_source(other, bound) < source_idx:
            return (res[1], op, other)
    return None


def _max_source(node, bound):
    mx = -1
    for n in _walk(node):
        if type(n) is A.ColumnRef:
            res = bound.binder.resolution.get(id(n))
            if res is not None:
                mx = max(mx, res[0])
    return mx


_FLIP = {"=": "=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _order_rows(tagged, order_items):
    directions = [item.descending for item in order_items]

    def compare(a, b):
        for (va, vb), desc in zip(zip(a[1], b[1]), directions):
            c = compare_values(va, vb)
            if c:
                return -c if desc else c
        return 0

    return sorted(tagged, key=cmp_to_key(compare))
