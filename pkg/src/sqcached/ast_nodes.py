"""Statement and expression AST plus the SQL pretty-printer.

Nodes are plain dataclasses with structural equality; the executor keeps
its binding state outside the tree so printed-and-reparsed statements
compare equal (the parser round-trip property relies on this).
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Literal:
    value: object  # None | int | float | str | bytes


@dataclass(frozen=True)
class ColumnRef:
    table: str | None
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' | 'NOT'
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, ||, comparison, AND, OR
    left: object
    right: object


@dataclass(frozen=True)
class Like:
    subject: object
    pattern: object


@dataclass(frozen=True)
class IsNull:
    operand: object
    negated: bool = False


@dataclass(frozen=True)
class FuncCall:
    name: str  # uppercased
    args: tuple = ()
    star: bool = False  # COUNT(*)


STAR = "*"  # projection marker


@dataclass(frozen=True)
class Projection:
    expr: object  # expression or STAR
    alias: str | None = None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class OrderItem:
    expr: object
    descending: bool = False


@dataclass(frozen=True)
class Select:
    projections: tuple
    tables: tuple = ()
    where: object = None
    group_by: tuple = ()
    order_by: tuple = ()
    limit: int | None = None


@dataclass(frozen=True)
class Insert:
    table: str
    columns: tuple | None
    rows: tuple  # tuple of tuples of expressions


@dataclass(frozen=True)
class Update:
    table: str
    assignments: tuple  # ((column, expr), ...)
    where: object = None


@dataclass(frozen=True)
class Delete:
    table: str
    where: object = None


@dataclass(frozen=True)
class CreateTable:
    name: str
    columns: tuple  # ((name, affinity-or-None), ...)


@dataclass(frozen=True)
class DropTable:
    name: str


@dataclass(frozen=True)
class CreateIndex:
    name: str
    table: str
    columns: tuple


_BARE_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


def _ident(name, keywords):
    if (
        name
        and name[0] not in "0123456789"
        and all(c in _BARE_OK for c in name)
        and name.upper() not in keywords
    ):
        return name
    return '"' + name.replace('"', '""') + '"'


def _literal_sql(v):
    if v is None:
        return "NULL"
    if type(v) is int:
        return str(v)
    if type(v) is float:
        r = repr(v)
        if "." not in r and "e" not in r and "E" not in r:
            r += ".0"
        return r
    if type(v) is str:
        return "'" + v.replace("'", "''") + "'"
    return "X'" + v.hex().upper() + "'"


def expr_sql(node, keywords):
    """Render an expression fully parenthesized so reparsing is exact."""
    t = type(node)
    if t is Literal:
        return _literal_sql(node.value)
    if t is ColumnRef:
        name = _ident(node.name, keywords)
        if node.table is not None:
            return f"{_ident(node.table, keywords)}.{name}"
        return name
    if t is Unary:
        op = node.op + " " if node.op == "NOT" else node.op
        return f"({op}{expr_sql(node.operand, keywords)})"
    if t is Binary:
        return (
            f"({expr_sql(node.left, keywords)} {node.op} "
            f"{expr_sql(node.right, keywords)})"
        )
    if t is Like:
        return (
            f"({expr_sql(node.subject, keywords)} LIKE "
            f"{expr_sql(node.pattern, keywords)})"
        )
    if t is IsNull:
        kw = "IS NOT NULL" if node.negated else "IS NULL"
        return f"({expr_sql(node.operand, keywords)} {kw})"
    if t is FuncCall:
        if node.star:
            return f"{node.name}(*)"
        args = ", ".join(expr_sql(a, keywords) for a in node.args)
        return f"{node.name}({args})"
    raise TypeError(f"not an expression node: {node!r}")


def statement_sql(stmt, keywords):
    """Render a statement AST back to parseable SQL."""
    if type(stmt) is Select:
        parts = ["SELECT"]
        projs = []
        for p in stmt.projections:
            if p.expr is STAR:
                projs.append("*")
            else:
                text = expr_sql(p.expr, keywords)
                if p.alias:
                    text += f" AS {_ident(p.alias, keywords)}"
                projs.append(text)
        parts.append(", ".join(projs))
        if stmt.tables:
            refs = []
            for t in stmt.tables:
                r = _ident(t.name, keywords)
                if t.alias:
                    r += f" {_ident(t.alias, keywords)}"
                refs.append(r)
            parts.append("FROM " + ", ".join(refs))
        if stmt.where is not None:
            parts.append("WHERE " + expr_sql(stmt.where, keywords))
        if stmt.group_by:
            parts.append(
                "GROUP BY " + ", ".join(expr_sql(g, keywords) for g in stmt.group_by)
            )
        if stmt.order_by:
            items = []
            for o in stmt.order_by:
                items.append(
                    expr_sql(o.expr, keywords) + (" DESC" if o.descending else " ASC")
                )
            parts.append("ORDER BY " + ", ".join(items))
        if stmt.limit is not None:
            parts.append(f"LIMIT {stmt.limit}")
        return " ".join(parts)
    if type(stmt) is Insert:
        sql = f"INSERT INTO {_ident(stmt.table, keywords)}"
        if stmt.columns is not None:
            sql += " (" + ", ".join(_ident(c, keywords) for c in stmt.columns) + ")"
        rows = []
        for row in stmt.rows:
            rows.append("(" + ", ".join(expr_sql(e, keywords) for e in row) + ")")
        return sql + " VALUES " + ", ".join(rows)
    if type(stmt) is Update:
        sql = f"UPDATE {_ident(stmt.table, keywords)} SET "
        sql += ", ".join(
            f"{_ident(c, keywords)} = {expr_sql(e, keywords)}"
            for c, e in stmt.assignments
        )
        if stmt.where is not None:
            sql += " WHERE " + expr_sql(stmt.where, keywords)
        return sql
    if type(stmt) is Delete:
        sql = f"DELETE FROM {_ident(stmt.table, keywords)}"
        if stmt.where is not None:
            sql += " WHERE " + expr_sql(stmt.where, keywords)
        return sql
    if type(stmt) is CreateTable:
        cols = []
        for name, aff in stmt.columns:
            cols.append(_ident(name, keywords) + (f" {aff}" if aff else ""))
        return f"CREATE TABLE {_ident(stmt.name, keywords)} (" + ", ".join(cols) + ")"
    if type(stmt) is DropTable:
        return f"DROP TABLE {_ident(stmt.name, keywords)}"
    if type(stmt) is CreateIndex:
        cols = ", ".join(_ident(c, keywords) for c in stmt.columns)
        return (
            f"CREATE INDEX {_ident(stmt.name, keywords)} "
            f"ON {_ident(stmt.table, keywords)} ({cols})"
        )
    raise TypeError(f"not a statement node: {stmt!r}")
