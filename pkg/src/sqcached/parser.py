"""Tokenizer and recursive-descent parser for the SQL subset.

Accepts exactly one statement per input line. Keywords are
case-insensitive; identifiers may be double-quoted; there are no comments.
"""

import re
from dataclasses import dataclass

from . import ast_nodes as A
from .errors import ParseError
from .values import INT64_MAX, INT64_MIN

KEYWORDS = frozenset(
    """SELECT FROM WHERE GROUP BY ORDER ASC DESC LIMIT INSERT INTO VALUES
    UPDATE SET DELETE CREATE DROP TABLE INDEX ON AS AND OR NOT LIKE IS
    NULL INTEGER REAL TEXT BLOB""".split()
)

AFFINITY_KEYWORDS = ("INTEGER", "REAL", "TEXT", "BLOB")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<blob>[xX]'(?:[0-9A-Fa-f]{2})*')
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<qname>"(?:[^"]|"")*")
  | (?P<string>'(?:[^']|'')*')
  | (?P<real>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<op><>|<=|>=|!=|\|\||[=<>+\-*/%(),.])
    """,
    re.VERBOSE,
)

@dataclass
class Token:
    kind: str  # kw name str blob int real op eof
    text: str
    value: object
    pos: int


def tokenize(text):
    """Split one statement line into tokens; raises ParseError."""
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            _tokenize_fail(text, pos)
        kind = m.lastgroup
        raw = m.group()
        end = m.end()
        if kind == "ws":
            pos = end
            continue
        if kind == "name":
            upper = raw.upper()
            if upper == "X" and end < n and text[end] == "'":
                # a blob literal the blob alternative rejected: bad hex
                raise ParseError("bad blob literal", pos)
            if upper in KEYWORDS:
                tokens.append(Token("kw", upper, upper, pos))
            else:
                tokens.append(Token("name", raw, raw, pos))
        elif kind == "qname":
            tokens.append(Token("name", raw, raw[1:-1].replace('""', '"'), pos))
        elif kind == "string":
            tokens.append(Token("str", raw, raw[1:-1].replace("''", "'"), pos))
        elif kind == "blob":
            tokens.append(Token("blob", raw, bytes.fromhex(raw[2:-1]), pos))
        elif kind == "int":
            _check_number_tail(text, end, pos)
            v = int(raw)
            if not INT64_MIN <= v <= INT64_MAX:
                v = float(raw)
                tokens.append(Token("real", raw, v, pos))
            else:
                tokens.append(Token("int", raw, v, pos))
        elif kind == "real":
            _check_number_tail(text, end, pos)
            tokens.append(Token("real", raw, float(raw), pos))
        else:
            tokens.append(Token("op", raw, raw, pos))
        pos = end
    tokens.append(Token("eof", "", None, n))
    return tokens


def _check_number_tail(text, end, pos):
    if end < len(text) and (text[end].isalpha() or text[end] == "_"):
        raise ParseError("malformed number", pos)


def _tokenize_fail(text, pos):
    ch = text[pos]
    if ch == "'":
        raise ParseError("unterminated string literal", pos)
    if ch == '"':
        raise ParseError("unterminated quoted identifier", pos)
    raise ParseError(f"illegal byte {ch!r}", pos)


_COMPARISON_OPS = ("=", "<>", "!=", "<", "<=", ">", ">=")

# bounds expression recursion well inside the interpreter stack limit
MAX_EXPR_DEPTH = 50


class Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0
        self.depth = 0

    @property
    def cur(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected):
        tok = self.cur
        got = repr(tok.text) if tok.kind != "eof" else "end of input"
        raise ParseError(f"expected {expected}, found {got}", tok.pos)

    def accept_kw(self, word):
        if self.cur.kind == "kw" and self.cur.text == word:
            return self.advance()
        return None

    def expect_kw(self, word):
        if not self.accept_kw(word):
            self.fail(word)

    def accept_op(self, op):
        if self.cur.kind == "op" and self.cur.text == op:
            return self.advance()
        return None

    def expect_op(self, op):
        if not self.accept_op(op):
            self.fail(f"'{op}'")

    def expect_name(self):
        if self.cur.kind == "name":
            return self.advance().value
        self.fail("identifier")

    # statements ---------------------------------------------------------

    def parse_statement(self):
        tok = self.cur
        if tok.kind != "kw":
            self.fail("statement keyword")
        if tok.text == "SELECT":
            stmt = self.select()
        elif tok.text == "INSERT":
            stmt = self.insert()
        elif tok.text == "UPDATE":
            stmt = self.update()
        elif tok.text == "DELETE":
            stmt = self.delete()
        elif tok.text == "CREATE":
            stmt = self.create()
        elif tok.text == "DROP":
            stmt = self.drop()
        else:
            self.fail("statement keyword")
        if self.cur.kind != "eof":
            self.fail("end of statement")
        return stmt

    def select(self):
        self.expect_kw("SELECT")
        projections = [self.projection()]
        while self.accept_op(","):
            projections.append(self.projection())
        tables = []
        if self.accept_kw("FROM"):
            tables.append(self.table_ref())
            while self.accept_op(","):
                tables.append(self.table_ref())
        where = self.where_clause()
        group_by = []
        if self.accept_kw("GROUP"):
            self.expect_kw("BY")
            group_by.append(self.column_ref())
            while self.accept_op(","):
                group_by.append(self.column_ref())
        order_by = []
        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            order_by.append(self.order_item())
            while self.accept_op(","):
                order_by.append(self.order_item())
        limit = None
        if self.accept_kw("LIMIT"):
            if self.cur.kind != "int":
                self.fail("integer limit")
            limit = self.advance().value
        return A.Select(
            projections=tuple(projections),
            tables=tuple(tables),
            where=where,
            group_by=tuple(group_by),
            order_by=tuple(order_by),
            limit=limit,
        )

    def projection(self):
        if self.accept_op("*"):
            return A.Projection(A.STAR)
        expr = self.expr()
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_name()
        return A.Projection(expr, alias)

    def table_ref(self):
        name = self.expect_name()
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_name()
        elif self.cur.kind == "name":
            alias = self.advance().value
        return A.TableRef(name, alias)

    def column_ref(self):
        name = self.expect_name()
        if self.accept_op("."):
            return A.ColumnRef(name, self.expect_name())
        return A.ColumnRef(None, name)

    def order_item(self):
        expr = self.expr()
        descending = False
        if self.accept_kw("DESC"):
            descending = True
        else:
            self.accept_kw("ASC")
        return A.OrderItem(expr, descending)

    def where_clause(self):
        if self.accept_kw("WHERE"):
            return self.expr()
        return None

    def insert(self):
        self.expect_kw("INSERT")
        self.expect_kw("INTO")
        table = self.expect_name()
        columns = None
        if self.accept_op("("):
            columns = [self.expect_name()]
            while self.accept_op(","):
                columns.append(self.expect_name())
            self.expect_op(")")
        self.expect_kw("VALUES")
        rows = [self.value_row()]
        while self.accept_op(","):
            rows.append(self.value_row())
        return A.Insert(
            table, tuple(columns) if columns is not None else None, tuple(rows)
        )

    def value_row(self):
        self.expect_op("(")
        exprs = [self.expr()]
        while self.accept_op(","):
            exprs.append(self.expr())
        self.expect_op(")")
        return tuple(exprs)

    def update(self):
        self.expect_kw("UPDATE")
        table = self.expect_name()
        self.expect_kw("SET")
        assignments = [self.assignment()]
        while self.accept_op(","):
            assignments.append(self.assignment())
        return A.Update(table, tuple(assignments), self.where_clause())

    def assignment(self):
        name = self.expect_name()
        self.expect_op("=")
        return (name, self.expr())

    def delete(self):
        self.expect_kw("DELETE")
        self.expect_kw("FROM")
        table = self.expect_name()
        return A.Delete(table, self.where_clause())

    def create(self):
        self.expect_kw("CREATE")
        if self.accept_kw("TABLE"):
            name = self.expect_name()
            self.expect_op("(")
            columns = [self.column_def()]
            while self.accept_op(","):
                columns.append(self.column_def())
            self.expect_op(")")
            return A.CreateTable(name, tuple(columns))
        if self.accept_kw("INDEX"):
            name = self.expect_name()
            self.expect_kw("ON")
            table = self.expect_name()
            self.expect_op("(")
            columns = [self.expect_name()]
            while self.accept_op(","):
                columns.append(self.expect_name())
            self.expect_op(")")
            return A.CreateIndex(name, table, tuple(columns))
        self.fail("TABLE or INDEX")

    def column_def(self):
        name = self.expect_name()
        affinity = None
        for kw in AFFINITY_KEYWORDS:
            if self.accept_kw(kw):
                affinity = kw
                break
        return (name, affinity)

    def drop(self):
        self.expect_kw("DROP")
        self.expect_kw("TABLE")
        return A.DropTable(self.expect_name())

    # expressions, loosest binding first ----------------------------------

    def expr(self):
        self.depth += 1
        if self.depth > MAX_EXPR_DEPTH:
            raise ParseError("expression too deeply nested", self.cur.pos)
        try:
            return self.or_expr()
        finally:
            self.depth -= 1

    def or_expr(self):
        left = self.and_expr()
        while self.accept_kw("OR"):
            left = A.Binary("OR", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.accept_kw("AND"):
            left = A.Binary("AND", left, self.not_expr())
        return left

    def not_expr(self):
        if self.accept_kw("NOT"):
            self.depth += 1
            if self.depth > MAX_EXPR_DEPTH:
                raise ParseError("expression too deeply nested", self.cur.pos)
            try:
                return A.Unary("NOT", self.not_expr())
            finally:
                self.depth -= 1
        return self.comparison()

    def comparison(self):
        left = self.additive()
        while True:
            if self.cur.kind == "op" and self.cur.text in _COMPARISON_OPS:
                op = self.advance().text
                if op == "!=":
                    op = "<>"
                left = A.Binary(op, left, self.additive())
            elif self.accept_kw("LIKE"):
                left = A.Like(left, self.additive())
            elif self.accept_kw("IS"):
                negated = bool(self.accept_kw("NOT"))
                self.expect_kw("NULL")
                left = A.IsNull(left, negated)
            else:
                return left

    def additive(self):
        left = self.multiplicative()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            op = self.advance().text
            left = A.Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self):
        left = self.negation()
        while self.cur.kind == "op" and self.cur.text in ("*", "/", "%"):
            op = self.advance().text
            left = A.Binary(op, left, self.negation())
        return left

    def negation(self):
        if self.accept_op("-"):
            self.depth += 1
            if self.depth > MAX_EXPR_DEPTH:
                raise ParseError("expression too deeply nested", self.cur.pos)
            try:
                return A.Unary("-", self.negation())
            finally:
                self.depth -= 1
        return self.concat()

    def concat(self):
        left = self.primary()
        while self.accept_op("||"):
            left = A.Binary("||", left, self.primary())
        return left

    def primary(self):
        tok = self.cur
        if tok.kind in ("int", "real", "str", "blob"):
            self.advance()
            return A.Literal(tok.value)
        if tok.kind == "kw" and tok.text == "NULL":
            self.advance()
            return A.Literal(None)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "name":
            name = self.advance().value
            if self.accept_op("("):
                return self.call(name)
            if self.accept_op("."):
                return A.ColumnRef(name, self.expect_name())
            return A.ColumnRef(None, name)
        self.fail("expression")

    def call(self, name):
        fname = name.upper()
        if self.accept_op("*"):
            self.expect_op(")")
            return A.FuncCall(fname, star=True)
        args = []
        if not self.accept_op(")"):
            args.append(self.expr())
            while self.accept_op(","):
                args.append(self.expr())
            self.expect_op(")")
        return A.FuncCall(fname, tuple(args))


def parse_statement(text):
    """Parse one SQL statement line into its AST."""
    return Parser(tokenize(text)).parse_statement()


def to_sql(stmt):
    """Inverse of parse_statement up to structural equality."""
    return A.statement_sql(stmt, KEYWORDS)
