import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import genstmt
from sqcached import ast_nodes as A
from sqcached.errors import ParseError
from sqcached.parser import parse_statement, to_sql, tokenize


class TestTokenizer:
    def test_simple_select(self):
        tokens = tokenize("SELECT 1")
        assert [(t.kind, t.value) for t in tokens[:-1]] == [("kw", "SELECT"), ("int", 1)]

    def test_quote_doubling(self):
        (tok,) = tokenize("'it''s'")[:-1]
        assert tok.kind == "str" and tok.value == "it's"

    def test_blob_hex_decoding(self):
        (tok,) = tokenize("X'4142'")[:-1]
        assert tok.kind == "blob" and tok.value == b"AB"
        (tok,) = tokenize("x''")[:-1]
        assert tok.value == b""

    def test_keywords_case_insensitive(self):
        assert tokenize("select")[0].kind == "kw"
        assert tokenize("SeLeCt")[0].value == "SELECT"

    def test_quoted_identifier(self):
        (tok,) = tokenize('"odd ""name"""')[:-1]
        assert tok.kind == "name" and tok.value == 'odd "name"'

    def test_numbers(self):
        assert tokenize("1.5")[0].value == 1.5
        assert tokenize(".5")[0].value == 0.5
        assert tokenize("2e3")[0].value == 2000.0
        assert tokenize("12")[0].value == 12

    def test_giant_integer_becomes_real(self):
        tok = tokenize(str(2**70))[0]
        assert tok.kind == "real"

    def test_unterminated_string(self):
        with pytest.raises(ParseError, match="unterminated string"):
            tokenize("SELECT 'abc")

    def test_bad_blob(self):
        with pytest.raises(ParseError, match="bad blob"):
            tokenize("SELECT X'4'")
        with pytest.raises(ParseError, match="bad blob"):
            tokenize("SELECT X'zz'")

    def test_bad_number(self):
        with pytest.raises(ParseError, match="malformed number"):
            tokenize("SELECT 1x")
        with pytest.raises(ParseError, match="malformed number"):
            tokenize("SELECT 1.5e")

    def test_illegal_byte(self):
        with pytest.raises(ParseError, match="illegal byte"):
            tokenize("SELECT ;")

    def test_error_offsets(self):
        try:
            tokenize("SELECT   'oops")
        except ParseError as err:
            assert err.offset == 9


class TestParserFixtures:
    def test_insert_shape(self):
        stmt = parse_statement(
            "INSERT INTO kv (key,value,time) VALUES ('a','x',1)"
        )
        assert stmt == A.Insert(
            "kv",
            ("key", "value", "time"),
            ((A.Literal("a"), A.Literal("x"), A.Literal(1)),),
        )

    def test_delete_with_predicate(self):
        stmt = parse_statement("DELETE FROM cache WHERE page_id = 17")
        assert stmt == A.Delete(
            "cache", A.Binary("=", A.ColumnRef(None, "page_id"), A.Literal(17))
        )

    def test_projection_required(self):
        with pytest.raises(ParseError):
            parse_statement("SELECT")

    def test_select_without_from(self):
        stmt = parse_statement("SELECT 1")
        assert stmt.tables == ()
        assert stmt.projections[0].expr == A.Literal(1)

    def test_create_table(self):
        stmt = parse_statement("CREATE TABLE kv (key TEXT, value TEXT, time INTEGER)")
        assert stmt == A.CreateTable(
            "kv", (("key", "TEXT"), ("value", "TEXT"), ("time", "INTEGER"))
        )

    def test_create_table_untyped_column(self):
        stmt = parse_statement("CREATE TABLE t (a, b BLOB)")
        assert stmt.columns == (("a", None), ("b", "BLOB"))

    def test_create_index(self):
        stmt = parse_statement("CREATE INDEX i ON t (a, b)")
        assert stmt == A.CreateIndex("i", "t", ("a", "b"))

    def test_update(self):
        stmt = parse_statement("UPDATE kv SET time = time + 60 WHERE key = 'a'")
        assert stmt.assignments == (
            ("time", A.Binary("+", A.ColumnRef(None, "time"), A.Literal(60))),
        )

    def test_join_tables_with_aliases(self):
        stmt = parse_statement("SELECT u.name FROM users u, cache AS c")
        assert stmt.tables == (A.TableRef("users", "u"), A.TableRef("cache", "c"))

    def test_group_order_limit(self):
        stmt = parse_statement(
            "SELECT k, COUNT(*) FROM t GROUP BY k ORDER BY COUNT(*) DESC, k LIMIT 5"
        )
        assert stmt.group_by == (A.ColumnRef(None, "k"),)
        assert stmt.order_by[0].descending is True
        assert stmt.order_by[1].descending is False
        assert stmt.limit == 5

    def test_trailing_garbage(self):
        with pytest.raises(ParseError, match="end of statement"):
            parse_statement("SELECT 1 1")

    def test_error_mentions_expected(self):
        with pytest.raises(ParseError, match="expected VALUES"):
            parse_statement("INSERT INTO kv")


class TestPrecedence:
    def test_arithmetic_precedence(self):
        assert parse_statement("SELECT 1 + 2 * 3") == parse_statement(
            "SELECT 1 + (2 * 3)"
        )

    def test_not_binds_tighter_than_and(self):
        assert parse_statement("SELECT NOT 1 AND 0") == parse_statement(
            "SELECT (NOT 1) AND 0"
        )

    def test_comparison_below_additive(self):
        assert parse_statement("SELECT 1 + 2 = 3") == parse_statement(
            "SELECT (1 + 2) = 3"
        )

    def test_concat_binds_tightest(self):
        assert parse_statement("SELECT - 'a' || 'b'") == parse_statement(
            "SELECT - ('a' || 'b')"
        )

    def test_neq_alias(self):
        assert parse_statement("SELECT 1 != 2") == parse_statement("SELECT 1 <> 2")

    def test_is_null_chainable(self):
        stmt = parse_statement("SELECT x IS NULL IS NOT NULL")
        inner = stmt.projections[0].expr
        assert inner == A.IsNull(A.IsNull(A.ColumnRef(None, "x"), False), True)


GRAMMAR_CORPUS = [
    "SELECT 1",
    "SELECT *, key AS k FROM kv",
    "SELECT key FROM kv",
    "SELECT kv.key FROM kv",
    "SELECT * FROM a, b, c, d WHERE a.x = b.x AND b.y = c.y AND c.z = d.z",
    "SELECT -x, NOT y, x % 3, x / 2, 'a' || 'b' FROM t",
    "SELECT x FROM t WHERE x IS NULL",
    "SELECT x FROM t WHERE x IS NOT NULL",
    "SELECT x FROM t WHERE key LIKE 'page:%'",
    "SELECT x FROM t WHERE (a = 1 OR b <> 2) AND c <= 3",
    "SELECT x FROM t WHERE a < 1 AND b > 2 AND c >= 0",
    "SELECT ABS(x), UPPER(s), LOWER(s), LENGTH(s) FROM t",
    "SELECT COUNT(*), SUM(x), AVG(x), MIN(x), MAX(x) FROM t",
    "SELECT k, COUNT(*) FROM t GROUP BY k",
    "SELECT k, j, COUNT(*) FROM t GROUP BY k, j",
    "SELECT x FROM t ORDER BY x",
    "SELECT x FROM t ORDER BY x DESC, x ASC",
    "SELECT x FROM t LIMIT 10",
    "SELECT x FROM t WHERE x = 0.5 OR x = .25 OR x = 2e3",
    "SELECT 'it''s', X'00FF', NULL, \"quoted id\" FROM t",
    "INSERT INTO kv VALUES (1)",
    "INSERT INTO kv (a) VALUES (1), (2), (3)",
    "INSERT INTO kv (key, value, time) VALUES ('a', 'x', 1)",
    "UPDATE t SET a = 1",
    "UPDATE t SET a = a + 1, b = 'x' WHERE a > 0",
    "DELETE FROM t",
    "DELETE FROM cache WHERE page_id = 17",
    "CREATE TABLE kv (key TEXT, value TEXT, time INTEGER)",
    "CREATE TABLE t (a, b INTEGER, c REAL, d TEXT, e BLOB)",
    "CREATE INDEX idx ON t (a)",
    "CREATE INDEX idx2 ON t (a, b)",
    "DROP TABLE t",
]


class TestRoundTrip:
    @pytest.mark.parametrize("sql", GRAMMAR_CORPUS)
    def test_corpus_round_trips(self, sql):
        ast = parse_statement(sql)
        printed = to_sql(ast)
        assert parse_statement(printed) == ast

    def test_random_statements_round_trip(self):
        rng = random.Random(1234)
        for _ in range(60):
            tables = genstmt.random_schema(rng)
            for table in tables:
                for sql in (
                    genstmt.create_table_sql(table),
                    genstmt.random_insert_sql(rng, table),
                    genstmt.random_select_sql(rng, tables),
                    genstmt.random_update_sql(rng, table),
                    genstmt.random_delete_sql(rng, table),
                ):
                    ast = parse_statement(sql)
                    assert parse_statement(to_sql(ast)) == ast

    def test_pathological_identifiers(self):
        ast = parse_statement('SELECT "select" FROM "group" ORDER BY "weird ""x"""')
        assert parse_statement(to_sql(ast)) == ast


class TestFuzz:
    @given(data=st.binary(max_size=512))
    @settings(max_examples=400)
    def test_never_crashes_on_bytes(self, data):
        text = data.decode("utf-8", "surrogateescape")
        try:
            parse_statement(text)
        except ParseError:
            pass

    def test_never_crashes_on_big_random_input(self):
        rng = random.Random(99)
        pieces = [
            "SELECT", "FROM", "WHERE", "(", ")", ",", "'", '"', "*", "+",
            "-", "%", "||", "X'", "0", "9", "a", "\\", ".", "=", "<", ">",
            "\x00", "\x7f", "é",
        ]
        for _ in range(300):
            text = "".join(rng.choices(pieces, k=rng.randrange(200)))[:65536]
            try:
                parse_statement(text)
            except ParseError:
                pass
