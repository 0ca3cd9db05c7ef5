import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kernel_backends
from sqcached.errors import TypeMismatchError, UnknownFunctionError
from sqcached.values import (
    INT64_MAX,
    INT64_MIN,
    coerce_for_column,
    eval_binop,
    eval_scalar,
    eval_unary,
    logical_and,
    logical_or,
    sql_like,
)

values_st = st.one_of(
    st.none(),
    st.integers(min_value=INT64_MIN, max_value=INT64_MAX),
    st.floats(allow_nan=False),
    st.text(max_size=20),
    st.binary(max_size=20),
)


@pytest.mark.parametrize("kernel", kernel_backends())
class TestCompare:
    def test_type_rank(self, kernel):
        assert kernel.compare_values(None, 5) == -1
        assert kernel.compare_values(5, "a") == -1
        assert kernel.compare_values("a", b"a") == -1
        assert kernel.compare_values(b"", None) == 1

    def test_numeric_across_types(self, kernel):
        assert kernel.compare_values(2, 2.0) == 0
        assert kernel.compare_values(1, 1.5) == -1
        assert kernel.compare_values(2.5, 2) == 1

    def test_prefix_rule(self, kernel):
        assert kernel.compare_values("ab", "abc") == -1
        assert kernel.compare_values(b"ab", b"abc") == -1
        assert kernel.compare_values("abc", "abc") == 0

    @given(a=values_st, b=values_st, c=values_st)
    @settings(max_examples=300)
    def test_total_order(self, kernel, a, b, c):
        cab = kernel.compare_values(a, b)
        assert kernel.compare_values(a, a) == 0
        assert kernel.compare_values(b, a) == -cab
        # transitivity: a<=b and b<=c implies a<=c
        if cab <= 0 and kernel.compare_values(b, c) <= 0:
            assert kernel.compare_values(a, c) <= 0

    @given(a=values_st, b=values_st)
    def test_equal_means_same_bucket(self, kernel, a, b):
        # compare-equality must agree with dict/grouping placement
        if kernel.compare_values(a, b) == 0:
            assert len({a: 1, b: 1}) == 1
        else:
            assert a != b or type(a) is not type(b)


@pytest.mark.parametrize("kernel", kernel_backends())
class TestLike:
    def test_suffix_wildcard(self, kernel):
        assert kernel.like_match("page:%", "page:42:body")

    def test_single_char_wildcard(self, kernel):
        assert kernel.like_match("a_c", "abc")
        assert not kernel.like_match("a_c", "abbc")

    def test_ascii_case_folding(self, kernel):
        assert kernel.like_match("A%", "apple")
        assert kernel.like_match("aPpLe", "APPLE")

    def test_non_text_subject(self, kernel):
        assert not kernel.like_match("5", 5)
        assert not kernel.like_match("%", None)
        assert not kernel.like_match("%", b"blob")

    def test_empty_cases(self, kernel):
        assert kernel.like_match("", "")
        assert kernel.like_match("%", "")
        assert not kernel.like_match("_", "")

    @given(
        pattern=st.text(alphabet="ab%_C", max_size=12),
        subject=st.text(alphabet="abcC", max_size=16),
    )
    @settings(max_examples=500)
    def test_agrees_with_regex_oracle(self, kernel, pattern, subject):
        parts = []
        for ch in pattern:
            if ch == "%":
                parts.append(".*")
            elif ch == "_":
                parts.append(".")
            else:
                parts.append(re.escape(ch.lower()))
        rx = re.compile("".join(parts) + r"\Z", re.DOTALL)
        expected = rx.match(subject.lower()) is not None
        assert kernel.like_match(pattern, subject) == expected


class TestScalarFunctions:
    def test_abs(self):
        assert eval_scalar("ABS", [-7]) == 7
        assert eval_scalar("ABS", [-2.5]) == 2.5
        assert eval_scalar("ABS", [None]) is None
        # |INT64_MIN| does not fit: promoted
        assert eval_scalar("ABS", [INT64_MIN]) == float(2**63)

    def test_upper_lower(self):
        assert eval_scalar("UPPER", ["abc"]) == "ABC"
        assert eval_scalar("LOWER", ["AbC"]) == "abc"
        assert eval_scalar("UPPER", [None]) is None
        # non-ASCII letters pass through untouched
        assert eval_scalar("UPPER", ["café"]) == "CAFé"

    def test_length(self):
        assert eval_scalar("LENGTH", [None]) is None
        assert eval_scalar("LENGTH", ["abc"]) == 3
        assert eval_scalar("LENGTH", ["é"]) == 2  # utf-8 bytes
        assert eval_scalar("LENGTH", [b"\x00\x01"]) == 2

    def test_type_errors(self):
        with pytest.raises(TypeMismatchError):
            eval_scalar("ABS", ["text"])
        with pytest.raises(TypeMismatchError):
            eval_scalar("UPPER", [5])
        with pytest.raises(TypeMismatchError):
            eval_scalar("LENGTH", [1.5])
        with pytest.raises(UnknownFunctionError):
            eval_scalar("SQRT", [4])


class TestBinop:
    def test_arithmetic(self):
        assert eval_binop("+", 2, 3) == 5
        assert eval_binop("-", 2, 3) == -1
        assert eval_binop("*", 4, 3) == 12

    def test_division_by_zero_is_null(self):
        assert eval_binop("/", 1, 0) is None
        assert eval_binop("%", 1, 0) is None
        assert eval_binop("/", 1.0, 0.0) is None

    def test_integer_division_truncates_toward_zero(self):
        assert eval_binop("/", 7, 2) == 3
        assert eval_binop("/", -7, 2) == -3
        assert eval_binop("%", -7, 3) == -1
        assert eval_binop("%", 7, -3) == 1

    def test_overflow_promotes_to_real(self):
        r = eval_binop("+", INT64_MAX, 1)
        assert type(r) is float and r == float(INT64_MAX + 1)
        r = eval_binop("*", INT64_MAX, 2)
        assert type(r) is float
        r = eval_binop("/", INT64_MIN, -1)
        assert type(r) is float and r == float(2**63)
        assert type(eval_unary("-", INT64_MIN)) is float

    def test_null_propagation(self):
        assert eval_binop("+", None, 1) is None
        assert eval_binop("<", 1, None) is None
        assert eval_binop("=", None, None) is None
        assert eval_binop("||", None, "x") is None

    def test_nan_results_become_null(self):
        inf = float("inf")
        assert eval_binop("-", inf, inf) is None
        assert eval_binop("%", 1.0, inf) == 1.0

    def test_concat(self):
        assert eval_binop("||", "a", "b") == "ab"
        with pytest.raises(TypeMismatchError):
            eval_binop("||", "a", 1)

    def test_arith_type_errors(self):
        with pytest.raises(TypeMismatchError):
            eval_binop("+", "a", 1)
        with pytest.raises(TypeMismatchError):
            eval_binop("*", b"x", b"y")

    @given(a=values_st, b=values_st)
    @settings(max_examples=300)
    def test_comparisons_agree_with_compare_values(self, a, b):
        from sqcached.kernel import compare_values

        for op, pred in (
            ("=", lambda c: c == 0),
            ("<>", lambda c: c != 0),
            ("<", lambda c: c < 0),
            ("<=", lambda c: c <= 0),
            (">", lambda c: c > 0),
            (">=", lambda c: c >= 0),
        ):
            got = eval_binop(op, a, b)
            if a is None or b is None:
                assert got is None
            else:
                assert got == (1 if pred(compare_values(a, b)) else 0)


class TestLogic:
    def test_three_valued_and(self):
        assert logical_and(1, 1) == 1
        assert logical_and(0, None) == 0
        assert logical_and(None, 1) is None
        assert logical_and(None, None) is None

    def test_three_valued_or(self):
        assert logical_or(0, 0) == 0
        assert logical_or(1, None) == 1
        assert logical_or(None, 0) is None

    def test_not(self):
        assert eval_unary("NOT", 0) == 1
        assert eval_unary("NOT", 5) == 0
        assert eval_unary("NOT", None) is None
        with pytest.raises(TypeMismatchError):
            eval_unary("NOT", "x")


class TestSqlLike:
    def test_result_typing(self):
        assert sql_like("abc", "a%") == 1
        assert sql_like("abc", "b%") == 0
        assert sql_like(None, "a%") == 0  # null subject never matches
        assert sql_like("abc", None) is None
        with pytest.raises(TypeMismatchError):
            sql_like("abc", 5)


class TestCoercion:
    def test_numeric_text_into_numeric_columns(self):
        assert coerce_for_column("123", "INTEGER") == 123
        assert coerce_for_column("-4", "INTEGER") == -4
        assert coerce_for_column("1.5", "INTEGER") == 1.5
        assert coerce_for_column("2e3", "REAL") == 2000.0
        assert coerce_for_column("12x", "INTEGER") == "12x"
        assert coerce_for_column("", "INTEGER") == ""

    def test_untouched_cases(self):
        assert coerce_for_column("123", "TEXT") == "123"
        assert coerce_for_column("123", "NONE") == "123"
        assert coerce_for_column(b"123", "INTEGER") == b"123"
        assert coerce_for_column(7, "REAL") == 7

    def test_huge_numeric_text_promotes(self):
        v = coerce_for_column(str(2**70), "INTEGER")
        assert type(v) is float
