"""Cell value semantics: arithmetic, comparison, scalar functions, coercion.

Values are dynamically typed Python objects: None, int (signed 64-bit
domain), float, str, bytes. Integer results outside the 64-bit range
promote the operation to float; division and modulo by zero yield null;
any null operand nulls arithmetic and comparisons (three-valued logic).
"""

import math

from .errors import TypeMismatchError, UnknownFunctionError
from .kernel import compare_values, like_match

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

SCALAR_FUNCTIONS = frozenset({"ABS", "UPPER", "LOWER", "LENGTH"})
AGGREGATE_FUNCTIONS = frozenset({"COUNT", "SUM", "AVG", "MIN", "MAX"})

_ASCII_UPPER = str.maketrans(
    "abcdefghijklmnopqrstuvwxyz", "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
)
_ASCII_LOWER = str.maketrans(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz"
)


def is_numeric(v):
    return type(v) is int or type(v) is float


def type_name(v):
    if v is None:
        return "null"
    return {int: "integer", float: "real", str: "text", bytes: "blob"}[type(v)]


def _clamp_int(r):
    """Keep int results inside the 64-bit domain, spilling to float."""
    if INT64_MIN <= r <= INT64_MAX:
        return r
    return float(r)


def _guard_float(r):
    # arithmetic may produce nan (e.g. inf - inf); nan has no place in a
    # total order, so it collapses to null
    return None if r != r else r


def eval_binop(op, a, b):
    """Apply a binary operator to two cell values.

    Comparison operators return integer 1/0, or null when either side is
    null. Arithmetic requires numeric operands; || requires text.
    """
    if op in _COMPARISONS:
        if a is None or b is None:
            return None
        c = compare_values(a, b)
        return 1 if _COMPARISONS[op](c) else 0
    if op == "||":
        if a is None or b is None:
            return None
        if type(a) is not str or type(b) is not str:
            raise TypeMismatchError(
                f"cannot concatenate {type_name(a)} and {type_name(b)}"
            )
        return a + b
    # arithmetic
    if a is None or b is None:
        return None
    if not is_numeric(a) or not is_numeric(b):
        raise TypeMismatchError(
            f"cannot apply {op} to {type_name(a)} and {type_name(b)}"
        )
    both_int = type(a) is int and type(b) is int
    if op == "+":
        return _clamp_int(a + b) if both_int else _guard_float(a + b)
    if op == "-":
        return _clamp_int(a - b) if both_int else _guard_float(a - b)
    if op == "*":
        return _clamp_int(a * b) if both_int else _guard_float(a * b)
    if op == "/":
        if b == 0:
            return None
        if both_int:
            # C-style division, truncated toward zero
            q = abs(a) // abs(b)
            return _clamp_int(q if (a >= 0) == (b >= 0) else -q)
        return _guard_float(a / b)
    if op == "%":
        if b == 0:
            return None
        if both_int:
            # remainder takes the dividend's sign
            r = abs(a) % abs(b)
            return r if a >= 0 else -r
        return _guard_float(math.fmod(a, b))
    raise TypeMismatchError(f"unknown operator {op}")


_COMPARISONS = {
    "=": lambda c: c == 0,
    "<>": lambda c: c != 0,
    "<": lambda c: c < 0,
    "<=": lambda c: c <= 0,
    ">": lambda c: c > 0,
    ">=": lambda c: c >= 0,
}


def eval_unary(op, v):
    if op == "-":
        if v is None:
            return None
        if type(v) is int:
            return _clamp_int(-v)
        if type(v) is float:
            return -v
        raise TypeMismatchError(f"cannot negate {type_name(v)}")
    if op == "NOT":
        if v is None:
            return None
        return 1 if not truth(v) else 0
    raise TypeMismatchError(f"unknown unary operator {op}")


def truth(v):
    """Predicate truth of a non-null value; text/blob have none."""
    if is_numeric(v):
        return v != 0
    raise TypeMismatchError(f"{type_name(v)} has no truth value")


def logical_and(a, b):
    # Kleene: false dominates null
    fa = a is not None and not truth(a)
    fb = b is not None and not truth(b)
    if fa or fb:
        return 0
    if a is None or b is None:
        return None
    return 1


def logical_or(a, b):
    ta = a is not None and truth(a)
    tb = b is not None and truth(b)
    if ta or tb:
        return 1
    if a is None or b is None:
        return None
    return 0


def eval_scalar(fn, args):
    """Evaluate a scalar function call; fn is already uppercased."""
    if fn == "ABS":
        (v,) = args
        if v is None:
            return None
        if type(v) is int:
            return _clamp_int(abs(v))
        if type(v) is float:
            return abs(v)
        raise TypeMismatchError(f"ABS of {type_name(v)}")
    if fn == "UPPER" or fn == "LOWER":
        (v,) = args
        if v is None:
            return None
        if type(v) is not str:
            raise TypeMismatchError(f"{fn} of {type_name(v)}")
        return v.translate(_ASCII_UPPER if fn == "UPPER" else _ASCII_LOWER)
    if fn == "LENGTH":
        (v,) = args
        if v is None:
            return None
        if type(v) is str:
            return len(v.encode("utf-8", "surrogateescape"))
        if type(v) is bytes:
            return len(v)
        raise TypeMismatchError(f"LENGTH of {type_name(v)}")
    raise UnknownFunctionError(f"unknown function {fn}")


def sql_like(subject, pattern):
    """LIKE with SQL result typing: null pattern is null, else 1/0."""
    if pattern is None:
        return None
    if type(pattern) is not str:
        raise TypeMismatchError(f"LIKE pattern is {type_name(pattern)}")
    return 1 if like_match(pattern, subject) else 0


_INT_CHARS = frozenset("0123456789+-")


def coerce_for_column(value, affinity):
    """Apply column affinity: numeric-looking text lands in numeric columns
    as numbers; everything else is stored verbatim."""
    if affinity not in ("INTEGER", "REAL") or type(value) is not str:
        return value
    s = value.strip()
    if not s:
        return value
    try:
        if s[0] in _INT_CHARS and all(c in "0123456789" for c in s.lstrip("+-")):
            return _clamp_int(int(s))
        f = float(s)
        if math.isfinite(f):
            return f
        return value
    except ValueError:
        return value


def value_bytes_estimate(v):
    """Rough per-cell heap footprint used by the stats byte model."""
    if v is None:
        return 4
    if type(v) is int or type(v) is float:
        return 12
    return 16 + len(v)
