"""Carrier values of the data algebra.

A stream position holds one of five things: a boolean, an integer, a
fixed-point decimal with four fractional digits, a label drawn from a finite
set, or the marker BOTTOM standing for a missed reading.  Physiological
percentages are fixed-point on purpose: thresholds such as 0.0150 and 0.0250
must compare bit-exactly, which binary floats cannot guarantee.
"""

from __future__ import annotations

import re
from typing import Union

from .errors import DivisionByZero, KindMismatch

BOOLEAN = "boolean"
INTEGER = "integer"
DECIMAL = "decimal"
LABEL = "label"

KINDS = (BOOLEAN, INTEGER, DECIMAL, LABEL)

_LABEL_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")
_DEC_RE = re.compile(r"([+-]?)(\d+)\.(\d{1,4})\Z")


class Bottom:
    """The undefined-reading marker.  Use the BOTTOM singleton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __bool__(self):
        raise KindMismatch("BOTTOM has no truth value")


BOTTOM = Bottom()


class Dec4:
    """Fixed-point decimal stored as an integer count of 0.0001 units.

    Arithmetic is exact integer arithmetic on the scaled representation;
    multiplication and division floor toward negative infinity.
    """

    __slots__ = ("raw",)
    SCALE = 10_000

    def __init__(self, raw: int):
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise KindMismatch(f"Dec4 raw units must be an int, got {raw!r}")
        self.raw = raw

    @classmethod
    def parse(cls, text: str) -> "Dec4":
        m = _DEC_RE.match(text.strip())
        if not m:
            raise KindMismatch(f"not a fixed-point decimal: {text!r}")
        sign, whole, frac = m.groups()
        raw = int(whole) * cls.SCALE + int(frac.ljust(4, "0"))
        return cls(-raw if sign == "-" else raw)

    def __str__(self):
        sign = "-" if self.raw < 0 else ""
        whole, frac = divmod(abs(self.raw), self.SCALE)
        return f"{sign}{whole}.{frac:04d}"

    def __repr__(self):
        return f"Dec4({self.raw})"

    def __eq__(self, other):
        return isinstance(other, Dec4) and self.raw == other.raw

    def __hash__(self):
        return hash(("Dec4", self.raw))

    def __lt__(self, other):
        return self.raw < _as_dec(other).raw

    def __le__(self, other):
        return self.raw <= _as_dec(other).raw

    def __gt__(self, other):
        return self.raw > _as_dec(other).raw

    def __ge__(self, other):
        return self.raw >= _as_dec(other).raw

    def __add__(self, other):
        return Dec4(self.raw + _as_dec(other).raw)

    def __sub__(self, other):
        return Dec4(self.raw - _as_dec(other).raw)

    def __neg__(self):
        return Dec4(-self.raw)

    def __mul__(self, other):
        return Dec4((self.raw * _as_dec(other).raw) // self.SCALE)

    def __floordiv__(self, other):
        d = _as_dec(other)
        if d.raw == 0:
            raise DivisionByZero("decimal division by zero")
        return Dec4((self.raw * self.SCALE) // d.raw)

    def floor(self) -> int:
        return self.raw // self.SCALE


def _as_dec(value) -> Dec4:
    if isinstance(value, Dec4):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Dec4(value * Dec4.SCALE)
    raise KindMismatch(f"cannot use {value!r} as a decimal")


CarrierValue = Union[bool, int, Dec4, str, Bottom]


def kind_of(value) -> str:
    """Carrier kind of a non-BOTTOM value; KindMismatch otherwise."""
    if isinstance(value, bool):
        return BOOLEAN
    if isinstance(value, int):
        return INTEGER
    if isinstance(value, Dec4):
        return DECIMAL
    if isinstance(value, str):
        if not _LABEL_RE.match(value):
            raise KindMismatch(f"malformed label {value!r}")
        return LABEL
    if value is BOTTOM:
        raise KindMismatch("BOTTOM has no kind")
    raise KindMismatch(f"not a carrier value: {value!r}")


def is_carrier(value) -> bool:
    if value is BOTTOM:
        return True
    try:
        kind_of(value)
    except KindMismatch:
        return False
    return True


def format_value(value) -> str:
    """Canonical text of a carrier value (decimals with 4 fractional digits)."""
    if value is BOTTOM:
        return "NA"
    kind = kind_of(value)
    if kind == BOOLEAN:
        return "true" if value else "false"
    if kind == LABEL:
        return value
    return str(value)


def parse_value(text: str, kind: str) -> CarrierValue:
    """Parse the canonical text of a value under an expected kind."""
    if kind == BOOLEAN:
        if text == "true":
            return True
        if text == "false":
            return False
        raise KindMismatch(f"not a boolean: {text!r}")
    if kind == INTEGER:
        try:
            return int(text, 10)
        except ValueError:
            raise KindMismatch(f"not an integer: {text!r}") from None
    if kind == DECIMAL:
        return Dec4.parse(text)
    if kind == LABEL:
        if not _LABEL_RE.match(text):
            raise KindMismatch(f"not a label: {text!r}")
        return text
    raise KindMismatch(f"unknown kind {kind!r}")


# -- value-level operations and tests ---------------------------------------
#
# These back both the formula evaluator and the pointwise stream liftings.
# Integers promote to Dec4 when mixed with decimals; booleans and labels
# support equality only.

def _numeric_pair(a, b):
    ka, kb = kind_of(a), kind_of(b)
    if ka not in (INTEGER, DECIMAL) or kb not in (INTEGER, DECIMAL):
        raise KindMismatch(f"numeric operation on {ka} and {kb}")
    if ka == kb:
        return a, b
    return _as_dec(a), _as_dec(b)


def add_values(a, b):
    a, b = _numeric_pair(a, b)
    return a + b


def sub_values(a, b):
    a, b = _numeric_pair(a, b)
    return a - b


def mul_values(a, b):
    a, b = _numeric_pair(a, b)
    return a * b


def div_values(a, b):
    """Flooring division; the language has no fractional integer results."""
    a, b = _numeric_pair(a, b)
    if isinstance(a, Dec4):
        return a // b
    if b == 0:
        raise DivisionByZero("integer division by zero")
    return a // b


def neg_value(a):
    if kind_of(a) not in (INTEGER, DECIMAL):
        raise KindMismatch(f"cannot negate a {kind_of(a)}")
    return -a


def floor_value(a):
    k = kind_of(a)
    if k == INTEGER:
        return a
    if k == DECIMAL:
        return a.floor()
    raise KindMismatch(f"cannot floor a {k}")


def max_values(*args):
    if len(args) < 2:
        raise KindMismatch("max needs at least two values")
    out = args[0]
    for v in args[1:]:
        out = v if compare("gt", v, out) else out
    return out


def min_values(*args):
    if len(args) < 2:
        raise KindMismatch("min needs at least two values")
    out = args[0]
    for v in args[1:]:
        out = v if compare("lt", v, out) else out
    return out


_ORDERED = {"lt", "le", "gt", "ge"}


def compare(op: str, a, b) -> bool:
    """Apply a comparison test (eq/ne/lt/le/gt/ge) to two values."""
    ka, kb = kind_of(a), kind_of(b)
    if ka in (BOOLEAN, LABEL) or kb in (BOOLEAN, LABEL):
        if op not in ("eq", "ne"):
            raise KindMismatch(f"{ka} values admit only equality tests")
        if ka != kb:
            raise KindMismatch(f"cannot compare {ka} with {kb}")
        return (a == b) if op == "eq" else (a != b)
    a, b = _numeric_pair(a, b)
    if op == "eq":
        return a == b
    if op == "ne":
        return a != b
    if op == "lt":
        return a < b
    if op == "le":
        return a <= b
    if op == "gt":
        return a > b
    if op == "ge":
        return a >= b
    raise KindMismatch(f"unknown comparison {op!r}")
