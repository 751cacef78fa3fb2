"""Primitive values and the dynamic-language coercions used by ``prim``."""

from __future__ import annotations

import math
from dataclasses import dataclass


class _Singleton:
    __slots__ = ("_name",)

    def __init__(self, name: str) -> None:
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


UNDEFINED = _Singleton("undefined")
NULL = _Singleton("null")
# "no value" marker, e.g. strict-mode resolve-base misses
EMPTY = _Singleton("empty")


@dataclass(frozen=True, slots=True)
class Ref:
    """A heap location."""

    loc: int

    def __repr__(self) -> str:
        return f"@{self.loc}"


@dataclass(frozen=True, slots=True)
class PropIter:
    """Snapshot of property names taken by get-pnames."""

    names: tuple[str, ...]


class EnvRef:
    """Reference to a variable environment; only produced by resolve-base."""

    __slots__ = ("env",)

    def __init__(self, env) -> None:
        self.env = env

    def __repr__(self) -> str:
        return "<env>"


def is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def norm_number(x):
    """Canonical numeric form: integral finite floats become ints (no negative zero)."""
    if isinstance(x, float):
        if x.is_integer() and abs(x) < 2**53:
            return int(x)
    elif isinstance(x, int) and not isinstance(x, bool) and abs(x) >= 2**53:
        return float(x)
    return x


def to_number(v):
    if v is UNDEFINED:
        return math.nan
    if v is NULL:
        return 0
    if isinstance(v, bool):
        return 1 if v else 0
    if is_number(v):
        return v
    if isinstance(v, str):
        s = v.strip()
        if s == "":
            return 0
        try:
            return norm_number(int(s, 0)) if s.lower().startswith(("0x", "0o", "0b")) else norm_number(float(s))
        except ValueError:
            return math.nan
    return math.nan


def to_int32(v) -> int:
    n = to_number(v)
    if isinstance(n, float) and (math.isnan(n) or math.isinf(n)):
        return 0
    n = int(n) & 0xFFFFFFFF
    return n - (1 << 32) if n >= (1 << 31) else n


def to_uint32(v) -> int:
    return to_int32(v) & 0xFFFFFFFF


def truthy(v) -> bool:
    if v is UNDEFINED or v is NULL or v is EMPTY:
        return False
    if isinstance(v, bool):
        return v
    if is_number(v):
        return not (v == 0 or (isinstance(v, float) and math.isnan(v)))
    if isinstance(v, str):
        return v != ""
    return True


def number_to_string(n) -> str:
    if isinstance(n, float):
        if math.isnan(n):
            return "NaN"
        if math.isinf(n):
            return "Infinity" if n > 0 else "-Infinity"
        if n.is_integer():
            return str(int(n))
        return repr(n)
    return str(n)


def to_string(v) -> str:
    if isinstance(v, str):
        return v
    if v is UNDEFINED:
        return "undefined"
    if v is NULL:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if is_number(v):
        return number_to_string(v)
    if isinstance(v, Ref):
        return "[object Object]"
    return str(v)


def type_name(v, is_function: bool = False) -> str:
    if v is UNDEFINED or v is EMPTY:
        return "undefined"
    if v is NULL:
        return "object"
    if isinstance(v, bool):
        return "boolean"
    if is_number(v):
        return "number"
    if isinstance(v, str):
        return "string"
    if is_function:
        return "function"
    return "object"


def strict_equals(a, b) -> bool:
    if is_number(a) and is_number(b):
        return a == b
    if type(a) is not type(b):
        return False
    return a == b if not isinstance(a, _Singleton) else a is b


def loose_equals(a, b) -> bool:
    if (a is UNDEFINED or a is NULL) and (b is UNDEFINED or b is NULL):
        return True
    if a is UNDEFINED or a is NULL or b is UNDEFINED or b is NULL:
        return False
    if isinstance(a, Ref) and isinstance(b, Ref):
        return a == b
    a, b = to_primitive(a), to_primitive(b)
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return to_number(a) == to_number(b)


def to_primitive(v):
    """Objects have no valueOf/toString hooks here, so they all become the default string."""
    return "[object Object]" if isinstance(v, Ref) else v


def _compare(a, b, op) -> bool:
    a, b = to_primitive(a), to_primitive(b)
    if isinstance(a, str) and isinstance(b, str):
        return op(a, b)
    x, y = to_number(a), to_number(b)
    if (isinstance(x, float) and math.isnan(x)) or (isinstance(y, float) and math.isnan(y)):
        return False
    return op(x, y)


def _div(a, b):
    x, y = to_number(a), to_number(b)
    if y == 0:
        if x == 0 or (isinstance(x, float) and math.isnan(x)):
            return math.nan
        return math.inf if x > 0 else -math.inf
    return norm_number(x / y)


def _mod(a, b):
    x, y = to_number(a), to_number(b)
    if y == 0 or (isinstance(x, float) and (math.isnan(x) or math.isinf(x))):
        return math.nan
    if isinstance(y, float) and math.isnan(y):
        return math.nan
    return norm_number(math.fmod(x, y))


def _add(a, b):
    if isinstance(a, str) or isinstance(b, str) or isinstance(a, Ref) or isinstance(b, Ref):
        return to_string(a) + to_string(b)
    return norm_number(to_number(a) + to_number(b))


def _arith(fn):
    def op(a, b):
        x, y = to_number(a), to_number(b)
        try:
            return norm_number(fn(x, y))
        except OverflowError:
            return math.inf
    return op


BINARY_OPS = {
    "add": _add,
    "sub": _arith(lambda x, y: x - y),
    "mul": _arith(lambda x, y: x * y),
    "div": _div,
    "mod": _mod,
    "eq": loose_equals,
    "neq": lambda a, b: not loose_equals(a, b),
    "stricteq": strict_equals,
    "nstricteq": lambda a, b: not strict_equals(a, b),
    "less": lambda a, b: _compare(a, b, lambda x, y: x < y),
    "lesseq": lambda a, b: _compare(a, b, lambda x, y: x <= y),
    "greater": lambda a, b: _compare(a, b, lambda x, y: x > y),
    "greatereq": lambda a, b: _compare(a, b, lambda x, y: x >= y),
    "lshift": lambda a, b: to_int32(to_int32(a) << (to_uint32(b) & 31)),
    "rshift": lambda a, b: to_int32(a) >> (to_uint32(b) & 31),
    "urshift": lambda a, b: to_uint32(a) >> (to_uint32(b) & 31),
    "bitand": lambda a, b: to_int32(to_int32(a) & to_int32(b)),
    "bitor": lambda a, b: to_int32(to_int32(a) | to_int32(b)),
    "bitxor": lambda a, b: to_int32(to_int32(a) ^ to_int32(b)),
    "and": lambda a, b: truthy(a) and truthy(b),
    "or": lambda a, b: truthy(a) or truthy(b),
    "xor": lambda a, b: truthy(a) != truthy(b),
}

UNARY_OPS = {
    "not": lambda a: not truthy(a),
    "negate": lambda a: norm_number(-to_number(a)),
    "bitnot": lambda a: to_int32(~to_int32(a)),
    "to-number": to_number,
    "inc": lambda a: norm_number(to_number(a) + 1),
    "dec": lambda a: norm_number(to_number(a) - 1),
}

PRIM_OPS = {**{k: 2 for k in BINARY_OPS}, **{k: 1 for k in UNARY_OPS}}


def apply_prim(op: str, *args):
    if len(args) == 2:
        return BINARY_OPS[op](*args)
    return UNARY_OPS[op](args[0])


def canonical(v):
    """A hashable, NaN-safe key for comparing primitives across runs."""
    if isinstance(v, float) and math.isnan(v):
        return ("nan",)
    if isinstance(v, bool):
        return ("bool", v)
    if is_number(v):
        return ("num", v)
    if isinstance(v, str):
        return ("str", v)
    if isinstance(v, PropIter):
        return ("iter", v.names)
    return ("special", repr(v))
