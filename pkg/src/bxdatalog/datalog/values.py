"""Scalar constants: integers, decimals and strings.

Each value has a *kind*. Values of different kinds never compare equal and
have no relative order; comparing them in a builtin is an evaluation error.
"""

from __future__ import annotations

from decimal import Decimal
from typing import Any, Union

KINDS = ("int", "dec", "str")
_KIND_RANK = {"int": 0, "dec": 1, "str": 2}


class Dec(Decimal):
    """A decimal constant that is never equal to an ``int``.

    ``Decimal("1") == 1`` holds in Python, which would let two constants of
    different kinds collide inside a relation. This subclass refuses that.
    """

    __slots__ = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Decimal):
            return False
        return Decimal.__eq__(self, other)

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        return hash(("dec", Decimal.__hash__(self)))

    def __repr__(self) -> str:
        return f"Dec('{self}')"

    def __str__(self) -> str:
        return format(Decimal(self), "f")


Value = Union[int, Dec, str]


def kind_of(value: Any) -> str:
    if isinstance(value, bool):
        raise TypeError(f"booleans are not Datalog constants: {value!r}")
    if isinstance(value, int):
        return "int"
    if isinstance(value, Decimal):
        return "dec"
    if isinstance(value, str):
        return "str"
    raise TypeError(f"unsupported constant {value!r} of type {type(value).__name__}")


def as_value(value: Any) -> Value:
    """Coerce a Python scalar into a constant; floats go through ``str``."""
    if isinstance(value, Dec):
        return value
    if isinstance(value, float):
        return Dec(repr(value))
    if isinstance(value, Decimal):
        return Dec(value)
    kind_of(value)
    return value


def value_key(value: Value) -> tuple:
    return (_KIND_RANK[kind_of(value)], value)


def tuple_key(row: tuple) -> tuple:
    """Sort key giving a total lexicographic order over mixed-kind tuples."""
    return tuple(value_key(v) for v in row)
