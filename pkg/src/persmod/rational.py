"""Exact rationals extended by +inf, and their string form."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

INF = math.inf

Rational = Union[Fraction, float]  # float only ever as INF


def as_rational(value) -> Rational:
    """Coerce ints, Fractions, strings and +inf to an exact value.

    Floats other than inf are rejected: everything downstream compares exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value == INF:
            return INF
        raise TypeError(f"floating point value {value!r} is not exact; pass a Fraction or string")
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def parse_rational(text: str) -> Rational:
    s = text.strip()
    if s in ("inf", "+inf", "Infinity", "∞"):
        return INF
    if any(c in s for c in ".eE"):
        raise ValueError(f"rational {text!r} must be written as 'a' or 'a/b'")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def format_rational(value: Rational) -> str:
    if value == INF:
        return "inf"
    if isinstance(value, float):
        raise ValueError(f"cannot format non-exact value {value!r}")
    return str(Fraction(value))


def is_inf(value: Rational) -> bool:
    return value == INF
