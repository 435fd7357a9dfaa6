"""Conversions at the boundary: rationals as "num/den", reals as decimals."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

from ultrascale.errors import DomainError

RationalLike = Union[Fraction, int, str]


def parse_rational(value: RationalLike | float) -> Fraction:
    """
    Convert a rational-like value to an exact Fraction.

    Args:
        value: Fraction, int, a "num/den" or decimal string, or a float
            (converted through its shortest decimal repr, so 0.1 is 1/10)

    Returns:
        Exact rational value
    """
    if isinstance(value, bool):
        raise DomainError(f"Expected a rational number, got {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"Expected a finite number, got {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"Cannot parse rational from {value!r}: {e}") from e


def parse_real_list(text: str) -> list[float]:
    """Parse a comma-separated list of reals ("0.5,0.25")."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise DomainError(f"Cannot parse real list from {text!r}") from e


def parse_int_list(text: str) -> list[int]:
    """Parse a comma-separated list of integers ("1,0,1")."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise DomainError(f"Cannot parse integer list from {text!r}") from e


def format_rational(q: Fraction) -> str:
    """Render a Fraction as "num/den" (denominator always present)."""
    return f"{q.numerator}/{q.denominator}"


def format_real(x: float, digits: int = 12) -> str:
    """Render a real with an explicit number of significant digits."""
    return f"{x:.{digits}g}"


def reciprocal(x: float) -> float:
    """
    Return 1/x, snapped to the nearest integer when within rounding noise.

    Decimal scales such as 1e-3 are not exact binary floats; their
    reciprocals are meant as the integers 10**k.
    """
    if x <= 0:
        raise DomainError(f"Reciprocal needs x > 0, got {x}")
    y = 1.0 / x
    nearest = round(y)
    if nearest > 0 and abs(y - nearest) <= 1e-9 * y:
        return float(nearest)
    return y
