"""Devil's staircase of the middle-thirds set and the scale-invariant ODE check."""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_serializer

from ultrascale.errors import DomainError
from ultrascale.geometry.cantor_sets import Interval
from ultrascale.parsing import RationalLike, format_rational, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 64


class StaircaseValue(BaseModel):
    """One evaluation of the Cantor function with its digit trace."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: Fraction
    phi: Fraction
    ternary_digits: List[int]
    binary_digits: List[int]
    exact: bool

    @field_serializer("t", "phi")
    def _serialize_rational(self, value: Fraction) -> str:
        return format_rational(value)

    @property
    def decimal(self) -> float:
        return float(self.phi)

    def to_markdown(self) -> str:
        """Format value as markdown."""
        kind = "exact" if self.exact else "truncated"
        return "\n".join(
            [
                f"**phi({format_rational(self.t)})** = {format_rational(self.phi)} ({kind})",
                f"**Decimal:** {self.decimal:.17g}",
                f"**Ternary digits:** {''.join(map(str, self.ternary_digits)) or '-'}",
                f"**Binary digits:** {''.join(map(str, self.binary_digits)) or '-'}",
            ]
        )


def _binary_value(bits: Sequence[int]) -> Fraction:
    value = Fraction(0)
    for k, bit in enumerate(bits):
        if bit:
            value += Fraction(1, 2 ** (k + 1))
    return value


def devil_staircase(t: RationalLike | float, precision: int = DEFAULT_PRECISION) -> StaircaseValue:
    """
    Evaluate the Cantor function by the ternary-to-binary digit map.

    The ternary expansion of t is produced by exact long division, taking the
    terminating form at endpoints. Reading stops at the first digit 1 (which
    emits a binary 1); digits 0 and 2 map to 0 and 1. A ternary cycle found
    within `precision` digits yields the exact rational value, otherwise the
    result is the dyadic truncation.

    Args:
        t: Point in [0, 1]; floats are read through their decimal repr
        precision: Maximum number of ternary digits consumed

    Returns:
        StaircaseValue with exact rational phi(t)

    Raises:
        DomainError: If t lies outside [0, 1] or precision < 1
    """
    if precision < 1:
        raise DomainError(f"Precision must be at least 1 digit, got {precision}")
    q = parse_rational(t)
    if not 0 <= q <= 1:
        raise DomainError(f"Cantor function argument must lie in [0, 1], got {q}")
    if q == 1:
        return StaircaseValue(t=q, phi=Fraction(1), ternary_digits=[], binary_digits=[], exact=True)

    ternary: List[int] = []
    bits: List[int] = []
    seen: Dict[Fraction, int] = {}
    remainder = q
    cycle_start: Optional[int] = None
    exact = False
    while len(ternary) < precision:
        if remainder == 0:
            exact = True
            break
        if remainder in seen:
            cycle_start = seen[remainder]
            exact = True
            break
        seen[remainder] = len(ternary)
        remainder *= 3
        digit = remainder.numerator // remainder.denominator
        remainder -= digit
        ternary.append(digit)
        if digit == 1:
            bits.append(1)
            exact = True
            break
        bits.append(digit // 2)
    else:
        exact = remainder == 0

    if cycle_start is None:
        phi = _binary_value(bits)
    else:
        period = len(bits) - cycle_start
        cycle = int("".join(map(str, bits[cycle_start:])), 2)
        phi = _binary_value(bits[:cycle_start]) + Fraction(cycle, 2**period - 1) / 2**cycle_start

    return StaircaseValue(t=q, phi=phi, ternary_digits=ternary, binary_digits=bits, exact=exact)


def staircase_grid(n: int, precision: int = DEFAULT_PRECISION) -> List[Tuple[Fraction, Fraction]]:
    """Rows (t, phi(t)) at t = k/n for k = 0..n."""
    if n < 1:
        raise DomainError(f"Grid size must be positive, got {n}")
    return [(Fraction(k, n), devil_staircase(Fraction(k, n), precision).phi) for k in range(n + 1)]


class GapCheck(BaseModel):
    """Constancy of phi on one gap."""

    left: str
    right: str
    value: str
    spread: float
    passed: bool


class GapConstancyReport(BaseModel):
    """Result of checking that phi is constant on every gap."""

    samples_per_gap: int
    tolerance: float
    gaps: List[GapCheck]

    @property
    def failures(self) -> List[GapCheck]:
        return [g for g in self.gaps if not g.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_markdown(self) -> str:
        """Format report as markdown."""
        if not self.gaps:
            return "_No gaps checked_"
        lines = [
            f"**Gaps:** {len(self.gaps)}, **failures:** {len(self.failures)}",
            "",
            "| gap | phi | spread | ok |",
            "|---|---|---|---|",
        ]
        for g in self.gaps:
            ok = "yes" if g.passed else "NO"
            lines.append(f"| ({g.left}, {g.right}) | {g.value} | {g.spread:.2e} | {ok} |")
        return "\n".join(lines)


def gap_constancy_check(
    gaps: Sequence[Interval], samples: int = 100, precision: int = DEFAULT_PRECISION
) -> GapConstancyReport:
    """
    Check that phi is constant on each open gap.

    Samples are equally spaced interior points; a gap passes when all
    values agree to 2**-precision.
    """
    if samples < 1:
        raise DomainError(f"Need at least one sample per gap, got {samples}")
    tolerance = 2.0**-precision
    checks = []
    for left, right in gaps:
        width = right - left
        values = [
            devil_staircase(left + width * Fraction(k + 1, samples + 1), precision).phi
            for k in range(samples)
        ]
        spread = float(max(values) - min(values))
        checks.append(
            GapCheck(
                left=format_rational(left),
                right=format_rational(right),
                value=format_rational(values[0]),
                spread=spread,
                passed=spread <= tolerance,
            )
        )
    logger.debug(f"Checked {len(checks)} gaps with {samples} samples each")
    return GapConstancyReport(samples_per_gap=samples, tolerance=tolerance, gaps=checks)


def central_difference(f: Callable[[float], float], t: float, step: float) -> float:
    """Second-order central difference (f(t+h) - f(t-h)) / 2h."""
    return (f(t + step) - f(t - step)) / (2.0 * step)


def ode_residual_at(candidate: Callable[[float], float], t: float, step: float) -> float:
    """|t * psi'(t) - psi(t)| for the scale-invariant equation in t = log 1/x."""
    if not step > 0:
        raise DomainError(f"Finite-difference step must be positive, got {step}")
    return abs(t * central_difference(candidate, t, step) - candidate(t))


def ode_residual(
    C: float,
    x: float,
    step: float,
    candidate: Optional[Callable[[float], float]] = None,
) -> float:
    """
    Residual of log(1/x) dpsi/dlog(1/x) = psi at x for psi(t) = C*t.

    Args:
        C: Slope of the linear solution family
        x: Point in (0, 1)
        step: Finite-difference step in t = log(1/x)
        candidate: Optional other psi(t) to test instead of C*t

    Raises:
        DomainError: If x is outside (0, 1) or step <= 0
    """
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    psi = candidate if candidate is not None else (lambda u: C * u)
    return ode_residual_at(psi, math.log(1.0 / x), step)
