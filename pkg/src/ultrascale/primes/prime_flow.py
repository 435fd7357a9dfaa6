"""
Prime counting, Chebyshev functions and the prime-driven valuation flow.

Natural logarithms throughout. Bounds taken as 1/x snap to the nearest
integer when within rounding, so 1/0.001 counts primes below 1000.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from sympy import integer_nthroot

from ultrascale.errors import DomainError, FitError
from ultrascale.fitting import DEFAULT_R2_THRESHOLD, linear_fit
from ultrascale.parsing import RationalLike, parse_rational, reciprocal
from ultrascale.primes.sieve import PrimeTable

logger = logging.getLogger(__name__)

ALPHA_CAVEAT = (
    "alpha_hat is reported, not asserted: at desk scale the deviation decays "
    "roughly like 1/log y, far slower than any power y**-(1/2 - eps)"
)


def _integer_bound(y: float, strict: bool) -> int:
    """Largest integer n with n <= y (n < y when strict)."""
    if y < 0 or math.isnan(y):
        raise DomainError(f"Bound must be a non-negative real, got {y}")
    return math.ceil(y) - 1 if strict else math.floor(y)


def _check_scale(x: float) -> float:
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    return reciprocal(x)


def prime_pi(y: float, table: PrimeTable, strict: bool = False) -> int:
    """
    Number of primes p <= y (p < y when strict).

    Raises:
        TableTooSmallError: If y exceeds the table limit
    """
    return table.count(_integer_bound(y, strict))


def chebyshev_theta(y: float, table: PrimeTable, strict: bool = False) -> float:
    """Sum of log p over primes p <= y (p < y when strict)."""
    return table.log_sum(_integer_bound(y, strict))


def chebyshev_psi(y: float, table: PrimeTable, strict: bool = False) -> float:
    """
    Sum of log p over prime powers p**n <= y (p**n < y when strict).

    Computed as sum over k of theta(floor(N**(1/k))) with exact integer roots.
    """
    bound = _integer_bound(y, strict)
    table.require(bound)
    total = 0.0
    k = 1
    while bound >= 2**k:
        root = int(integer_nthroot(bound, k)[0])
        total += table.log_sum(root)
        k += 1
    return total


class GrowthPoint(BaseModel):
    """Valuation growth v = x * Pi(1/x) at one scale."""

    x: float
    count: int
    v: float
    log_y: float


def valuation_growth(x: float, table: PrimeTable) -> GrowthPoint:
    """
    v = x * Pi(1/x) with primes p < 1/x, and log Y = v * log(1/x).

    Raises:
        DomainError: If x is outside (0, 1)
        TableTooSmallError: If 1/x exceeds the table limit
    """
    y = _check_scale(x)
    count = prime_pi(y, table, strict=True)
    v = x * count
    return GrowthPoint(x=x, count=count, v=v, log_y=v * math.log(y))


def parse_decades(text: str) -> List[float]:
    """
    Decade ladder "1e2:1e7" -> [1e2, 1e3, ..., 1e7].

    Raises:
        DomainError: If the endpoints are not ascending powers of ten
    """
    try:
        first, last = (float(part) for part in text.split(":"))
    except ValueError as e:
        raise DomainError(f"Cannot parse decade ladder {text!r}; use e.g. 1e2:1e7") from e
    if not (0 < first < last):
        raise DomainError(f"Decade ladder needs ascending powers of ten, got {text!r}")
    lo, hi = round(math.log10(first)), round(math.log10(last))
    if first != 10.0**lo or last != 10.0**hi:
        raise DomainError(f"Decade ladder endpoints must be powers of ten, got {text!r}")
    return [10.0**k for k in range(lo, hi + 1)]


class DeviationRow(BaseModel):
    """Prime number theorem deviations at one y."""

    y: float
    pi: int
    psi: float
    dev_pi: float
    dev_psi: float


class DeviationTable(BaseModel):
    """Deviation rows with the fitted decay exponent."""

    rows: List[DeviationRow]
    alpha_hat: Optional[float] = None
    stderr: Optional[float] = None
    r_squared: Optional[float] = None
    caveat: str = ALPHA_CAVEAT
    notes: List[str] = []

    def to_markdown(self) -> str:
        """Format table as markdown."""
        lines = [
            "| y | Pi(y) | psi(y) | dev_pi | dev_psi |",
            "|---|---|---|---|---|",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.y:.0e} | {r.pi} | {r.psi:.6f} | {r.dev_pi:.6f} | {r.dev_psi:.6f} |"
            )
        if self.alpha_hat is not None:
            lines.append("")
            lines.append(
                f"**alpha_hat:** {self.alpha_hat:.6f} ± {self.stderr:.2e} (R² {self.r_squared:.4f})"
            )
        lines.extend(["", f"_{self.caveat}_"])
        lines.extend(f"- {note}" for note in self.notes)
        return "\n".join(lines)


def pnt_deviation(
    ys: Sequence[float], table: PrimeTable, threshold: float = DEFAULT_R2_THRESHOLD
) -> DeviationTable:
    """
    Deviations of (log y / y) * Pi(y) and psi(y)/y from 1 along a ladder.

    alpha_hat is minus the slope of log|dev_pi| against log y. Rows with a
    zero deviation are excluded from the fit and noted.

    Raises:
        DomainError: If the ladder is not strictly increasing above 1
        TableTooSmallError: If the ladder exceeds the table
    """
    if any(y <= 1 for y in ys) or any(b <= a for a, b in zip(ys, ys[1:])):
        raise DomainError("Ladder y values must exceed 1 and strictly increase")
    rows = []
    for y in ys:
        pi = prime_pi(y, table)
        psi = chebyshev_psi(y, table)
        rows.append(
            DeviationRow(
                y=float(y),
                pi=pi,
                psi=psi,
                dev_pi=math.log(y) / y * pi - 1.0,
                dev_psi=psi / y - 1.0,
            )
        )

    notes = []
    usable = [r for r in rows if r.dev_pi != 0.0]
    for r in rows:
        if r.dev_pi == 0.0:
            notes.append(f"y={r.y:g} has zero deviation and is excluded from the fit")
    result = DeviationTable(rows=rows, notes=notes)
    try:
        fit = linear_fit(
            np.log([r.y for r in usable]), np.log([abs(r.dev_pi) for r in usable]), threshold
        )
    except FitError as e:
        result.notes.append(f"No exponent fit: {e}")
        return result
    result.alpha_hat = -fit.exponent
    result.stderr = fit.stderr
    result.r_squared = fit.r_squared
    logger.info(f"Deviation fit over {len(usable)} rows: alpha_hat={result.alpha_hat:.4f}")
    return result


class ConservationResult(BaseModel):
    """Solution of the scale conservation law x = {x a**(n log 1/x)} p**(n log X)."""

    s: float
    X: float
    residual: float


def conservation_solve(
    x: float, a: RationalLike | float, p: RationalLike | float, orders: Sequence[int] = (1, 2, 3, 4, 5)
) -> ConservationResult:
    """
    Solve the conservation law for s = log(1/a)/log p and X = x**-s.

    The residual is max over n of n*|log a * log(1/x) + log p * log X|, which
    vanishes identically when the law holds for every n.

    Raises:
        DomainError: If x or a lie outside (0, 1), or p <= 1/a
    """
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    a_q, p_q = parse_rational(a), parse_rational(p)
    if not 0 < a_q < 1:
        raise DomainError(f"a must lie in (0, 1), got {a}")
    if p_q * a_q <= 1:
        raise DomainError(f"Scaling variable p must exceed 1/a = {1 / a_q}, got {p} (s < 1)")
    log_a, log_p = math.log(float(a_q)), math.log(float(p_q))
    log_inv_x = math.log(1.0 / x)
    s = -log_a / log_p
    log_X = s * log_inv_x
    residual = max(n * abs(log_a * log_inv_x + log_p * log_X) for n in orders)
    return ConservationResult(s=s, X=math.exp(log_X), residual=residual)


def conservation_valuation_check(x: float, v: float, Y: float) -> float:
    """
    Residual |v*log(1/x) - log Y| of the valuation form of the conservation law.

    Residuals within four ulps of the compared magnitudes (and of Y
    itself) are reported as 0, so Y = x**-v built by the deformation passes
    exactly.
    """
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    if v < 0:
        raise DomainError(f"v must be non-negative, got {v}")
    if Y < 1:
        raise DomainError(f"Y must be at least 1, got {Y}")
    lhs, rhs = v * math.log(1.0 / x), math.log(Y)
    residual = abs(lhs - rhs)
    if residual <= 4 * (math.ulp(max(abs(lhs), abs(rhs))) + math.ulp(Y) / Y):
        return 0.0
    return residual


class DeformationRoutes(BaseModel):
    """log Y from the Chebyshev route and from the prime counting route."""

    x: float
    log_y_psi: float
    log_y_pi: float
    gap: float


def chebyshev_deformation(x: float, table: PrimeTable) -> DeformationRoutes:
    """
    log Y = x * psi(1/x) against log Y = x * log(1/x) * Pi(1/x).

    Both sums run over p**n < 1/x, so x = 1/2 gives 0 on both routes.
    """
    y = _check_scale(x)
    log_y_psi = x * chebyshev_psi(y, table, strict=True)
    log_y_pi = x * math.log(y) * prime_pi(y, table, strict=True)
    return DeformationRoutes(
        x=x, log_y_psi=log_y_psi, log_y_pi=log_y_pi, gap=abs(log_y_psi - log_y_pi)
    )


def _levels(y: float, table: PrimeTable) -> List[tuple[int, int]]:
    """(p, n) with n the largest level such that p**n < y, for primes p < y."""
    bound = _integer_bound(y, strict=True)
    table.require(bound)
    out = []
    for p in table.primes[: table.count(bound)].tolist():
        n, power = 1, p * p
        while power <= bound:
            n += 1
            power *= p
        out.append((p, n))
    return out


def psi_identity_residual(x: float, table: PrimeTable, m: float = 1.0) -> float:
    """
    Residual of 1 = exp(-m S) * exp(m log_{1/x} Y) with Y from the Chebyshev route.

    S sums v_np * log(1/delta_np) / log(1/x) over p**n < 1/x with the uniform
    values v_np = x/n and delta_np = p**-n. The free exponent m scales both
    factors and cancels.
    """
    y = _check_scale(x)
    log_inv_x = math.log(y)
    s_sum = 0.0
    for p, top in _levels(y, table):
        for n in range(1, top + 1):
            s_sum += (x / n) * (n * math.log(p)) / log_inv_x
    log_y = x * chebyshev_psi(y, table, strict=True)
    return abs(m * (log_y / log_inv_x - s_sum))


class CascadeStep(BaseModel):
    """One inversion y -> 1/y - 1 at a prime."""

    prime: int
    level: int
    delta: float
    threshold: float
    landing: float


class CascadeTrace(BaseModel):
    """Prime-driven inversion cascade starting from y = x."""

    x: float
    steps: List[CascadeStep]
    states: List[float]
    transitions: int
    final_state: float
    accumulated_valuation: float
    log_weight: float

    def to_markdown(self, limit: int = 20) -> str:
        """Format trace as markdown, showing the first `limit` steps."""
        lines = [
            f"**x:** {self.x:g}",
            f"**Transitions:** {self.transitions}",
            f"**Final state:** {self.final_state:.6g}",
            f"**Accumulated valuation:** {self.accumulated_valuation:.8f}",
            f"**Log weight:** {self.log_weight:.6f}",
        ]
        if self.steps:
            lines.extend(["", "| p | n | delta | threshold | landing |", "|---|---|---|---|---|"])
            for step in self.steps[:limit]:
                lines.append(
                    f"| {step.prime} | {step.level} | {step.delta:.4g} | "
                    f"{step.threshold:.6f} | {step.landing:.4g} |"
                )
            if len(self.steps) > limit:
                lines.append(f"| ... {len(self.steps) - limit} more | | | | |")
        return "\n".join(lines)


def inversion_cascade(x: float, table: PrimeTable) -> CascadeTrace:
    """
    Trace the inversion cascade over the primes p < 1/x in increasing order.

    At prime p the state translates linearly up to 1/(1 + delta) with
    delta = p**-n, n the largest level with p**n < 1/x, and inverts to
    1/y - 1 = delta. Each prime costs one transition, so the transition
    count is Pi(1/x) and the valuation x * (transitions + final y) is
    within x of x * Pi(1/x).
    """
    y = _check_scale(x)
    steps = []
    states = [x]
    log_weight = 0.0
    for p, n in _levels(y, table):
        delta = float(p) ** -n
        threshold = 1.0 / (1.0 + delta)
        steps.append(
            CascadeStep(prime=p, level=n, delta=delta, threshold=threshold, landing=delta)
        )
        states.append(delta)
        log_weight += n * math.log(p)
    final = states[-1]
    logger.debug(f"Cascade at x={x:g}: {len(steps)} transitions")
    return CascadeTrace(
        x=x,
        steps=steps,
        states=states,
        transitions=len(steps),
        final_state=final,
        accumulated_valuation=x * (len(steps) + final),
        log_weight=log_weight,
    )
