"""Ultrametric valuation of relative infinitesimals.

The valuation of a family x(delta) of infinitesimals against the scale delta
is the limit of log(delta / x(delta)) / log(1 / delta) as delta -> 0. For the
power-law class x = lam * delta**(1 + l) the raw value at finite delta is
l + log(1/lam) / log(1/delta), exactly linear in 1/log(1/delta), so the
limit is read off as the intercept of a linear fit in that coordinate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ultrascale.errors import ConstraintError, DomainError, NotInfinitesimalError
from ultrascale.fitting import linear_fit
from ultrascale.geometry.fractal_measures import ScaleLadder

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-3
_MONOTONE_NOISE = 1e-9


class Family(Protocol):
    """A family of infinitesimals evaluated in log space."""

    @property
    def verified_class(self) -> bool: ...

    def log_value(self, log_delta: float) -> float: ...


@dataclass(frozen=True)
class InfinitesimalFamily:
    """Power-law infinitesimals x(delta) = lam * delta**(1 + l)."""

    exponent: float
    prefactor: float = 1.0

    verified_class: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not 0 <= self.exponent < 1:
            raise DomainError(f"exponent l must lie in [0,1), got {self.exponent}")
        if not 0 < self.prefactor <= 1:
            raise DomainError(f"prefactor lambda must lie in (0,1], got {self.prefactor}")
        if self.exponent == 0 and self.prefactor == 1:
            raise DomainError("prefactor lambda must be below 1 when l = 0")

    def value(self, delta: float) -> float:
        return self.prefactor * delta ** (1 + self.exponent)

    def log_value(self, log_delta: float) -> float:
        return math.log(self.prefactor) + (1 + self.exponent) * log_delta


@dataclass(frozen=True)
class SumFamily:
    """
    Pointwise sum of two families, scaled by `weight`.

    The default weight 1/2 keeps the sum below delta; a constant multiple
    does not change the valuation.
    """

    first: Family
    second: Family
    weight: float = 0.5

    @property
    def verified_class(self) -> bool:
        return self.first.verified_class and self.second.verified_class

    def log_value(self, log_delta: float) -> float:
        return math.log(self.weight) + float(
            np.logaddexp(self.first.log_value(log_delta), self.second.log_value(log_delta))
        )


@dataclass(frozen=True)
class CallableFamily:
    """Arbitrary x(delta); evaluated at representable delta only."""

    function: Callable[[float], float] = field(compare=False)
    label: str = "callable"

    verified_class: ClassVar[bool] = False

    def log_value(self, log_delta: float) -> float:
        delta = math.exp(log_delta)
        if delta == 0.0:
            raise DomainError(f"Scale exp({log_delta}) underflows; use a shallower ladder")
        value = self.function(delta)
        if not value > 0:
            raise NotInfinitesimalError(f"{self.label} is not positive at delta={delta:.3e}")
        return math.log(value)


class ValuationEstimate(BaseModel):
    """Extrapolated valuation with the raw per-scale values."""

    value: float
    intercept: float
    stderr: float
    log_deltas: List[float]
    residuals: List[float]
    clamped: bool
    monotone: bool
    verified_class: bool

    def to_markdown(self) -> str:
        """Format estimate as markdown."""
        notes = []
        if self.clamped:
            notes.append("clamped to [0, 1]")
        if not self.verified_class:
            notes.append("unverified class")
        if not self.monotone:
            notes.append("non-monotone convergence")
        suffix = f" _({', '.join(notes)})_" if notes else ""
        lines = [
            f"**v** = {self.value:.8f} ± {self.stderr:.1e}{suffix}",
            "",
            "| log delta | raw value |",
            "|---|---|",
        ]
        lines.extend(f"| {d:.4g} | {r:.8f} |" for d, r in zip(self.log_deltas, self.residuals))
        return "\n".join(lines)


def default_ladder() -> ScaleLadder:
    """delta = 10**-2 .. 10**-9."""
    return ScaleLadder.from_exponents(10.0, -2, -9)


def valuate(family: Family, ladder: Optional[ScaleLadder] = None) -> ValuationEstimate:
    """
    Valuation v(x) of a family by extrapolation along a scale ladder.

    Args:
        family: Infinitesimal family (power law, sum, or callable)
        ladder: Scales delta; defaults to 10**-2 .. 10**-9

    Returns:
        ValuationEstimate; the value is clamped into [0, 1]

    Raises:
        NotInfinitesimalError: If x(delta) >= delta at some ladder scale
    """
    ladder = ladder or default_ladder()
    log_deltas = ladder.log_values
    log_values = np.array([family.log_value(float(ld)) for ld in log_deltas])
    if not np.all(log_values < log_deltas):
        bad = float(log_deltas[int(np.argmin(log_values < log_deltas))])
        raise NotInfinitesimalError(f"x(delta) >= delta at delta = exp({bad:.6g})")

    inverse_scale = -log_deltas
    raw = (log_deltas - log_values) / inverse_scale
    fit = linear_fit(1.0 / inverse_scale, raw)
    intercept = fit.intercept
    value = min(max(intercept, 0.0), 1.0)

    distance = np.abs(raw - intercept)
    monotone = bool(np.all(np.diff(distance) <= _MONOTONE_NOISE))
    return ValuationEstimate(
        value=value,
        intercept=intercept,
        stderr=fit.stderr,
        log_deltas=log_deltas.tolist(),
        residuals=raw.tolist(),
        clamped=value != intercept,
        monotone=monotone,
        verified_class=family.verified_class,
    )


VARIANTS = ("constant-a", "cantor-b", "combined", "measure", "series", "thin")


@dataclass(frozen=True)
class ValuationForm:
    """
    Closed parametric forms of the valuation as a function of the scale x.

    constant-a: a*x; cantor-b: b*x**beta; combined: a*x + b*x**beta;
    measure: a*x + b*x*Y with Y = (x_bar/x)**s; series:
    a*x*(1 + sum b_i*x**s_i); thin: b*x**s. The measure variant stores
    a_p, b_p in `a`, `b`.
    """

    variant: str
    a: float = 0.0
    b: float = 0.0
    beta: Optional[float] = None
    s: Optional[float] = None
    x_bar: Optional[float] = None
    coefficients: Tuple[float, ...] = ()
    exponents: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise DomainError(f"Unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.a < 0:
            raise DomainError(f"Coefficient a must be non-negative, got {self.a}")
        if self.variant in ("cantor-b", "combined", "measure", "thin") and not abs(self.b) < 1:
            raise DomainError(f"Coefficient b must satisfy |b| < 1, got {self.b}")
        if self.variant in ("cantor-b", "combined"):
            if self.beta is None or not self.beta > 1:
                raise DomainError(f"Fatness exponent beta must exceed 1, got {self.beta}")
        if self.variant in ("measure", "thin"):
            if self.s is None or not 0 < self.s < 1:
                raise DomainError(f"Dimension s must lie in (0, 1), got {self.s}")
        if self.variant == "measure" and (self.x_bar is None or not self.x_bar > 0):
            raise DomainError(f"x_bar must be positive, got {self.x_bar}")
        if self.variant == "series":
            self._check_series()

    def _check_series(self) -> None:
        if self.a <= 0:
            raise DomainError(f"Series coefficient a must be positive, got {self.a}")
        if len(self.coefficients) != len(self.exponents):
            raise DomainError("Series needs as many coefficients b_i as exponents s_i")
        if any(not abs(b) < 1 for b in self.coefficients):
            raise DomainError("Series coefficients must satisfy |b_i| < 1")
        if any(not 0 < s < 1 for s in self.exponents):
            raise DomainError("Series exponents must lie in (0, 1)")
        if any(s1 <= s2 for s1, s2 in zip(self.exponents, self.exponents[1:])):
            raise DomainError("Series exponents must be strictly decreasing")

    @classmethod
    def constant(cls, a: float) -> "ValuationForm":
        return cls("constant-a", a=a)

    @classmethod
    def cantor(cls, b: float, beta: float) -> "ValuationForm":
        return cls("cantor-b", b=b, beta=beta)

    @classmethod
    def combined(cls, a: float, b: float, beta: float) -> "ValuationForm":
        return cls("combined", a=a, b=b, beta=beta)

    @classmethod
    def measure(cls, a_p: float, b_p: float, s: float, x_bar: float) -> "ValuationForm":
        return cls("measure", a=a_p, b=b_p, s=s, x_bar=x_bar)

    @classmethod
    def series(
        cls, a: float, coefficients: Sequence[float], exponents: Sequence[float]
    ) -> "ValuationForm":
        return cls("series", a=a, coefficients=tuple(coefficients), exponents=tuple(exponents))

    @classmethod
    def thin(cls, b: float, s: float) -> "ValuationForm":
        return cls("thin", b=b, s=s)

    def evaluate(self, x: float) -> float:
        """
        Evaluate the form at x in (0, 1).

        Raises:
            DomainError: If x is outside (0, 1) or Y = (x_bar/x)**s < 1
            ConstraintError: If the evaluated valuation is not positive
        """
        if not 0 < x < 1:
            raise DomainError(f"x must lie in (0, 1), got {x}")
        if self.variant == "constant-a":
            v = self.a * x
        elif self.variant == "cantor-b":
            v = self.b * x**self.beta  # type: ignore[operator]
        elif self.variant == "combined":
            v = self.a * x + self.b * x**self.beta  # type: ignore[operator]
        elif self.variant == "measure":
            assert self.x_bar is not None and self.s is not None
            if self.x_bar < x:
                raise DomainError(f"Y = (x_bar/x)^s must be >= 1; x_bar={self.x_bar} < x={x}")
            y = (self.x_bar / x) ** self.s
            v = self.a * x + self.b * x * y
        elif self.variant == "series":
            v = self.a * x * (1 + sum(b * x**s for b, s in zip(self.coefficients, self.exponents)))
        else:
            v = self.b * x**self.s  # type: ignore[operator]
        if not v > 0:
            raise ConstraintError(f"Valuation must be positive, got v={v} at x={x}")
        return v


def valuation_form_eval(form: ValuationForm, x: float) -> float:
    """Evaluate a closed valuation form at x."""
    return form.evaluate(x)


class ProfileRow(BaseModel):
    """One row of a valuation profile."""

    x: float
    v: float
    deformed: float
    loglog: float


def valuation_profile(form: ValuationForm, ladder: ScaleLadder) -> List[ProfileRow]:
    """
    Tabulate v, Y = x**-v and log log(1/x) along a ladder of x.

    The double-logarithmic column exposes the slow variability of v.
    """
    rows = []
    for x in ladder.values:
        x = float(x)
        if not 0 < x < 1:
            raise DomainError(f"Profile ladder values must lie in (0, 1), got {x}")
        v = form.evaluate(x)
        rows.append(
            ProfileRow(
                x=x,
                v=v,
                deformed=deformed_variable(x, v),
                loglog=math.log(math.log(1.0 / x)),
            )
        )
    return rows


def extended_norm(
    x: float, family: Optional[Family] = None, ladder: Optional[ScaleLadder] = None
) -> float:
    """
    Norm on the extended line: |x| for x != 0, v of the attached family at 0.

    The rule max{|x|, v} = |x| is applied as stated even when v exceeds |x|.
    """
    if x != 0:
        return abs(x)
    if family is None:
        return 0.0
    return valuate(family, ladder).value


class PairResult(BaseModel):
    """Valuations of one pair and of its sum."""

    index: int
    v_first: float
    v_second: float
    v_sum: float
    margin: float
    dominance_error: float
    passed: bool


class UltrametricReport(BaseModel):
    """Outcome of the strong triangle inequality sweep."""

    total: int
    passed: int
    dominant_passed: int
    worst_margin: float
    worst_dominance_error: float
    tolerance: float
    failures: List[PairResult]

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total and self.dominant_passed == self.total

    def to_markdown(self) -> str:
        """Format report as markdown."""
        lines = [
            f"**Pairs:** {self.total}",
            f"**Ultrametric passes:** {self.passed}",
            f"**Dominant-term passes:** {self.dominant_passed}",
            f"**Worst margin:** {self.worst_margin:.3e}",
            f"**Worst dominance error:** {self.worst_dominance_error:.3e}",
        ]
        if self.failures:
            lines.extend(["", "| pair | v1 | v2 | v(sum) | margin |", "|---|---|---|---|---|"])
            for f in self.failures[:20]:
                lines.append(
                    f"| {f.index} | {f.v_first:.6f} | {f.v_second:.6f} | "
                    f"{f.v_sum:.6f} | {f.margin:.2e} |"
                )
        return "\n".join(lines)


def ultrametric_check(
    samples: Sequence[Tuple[Family, Family]],
    ladder: Optional[ScaleLadder] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> UltrametricReport:
    """
    Check v(a + b) <= max(v(a), v(b)) and v(a + b) = min(v(a), v(b)).

    Each pair is valuated along a deep ladder by default, where the
    subdominant term has died out. Failures are report entries.
    """
    ladder = ladder or ScaleLadder.deep()
    passed = dominant = 0
    worst_margin = math.inf
    worst_dominance = 0.0
    failures = []
    for index, (first, second) in enumerate(samples):
        v1 = valuate(first, ladder).value
        v2 = valuate(second, ladder).value
        vs = valuate(SumFamily(first, second), ladder).value
        margin = max(v1, v2) + tolerance - vs
        dominance_error = abs(vs - min(v1, v2))
        ok = margin >= 0
        passed += ok
        dominant += dominance_error < tolerance
        worst_margin = min(worst_margin, margin)
        worst_dominance = max(worst_dominance, dominance_error)
        if not ok or dominance_error >= tolerance:
            failures.append(
                PairResult(
                    index=index,
                    v_first=v1,
                    v_second=v2,
                    v_sum=vs,
                    margin=margin,
                    dominance_error=dominance_error,
                    passed=ok,
                )
            )
    logger.info(f"Ultrametric sweep: {passed}/{len(samples)} pairs pass")
    return UltrametricReport(
        total=len(samples),
        passed=passed,
        dominant_passed=dominant,
        worst_margin=worst_margin if samples else 0.0,
        worst_dominance_error=worst_dominance,
        tolerance=tolerance,
        failures=failures,
    )


def deformed_variable(x: float, v: float) -> float:
    """
    Deformed variable Y = x**-v, computed as exp(v * log(1/x)).

    Raises:
        DomainError: If x is outside (0, 1)
    """
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    return math.exp(v * math.log(1.0 / x))


def infinitesimal_shift(x: float, v: float) -> float:
    """Shift h = v * x * log(1/x), so that log(X/x) = h/x for X = x * x**-v."""
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    return v * x * math.log(1.0 / x)
