"""Box-counting dimension, neighborhood measure and fatness exponents of covers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ultrascale.errors import DomainError, LadderError, PrecisionError
from ultrascale.fitting import DEFAULT_R2_THRESHOLD, ExponentEstimate, linear_fit
from ultrascale.geometry.cantor_sets import (
    CantorApproximation,
    Cover,
    GapSchedule,
    IntervalCover,
)
from ultrascale.parsing import RationalLike, parse_rational

logger = logging.getLogger(__name__)

# Largest snap tolerance for box indices at grid-aligned endpoints, in box units
_GRID_TOLERANCE = 1e-9

MIN_LADDER_POINTS = 4


@dataclass(frozen=True)
class ScaleLadder:
    """
    Strictly decreasing geometric ladder of scales in (0, 1].

    Stored in log space so ladders may reach below float underflow; only
    the valuation uses such deep ladders.
    """

    log_start: float
    log_ratio: float
    count: int

    def __post_init__(self) -> None:
        if self.count < MIN_LADDER_POINTS:
            raise DomainError(
                f"A scale ladder needs at least {MIN_LADDER_POINTS} points, got {self.count}"
            )
        if self.log_start > 0:
            raise DomainError("Ladder values must lie in (0, 1]")
        if not self.log_ratio < 0:
            raise DomainError("Ladder ratio must lie in (0, 1)")

    @property
    def log_values(self) -> np.ndarray:
        return self.log_start + self.log_ratio * np.arange(self.count)

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)

    @property
    def start(self) -> float:
        return math.exp(self.log_start)

    @classmethod
    def geometric(
        cls, ratio: RationalLike | float, count: int, start: RationalLike | float = 1
    ) -> "ScaleLadder":
        """Ladder start * ratio**i for i < count."""
        r = float(parse_rational(ratio))
        s = float(parse_rational(start))
        if not 0 < r < 1:
            raise DomainError(f"Ladder ratio must lie in (0, 1), got {r}")
        if not 0 < s <= 1:
            raise DomainError(f"Ladder start must lie in (0, 1], got {s}")
        return cls(math.log(s), math.log(r), count)

    @classmethod
    def from_exponents(cls, base: float, first: int, last: int, step: int = -1) -> "ScaleLadder":
        """Ladder base**e for e = first, first+step, ..., last."""
        if base <= 1:
            raise DomainError(f"Ladder base must exceed 1, got {base}")
        if step >= 0 or last > first or (first - last) % -step:
            raise DomainError(f"Exponents {first}..{last} step {step} do not form a descending ladder")
        count = (last - first) // step + 1
        return cls(first * math.log(base), step * math.log(base), count)

    @classmethod
    def parse(cls, text: str) -> "ScaleLadder":
        """
        Parse a CLI ladder.

        "q:k" gives q**-1 .. q**-k; "base:first:last[:step]" gives
        base**first .. base**last.
        """
        parts = text.split(":")
        try:
            if len(parts) == 2:
                q = parse_rational(parts[0])
                if q <= 1:
                    raise DomainError(f"Ladder base must exceed 1, got {q}")
                return cls.geometric(1 / q, int(parts[1]), start=1 / q)
            if len(parts) in (3, 4):
                step = int(parts[3]) if len(parts) == 4 else -1
                return cls.from_exponents(float(parts[0]), int(parts[1]), int(parts[2]), step)
        except ValueError as e:
            raise DomainError(f"Cannot parse ladder {text!r}: {e}") from e
        raise DomainError(f"Cannot parse ladder {text!r}; use q:k or base:first:last")

    @classmethod
    def deep(cls, count: int = 8) -> "ScaleLadder":
        """Scales 10**-(10**4) downward, far below float range."""
        return cls(-1e4 * math.log(10.0), -1e7 * math.log(10.0), count)


def _check_resolution(cover: Cover, ladder: ScaleLadder) -> None:
    smallest = float(ladder.values.min())
    if not cover.is_exact and not cover.resolution < smallest:
        raise PrecisionError(
            f"Cover resolution {cover.resolution:.3e} is not below the smallest "
            f"scale {smallest:.3e}; refine the cover"
        )


def _union_length(lo: np.ndarray, hi: np.ndarray) -> float:
    # lo must be sorted ascending
    reach = np.maximum.accumulate(hi)
    first = hi[0] - lo[0]
    rest = np.maximum(hi[1:] - np.maximum(lo[1:], reach[:-1]), 0.0)
    return float(first + rest.sum())


def _snap_tolerance(lefts: np.ndarray, rights: np.ndarray, eps: float) -> float:
    # At most a quarter of the shortest interval, in box units
    lengths = rights - lefts
    positive = lengths[lengths > 0]
    if positive.size == 0:
        return _GRID_TOLERANCE
    return min(_GRID_TOLERANCE, 0.25 * float(positive.min()) / eps)


def _box_count(lefts: np.ndarray, rights: np.ndarray, eps: float) -> int:
    tolerance = _snap_tolerance(lefts, rights, eps)
    lo = np.floor(lefts / eps + tolerance).astype(np.int64)
    hi = np.ceil(rights / eps - tolerance).astype(np.int64)
    hi = np.maximum(hi, lo + 1)
    reach = np.maximum.accumulate(hi)
    first = int(hi[0] - lo[0])
    rest = np.maximum(hi[1:] - np.maximum(lo[1:], reach[:-1]), 0)
    return first + int(rest.sum())


def box_counts(cover: Cover, ladder: ScaleLadder) -> np.ndarray:
    """
    Number of grid boxes [k*eps, (k+1)*eps) meeting the cover, per ladder scale.

    An interval meets a box when the intersection has positive length or the
    box holds the interval's left endpoint.
    """
    _check_resolution(cover, ladder)
    lefts, rights = cover.endpoint_arrays()
    counts = np.array([_box_count(lefts, rights, float(eps)) for eps in ladder.values])
    logger.debug(f"Box counts over {ladder.count} scales: {counts.tolist()}")
    return counts


def box_count_dimension(
    cover: Cover, ladder: ScaleLadder, threshold: float = DEFAULT_R2_THRESHOLD
) -> ExponentEstimate:
    """
    Box-counting dimension: slope of log N(eps) against log(1/eps).

    Raises:
        PrecisionError: If the cover is not finer than every ladder scale
        FitError: If the fit is degenerate
    """
    counts = box_counts(cover, ladder)
    return linear_fit(-ladder.log_values, np.log(counts), threshold)


def neighborhood_measure(cover: Cover, eps: float, clip: bool = True) -> float:
    """
    Lebesgue measure of the open eps-neighborhood of the cover.

    Args:
        cover: Cantor approximation or explicit interval cover
        eps: Dilation radius, positive
        clip: Restrict the neighborhood to [0, 1]

    Returns:
        Measure of the merged dilated intervals
    """
    if not eps > 0:
        raise DomainError(f"Neighborhood radius must be positive, got {eps}")
    lefts, rights = cover.endpoint_arrays()
    lo, hi = lefts - eps, rights + eps
    if clip:
        lo, hi = np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)
    return _union_length(lo, hi)


def default_limit_measure(cover: Cover) -> float:
    """Limit measure used as baseline by the fatness estimator."""
    if isinstance(cover, IntervalCover):
        return float(cover.measure)
    if isinstance(cover.provenance, GapSchedule):
        lower, _ = cover.provenance.limit_measure_bounds(cover.level)
        return lower
    return 0.0


def fatness_exponent(
    cover: Cover,
    ladder: ScaleLadder,
    limit_measure: Optional[float] = None,
    threshold: float = DEFAULT_R2_THRESHOLD,
) -> ExponentEstimate:
    """
    Fatness (uncertainty) exponent beta from the excess neighborhood measure.

    Fits log(m(eps-neighborhood) - m) against log eps. The neighborhood is not
    clipped to [0, 1], so the outer ends count toward the exterior measure.
    For a thin s-set the exponent approaches 1 - s.

    Raises:
        LadderError: If the excess measure is not positive at some scale
    """
    _check_resolution(cover, ladder)
    m = default_limit_measure(cover) if limit_measure is None else limit_measure
    excess = np.array(
        [neighborhood_measure(cover, float(eps), clip=False) - m for eps in ladder.values]
    )
    if np.any(excess <= 0):
        bad = float(ladder.values[int(np.argmax(excess <= 0))])
        raise LadderError(f"Excess measure is not positive at eps={bad:.3e} (limit m={m})")
    logger.debug(f"Excess measures: {excess.tolist()}")
    return linear_fit(ladder.log_values, np.log(excess), threshold)


def local_measure_scaling(
    cover: Cover,
    ladder: ScaleLadder,
    s0: Optional[float] = None,
    threshold: float = DEFAULT_R2_THRESHOLD,
) -> ExponentEstimate:
    """
    Scaling exponent of the measure of the set inside [0, x] as x -> 0.

    The proxy is (cover length inside [0, x] / L_n) * L_n**s0, the number of
    level-n intervals in [0, x] weighted by their s0-dimensional size. s0
    defaults to the box-counting dimension over the same ladder.
    """
    if isinstance(cover, CantorApproximation) and not cover.is_thin:
        raise DomainError("Local measure scaling needs a thin approximation")
    if s0 is None:
        s0 = box_count_dimension(cover, ladder, threshold).exponent
    else:
        _check_resolution(cover, ladder)
    lefts, rights = cover.endpoint_arrays()
    unit = 1.0 if cover.is_exact else cover.resolution
    proxies = []
    for x in ladder.values:
        inside = float(np.clip(np.minimum(rights, x) - lefts, 0.0, None).sum())
        proxies.append(inside / unit * unit**s0)
    proxy = np.array(proxies)
    if np.any(proxy <= 0):
        raise LadderError("Cover has no measure near 0 at some ladder scale")
    return linear_fit(ladder.log_values, np.log(proxy), threshold)
