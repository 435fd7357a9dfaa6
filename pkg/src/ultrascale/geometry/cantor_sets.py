"""Thin IFS Cantor sets and fat (variable-gap) Cantor sets as exact covers.

A level-n cover is stored structurally: every level-k interval has the same
length L_k, and the right child of a level-k interval sits at offset
o_k = L_k - L_{k+1} from its left end. Interval i of level n therefore has
left endpoint sum(bit_k(i) * o_k), which keeps counts and measures exact at
any level without enumerating 2**n intervals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from ultrascale.errors import DomainError
from ultrascale.parsing import RationalLike, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_MAX_LEVEL = 40
MAX_ENUMERATED_LEVEL = 22
MAX_ARRAY_LEVEL = 24

Interval = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class IfsSystem:
    """Two-map IFS f_i(x) = a*x + i*(1-a), i in {0, 1}."""

    ratio: Fraction

    def __post_init__(self) -> None:
        a = parse_rational(self.ratio)
        if not 0 < a < Fraction(1, 2):
            raise DomainError(
                f"IFS ratio a must lie in (0, 1/2) for the open set condition, got {a}"
            )
        object.__setattr__(self, "ratio", a)

    @property
    def gap(self) -> Fraction:
        """Relative gap c with 2a + c = 1."""
        return 1 - 2 * self.ratio

    def apply(self, branch: int, x: Fraction) -> Fraction:
        """Apply map f_branch to x."""
        if branch not in (0, 1):
            raise DomainError(f"IFS branch must be 0 or 1, got {branch}")
        return self.ratio * x + branch * (1 - self.ratio)

    @property
    def label(self) -> str:
        return f"thin(a={self.ratio})"


@dataclass(frozen=True)
class GapSchedule:
    """
    Relative gap lengths c_n of a fat Cantor set.

    The gap removed from every level-n interval has relative length c_n.
    `tail` returns an upper bound on sum_{k > n} c_k; a finite bound at
    n = -1 certifies summability, hence a positive limit measure.
    """

    term: Callable[[int], Fraction] = field(compare=False)
    tail: Callable[[int], float] = field(compare=False)
    label: str
    length: Optional[int] = None

    def gap(self, n: int) -> Fraction:
        """Relative gap c_n removed at level n."""
        if n < 0:
            raise DomainError(f"Schedule level must be non-negative, got {n}")
        if self.length is not None and n >= self.length:
            raise DomainError(
                f"Gap schedule {self.label} has only {self.length} terms, level {n} requested"
            )
        c = Fraction(self.term(n))
        if not 0 < c < 1:
            raise DomainError(f"Gap c_{n} must lie in (0, 1), got {c}")
        return c

    def tail_bound(self, n: int) -> float:
        """Upper bound on sum_{k > n} c_k."""
        return float(self.tail(n))

    @property
    def summable(self) -> bool:
        return math.isfinite(self.tail_bound(-1))

    def partial_product(self, n: int) -> Fraction:
        """Exact prod_{k < n} (1 - c_k)."""
        product = Fraction(1)
        for k in range(n):
            product *= 1 - self.gap(k)
        return product

    def limit_measure_bounds(self, n: int) -> Tuple[float, float]:
        """
        Bounds on the limit measure prod_k (1 - c_k) from level n.

        Uses prod_{k >= n} (1 - c_k) >= 1 - sum_{k >= n} c_k.

        Returns:
            (lower, upper) as floats
        """
        upper = self.partial_product(n)
        remaining = self.tail_bound(n - 1)
        lower = float(upper) * max(0.0, 1.0 - remaining)
        return lower, float(upper)

    @classmethod
    def geometric(cls, c0: RationalLike, ratio: RationalLike = Fraction(1, 2)) -> "GapSchedule":
        """Schedule c_n = c0 * ratio**n."""
        first = parse_rational(c0)
        r = parse_rational(ratio)
        if not 0 < first < 1:
            raise DomainError(f"Geometric schedule needs c0 in (0, 1), got {first}")
        if not 0 < r < 1:
            raise DomainError(f"Geometric schedule needs ratio in (0, 1), got {r}")
        return cls(
            term=lambda n: first * r**n,
            tail=lambda n: float(first * r ** (n + 1) / (1 - r)),
            label=f"geometric:{first}" if r == Fraction(1, 2) else f"geometric:{first}:{r}",
        )

    @classmethod
    def from_values(cls, values: Iterable[RationalLike], label: str = "values") -> "GapSchedule":
        """Finite schedule; levels beyond the list are unavailable."""
        terms = tuple(parse_rational(v) for v in values)
        if not terms:
            raise DomainError("Gap schedule needs at least one term")
        for n, c in enumerate(terms):
            if not 0 < c < 1:
                raise DomainError(f"Gap c_{n} must lie in (0, 1), got {c}")
        return cls(
            term=lambda n: terms[n],
            tail=lambda n: float(sum(terms[max(n + 1, 0):], Fraction(0))),
            label=label,
            length=len(terms),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GapSchedule":
        """Read one rational per line; blank lines and '#' comments are skipped."""
        lines = Path(path).read_text().splitlines()
        values = [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("#")]
        return cls.from_values(values, label=f"file:{path}")

    @classmethod
    def parse(cls, text: str) -> "GapSchedule":
        """Parse "geometric:<c0>[:<ratio>]" or "file:<path>"."""
        kind, _, rest = text.partition(":")
        if kind == "geometric" and rest:
            parts = rest.split(":")
            if len(parts) == 1:
                return cls.geometric(parts[0])
            return cls.geometric(parts[0], parts[1])
        if kind == "file" and rest:
            return cls.from_file(rest)
        raise DomainError(f"Unknown schedule {text!r}; use geometric:<c0> or file:<path>")


Provenance = Union[IfsSystem, GapSchedule]


@dataclass(frozen=True)
class CantorApproximation:
    """Level-n closed-interval cover of a thin or fat Cantor set."""

    provenance: Provenance
    lengths: Tuple[Fraction, ...] = (Fraction(1),)

    def __post_init__(self) -> None:
        if not self.lengths or self.lengths[0] != 1:
            raise DomainError("Cover lengths must start with the unit interval")

    @property
    def level(self) -> int:
        return len(self.lengths) - 1

    @property
    def interval_length(self) -> Fraction:
        """Common length L_n of the level-n intervals."""
        return self.lengths[-1]

    @property
    def offsets(self) -> Tuple[Fraction, ...]:
        """Right-child offsets o_k = L_k - L_{k+1}."""
        return tuple(self.lengths[k] - self.lengths[k + 1] for k in range(self.level))

    @property
    def is_thin(self) -> bool:
        return isinstance(self.provenance, IfsSystem)

    @property
    def is_exact(self) -> bool:
        """A Cantor cover only approximates its limit set."""
        return False

    @property
    def resolution(self) -> float:
        return float(self.interval_length)

    def __len__(self) -> int:
        return 2**self.level

    def interval(self, index: int) -> Interval:
        """Exact interval number `index` in left-to-right order."""
        if not 0 <= index < len(self):
            raise DomainError(f"Interval index {index} out of range for level {self.level}")
        left = Fraction(0)
        for k, offset in enumerate(self.offsets):
            if (index >> (self.level - 1 - k)) & 1:
                left += offset
        return left, left + self.interval_length

    @cached_property
    def intervals(self) -> Tuple[Interval, ...]:
        """All level-n intervals, sorted, with exact endpoints."""
        if self.level > MAX_ENUMERATED_LEVEL:
            raise DomainError(
                f"Level {self.level} is too deep to enumerate exactly "
                f"(limit {MAX_ENUMERATED_LEVEL})"
            )
        lefts = [Fraction(0)]
        for offset in self.offsets:
            lefts = [u + d for u in lefts for d in (Fraction(0), offset)]
        length = self.interval_length
        return tuple((u, u + length) for u in lefts)

    def endpoint_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Sorted float arrays of left and right endpoints."""
        if self.level > MAX_ARRAY_LEVEL:
            raise DomainError(
                f"Level {self.level} is too deep for array estimators (limit {MAX_ARRAY_LEVEL})"
            )
        lefts = np.zeros(1)
        for offset in self.offsets:
            lefts = np.stack([lefts, lefts + float(offset)], axis=1).ravel()
        return lefts, lefts + float(self.interval_length)


@dataclass(frozen=True)
class IntervalCover:
    """An explicit finite union of closed intervals that is its own limit set."""

    intervals: Tuple[Interval, ...]

    def __post_init__(self) -> None:
        cleaned = []
        for u, v in self.intervals:
            left, right = parse_rational(u), parse_rational(v)
            if right < left:
                raise DomainError(f"Interval [{left}, {right}] has negative length")
            cleaned.append((left, right))
        if not cleaned:
            raise DomainError("An interval cover needs at least one interval")
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def unit_interval(cls) -> "IntervalCover":
        return cls(((Fraction(0), Fraction(1)),))

    @property
    def is_exact(self) -> bool:
        return True

    @property
    def is_thin(self) -> bool:
        return False

    @property
    def resolution(self) -> float:
        return 0.0

    @property
    def measure(self) -> Fraction:
        """Exact Lebesgue measure of the union."""
        total = Fraction(0)
        reach: Optional[Fraction] = None
        for u, v in sorted(self.intervals):
            if reach is None or u >= reach:
                total += v - u
                reach = v
            elif v > reach:
                total += v - reach
                reach = v
        return total

    def endpoint_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        ordered = sorted(self.intervals)
        lefts = np.array([float(u) for u, _ in ordered])
        rights = np.array([float(v) for _, v in ordered])
        return lefts, rights


Cover = Union[CantorApproximation, IntervalCover]


def build_ifs(a: RationalLike) -> IfsSystem:
    """
    Build the two-map IFS with contraction ratio a.

    Args:
        a: Ratio in (0, 1/2), e.g. "1/3"

    Returns:
        IfsSystem with gap c = 1 - 2a

    Raises:
        DomainError: If a lies outside (0, 1/2)
    """
    return IfsSystem(parse_rational(a))


def refine(approx: CantorApproximation, max_level: int = DEFAULT_MAX_LEVEL) -> CantorApproximation:
    """
    Refine a level-n cover to level n+1.

    Thin sets keep the outer a-fraction of every interval; fat sets remove a
    centered open gap of relative length c_n from every interval.
    """
    n = approx.level
    if n + 1 > max_level:
        raise DomainError(f"Level {n + 1} exceeds the configured maximum {max_level}")
    length = approx.interval_length
    provenance = approx.provenance
    if isinstance(provenance, IfsSystem):
        child = provenance.ratio * length
    else:
        child = length * (1 - provenance.gap(n)) / 2
    return CantorApproximation(provenance, approx.lengths + (child,))


def approximate(
    provenance: Provenance, level: int, max_level: int = DEFAULT_MAX_LEVEL
) -> CantorApproximation:
    """Level-`level` cover of the set generated by `provenance`."""
    if level < 0:
        raise DomainError(f"Level must be non-negative, got {level}")
    if level > max_level:
        raise DomainError(f"Level {level} exceeds the configured maximum {max_level}")
    approx = CantorApproximation(provenance)
    for _ in range(level):
        approx = refine(approx, max_level)
    logger.debug(f"Built {provenance.label} cover at level {level}")
    return approx


def gaps(approx: CantorApproximation) -> list[Interval]:
    """Open gaps (complement of the cover in [0, 1]), sorted."""
    cover = approx.intervals
    return [(cover[i][1], cover[i + 1][0]) for i in range(len(cover) - 1)]


def lebesgue_measure(approx: CantorApproximation) -> Fraction:
    """Exact total length of the level-n cover."""
    return len(approx) * approx.interval_length


def address(approx: CantorApproximation, point: RationalLike) -> Optional[Tuple[int, ...]]:
    """
    Branch digits of the nested cover intervals containing `point`.

    Returns:
        Tuple of n digits in {0, 1}, or None if the point misses the cover
    """
    p = _unit_point(point)
    left = Fraction(0)
    digits = []
    for k, offset in enumerate(approx.offsets):
        child = approx.lengths[k + 1]
        if left <= p <= left + child:
            digits.append(0)
        elif left + offset <= p <= left + offset + child:
            digits.append(1)
            left += offset
        else:
            return None
    return tuple(digits)


def contains(approx: CantorApproximation, point: RationalLike) -> bool:
    """
    Membership of `point` in the level-n cover.

    Raises:
        DomainError: If the point lies outside [0, 1]
    """
    return address(approx, point) is not None


def cantor_ultrametric(
    approx: CantorApproximation, x: RationalLike, y: RationalLike
) -> Fraction:
    """
    Natural ultrametric of the Cantor set at the resolution of `approx`.

    The distance is the length of the smallest cover interval holding both
    points; distinct points sharing a level-n interval are L_n apart.
    """
    px, py = _unit_point(x), _unit_point(y)
    ax, ay = address(approx, px), address(approx, py)
    if ax is None or ay is None:
        raise DomainError("Both points must lie in the cover")
    if px == py:
        return Fraction(0)
    common = 0
    for dx, dy in zip(ax, ay):
        if dx != dy:
            break
        common += 1
    return approx.lengths[common]


def _unit_point(point: RationalLike) -> Fraction:
    p = parse_rational(point)
    if not 0 <= p <= 1:
        raise DomainError(f"Point must lie in [0, 1], got {p}")
    return p
