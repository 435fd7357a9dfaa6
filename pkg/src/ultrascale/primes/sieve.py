"""Segmented odd-only sieve of Eratosthenes and the immutable prime table."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ultrascale.errors import DomainError, TableTooSmallError

logger = logging.getLogger(__name__)

# Odd numbers per segment
DEFAULT_SEGMENT = 1 << 21
SIEVE_TAG = "segmented-odd-numpy"


def simple_sieve(limit: int) -> np.ndarray:
    """Primes <= limit from a plain boolean sieve; used for base primes."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _segmented_primes(limit: int, segment: int) -> np.ndarray:
    base = simple_sieve(math.isqrt(limit) + 1)[1:]  # odd base primes
    chunks: List[np.ndarray] = [np.array([2], dtype=np.int64)]
    span = 2 * segment
    low = 3
    while low <= limit:
        high = min(low + span, limit + 1)
        mask = np.ones((high - low + 1) // 2, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, (low + p - 1) // p * p)
            if start % 2 == 0:
                start += p
            mask[(start - low) // 2 :: p] = False
        chunks.append(low + 2 * np.flatnonzero(mask).astype(np.int64))
        low = high if high % 2 else high + 1
    return np.concatenate(chunks)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """
    Exactly the primes <= limit, sorted, with prefix sums of log p.

    The arrays are read-only; the table can be shared once built.
    """

    limit: int
    primes: np.ndarray
    built_by: str = SIEVE_TAG
    log_prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        primes = np.asarray(self.primes, dtype=np.int64)
        primes.setflags(write=False)
        prefix = np.concatenate(([0.0], np.cumsum(np.log(primes.astype(float)))))
        prefix.setflags(write=False)
        object.__setattr__(self, "primes", primes)
        object.__setattr__(self, "log_prefix", prefix)

    def __len__(self) -> int:
        return int(self.primes.size)

    def require(self, bound: int) -> None:
        """Raise if the table does not reach `bound`."""
        if bound > self.limit:
            raise TableTooSmallError(
                f"Bound {bound} exceeds the prime table limit {self.limit}; sieve further"
            )

    def count(self, bound: int) -> int:
        """Number of primes <= bound (integer)."""
        self.require(bound)
        return int(np.searchsorted(self.primes, bound, side="right"))

    def log_sum(self, bound: int) -> float:
        """Sum of log p over primes p <= bound (integer)."""
        return float(self.log_prefix[self.count(bound)])


def sieve(limit: int, segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """
    Build the table of primes <= limit.

    Args:
        limit: Largest candidate, at least 2
        segment: Odd numbers per sieve segment

    Returns:
        PrimeTable tagged with the sieve variant

    Raises:
        DomainError: If limit < 2
    """
    if isinstance(limit, bool) or int(limit) != limit or limit < 2:
        raise DomainError(f"Sieve limit must be an integer >= 2, got {limit}")
    if segment < 1:
        raise DomainError(f"Segment size must be positive, got {segment}")
    limit = int(limit)
    primes = _segmented_primes(limit, segment)
    logger.debug(f"Sieved {primes.size} primes up to {limit}")
    return PrimeTable(limit=limit, primes=primes)
