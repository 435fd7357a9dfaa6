"""Tests for the segmented sieve and the prime table."""

import numpy as np
import pytest
from sympy import primepi

from ultrascale.errors import DomainError, TableTooSmallError
from ultrascale.primes.sieve import simple_sieve, sieve


def is_prime_by_trial_division(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class TestSieve:
    """Tests for sieve construction."""

    def test_small_limits(self):
        """Test the smallest tables."""
        assert sieve(2).primes.tolist() == [2]
        assert sieve(10).primes.tolist() == [2, 3, 5, 7]
        assert sieve(11).primes.tolist() == [2, 3, 5, 7, 11]

    @pytest.mark.parametrize("limit", [1, 0, -5, 2.5])
    def test_bad_limit(self, limit):
        """Test limits below 2 or non-integral."""
        with pytest.raises(DomainError):
            sieve(limit)

    def test_segments_agree_with_plain_sieve(self):
        """Test that tiny segments reproduce the plain sieve across boundaries."""
        for segment in (1, 7, 64, 1000):
            np.testing.assert_array_equal(sieve(10**4, segment=segment).primes, simple_sieve(10**4))

    @pytest.mark.parametrize("limit", [10**3, 10**4 + 7, 10**5, 999_983])
    def test_counts_match_primepi(self, limit):
        """Test table size against sympy's prime counting."""
        assert len(sieve(limit)) == int(primepi(limit))

    def test_million(self):
        """Test the count below one million."""
        assert len(sieve(10**6)) == 78498

    def test_entries_are_prime(self, prime_table, rng):
        """Test random table entries by trial division."""
        for index in rng.integers(0, len(prime_table), size=1000):
            assert is_prime_by_trial_division(int(prime_table.primes[index]))

    def test_composites_absent(self, small_table, rng):
        """Test that random composites are not in the table."""
        members = set(small_table.primes.tolist())
        for n in rng.integers(2, small_table.limit + 1, size=2000):
            assert (int(n) in members) == is_prime_by_trial_division(int(n))


class TestPrimeTable:
    """Tests for the immutable table."""

    def test_read_only(self, small_table):
        """Test that the arrays cannot be written."""
        with pytest.raises(ValueError):
            small_table.primes[0] = 4
        with pytest.raises(ValueError):
            small_table.log_prefix[1] = 0.0

    def test_tag(self, small_table):
        """Test the sieve variant tag."""
        assert small_table.built_by == "segmented-odd-numpy"

    def test_count_and_log_sum(self, small_table):
        """Test counts and log sums at small bounds."""
        assert small_table.count(10) == 4
        assert small_table.count(1) == 0
        assert small_table.log_sum(10) == pytest.approx(np.log(210.0))

    def test_require(self, small_table):
        """Test bounds above the limit."""
        with pytest.raises(TableTooSmallError):
            small_table.count(10**4 + 1)
