"""Tests for prime counting, Chebyshev functions and the prime-driven flow."""

import math

import pytest
from sympy import factorint, primepi

from ultrascale.analysis.valuation import deformed_variable
from ultrascale.errors import DomainError, TableTooSmallError
from ultrascale.primes.prime_flow import (
    ALPHA_CAVEAT,
    chebyshev_deformation,
    chebyshev_psi,
    chebyshev_theta,
    conservation_solve,
    conservation_valuation_check,
    inversion_cascade,
    parse_decades,
    pnt_deviation,
    prime_pi,
    psi_identity_residual,
    valuation_growth,
)


def psi_by_enumeration(limit: int) -> list:
    """psi(n) for n = 0..limit, summing log p at every prime power."""
    values = [0.0, 0.0]
    for q in range(2, limit + 1):
        step = 0.0
        p = next(d for d in range(2, q + 1) if q % d == 0)
        m = q
        while m % p == 0:
            m //= p
        if m == 1:
            step = math.log(p)
        values.append(values[-1] + step)
    return values


class TestCounting:
    """Tests for Pi, theta and psi."""

    def test_small_values(self, small_table):
        """Test Pi and psi at 10."""
        assert prime_pi(10, small_table) == 4
        assert prime_pi(1, small_table) == 0
        assert prime_pi(1000, small_table) == 168
        assert chebyshev_psi(10, small_table) == pytest.approx(7.83201, abs=1e-5)
        assert chebyshev_psi(1, small_table) == 0.0

    def test_strict_bounds(self, small_table):
        """Test p < y against p <= y."""
        assert prime_pi(7, small_table, strict=True) == 3
        assert prime_pi(7, small_table) == 4
        assert prime_pi(7.5, small_table, strict=True) == 4
        assert chebyshev_psi(8, small_table, strict=True) == pytest.approx(math.log(2 * 2 * 3 * 5 * 7))

    def test_psi_by_enumeration(self, small_table):
        """Test psi against direct enumeration of prime powers."""
        expected = psi_by_enumeration(2000)
        for n in range(1, 2001):
            assert chebyshev_psi(n, small_table) == pytest.approx(expected[n], abs=1e-9)

    def test_psi_jumps_only_at_prime_powers(self, small_table):
        """Test psi(n) - psi(n-1) is log p at n = p**k and exactly 0 elsewhere."""
        previous = chebyshev_psi(1, small_table)
        for n in range(2, 5001):
            current = chebyshev_psi(n, small_table)
            factors = factorint(n)
            if len(factors) == 1:
                (p,) = factors
                assert current - previous == pytest.approx(math.log(p), abs=1e-9)
            else:
                assert current == previous
            previous = current

    def test_psi_dominates_theta(self, small_table):
        """Test psi >= theta >= 0."""
        for y in (2, 10, 100, 1000, 9999):
            assert chebyshev_psi(y, small_table) >= chebyshev_theta(y, small_table) >= 0

    def test_psi_near_identity(self, prime_table):
        """Test psi(10**6) within one percent of 10**6."""
        assert chebyshev_psi(1e6, prime_table) == pytest.approx(1e6, rel=1e-2)

    def test_pi_matches_primepi(self, prime_table, rng):
        """Test Pi at random bounds against sympy."""
        for y in rng.integers(2, 10**7, size=50):
            assert prime_pi(int(y), prime_table) == int(primepi(int(y)))

    def test_pi_matches_trial_division(self, small_table):
        """Test Pi at every integer up to 10**4 against trial division."""
        count = 0
        for y in range(1, 10**4 + 1):
            if y > 1 and all(y % d for d in range(2, math.isqrt(y) + 1)):
                count += 1
            assert prime_pi(y, small_table) == count

    def test_table_too_small(self, small_table):
        """Test bounds above the table."""
        with pytest.raises(TableTooSmallError):
            prime_pi(1e5, small_table)
        with pytest.raises(TableTooSmallError):
            chebyshev_psi(1e5, small_table)


class TestValuationGrowth:
    """Tests for v = x Pi(1/x)."""

    def test_values(self, prime_table):
        """Test the growth at decimal scales."""
        point = valuation_growth(1e-3, prime_table)
        assert point.count == 168
        assert point.v == pytest.approx(0.168)
        assert point.log_y == pytest.approx(1.16050, abs=1e-5)
        assert valuation_growth(1e-6, prime_table).log_y == pytest.approx(1.08449, abs=1e-4)

    def test_half(self, small_table):
        """Test that no prime lies below 2."""
        assert valuation_growth(0.5, small_table).v == 0.0

    @pytest.mark.parametrize("x", [0.0, 1.0, -0.1])
    def test_domain(self, x, small_table):
        """Test x outside (0, 1)."""
        with pytest.raises(DomainError):
            valuation_growth(x, small_table)


class TestDeviation:
    """Tests for the prime number theorem deviation table."""

    def test_parse_decades(self):
        """Test decade ladders."""
        assert parse_decades("1e2:1e6") == [1e2, 1e3, 1e4, 1e5, 1e6]
        for text in ("1e6:1e2", "2e2:1e6", "1e2", "a:b", "0:1e3"):
            with pytest.raises(DomainError):
                parse_decades(text)

    def test_rows(self, prime_table):
        """Test deviations along 1e2 .. 1e7."""
        table = pnt_deviation(parse_decades("1e2:1e7"), prime_table)
        assert [r.y for r in table.rows] == [1e2, 1e3, 1e4, 1e5, 1e6, 1e7]
        assert table.rows[0].dev_pi == pytest.approx(0.1513, abs=1e-4)
        assert table.rows[1].dev_pi == pytest.approx(0.16050, abs=1e-5)
        assert table.rows[4].dev_pi == pytest.approx(0.08449, abs=1e-4)
        assert table.rows[5].pi == 664579

    def test_decreasing_from_a_thousand(self, prime_table):
        """Test strict decrease of dev_pi from 1e3 on."""
        devs = [r.dev_pi for r in pnt_deviation(parse_decades("1e3:1e7"), prime_table).rows]
        assert all(b < a for a, b in zip(devs, devs[1:]))

    def test_alpha_reported_with_caveat(self, prime_table):
        """Test that alpha_hat is reported but not asserted."""
        table = pnt_deviation(parse_decades("1e3:1e7"), prime_table)
        assert table.alpha_hat is not None
        assert table.alpha_hat > 0
        assert table.caveat == ALPHA_CAVEAT
        assert "alpha_hat" in table.to_markdown()

    def test_single_row_has_no_fit(self, prime_table):
        """Test that one row cannot be fitted."""
        table = pnt_deviation([1e3], prime_table)
        assert table.alpha_hat is None
        assert any("No exponent fit" in note for note in table.notes)

    def test_bad_ladder(self, prime_table):
        """Test non-increasing ladders."""
        with pytest.raises(DomainError):
            pnt_deviation([1e3, 1e2], prime_table)
        with pytest.raises(DomainError):
            pnt_deviation([1.0, 1e2], prime_table)


class TestConservation:
    """Tests for the scale conservation law."""

    def test_solutions(self):
        """Test s and X for exact inputs."""
        result = conservation_solve(0.01, "1/3", 9)
        assert result.s == pytest.approx(0.5)
        assert result.X == pytest.approx(10.0)
        assert result.residual < 1e-12
        result = conservation_solve(0.04, 0.25, 16)
        assert result.s == pytest.approx(0.5)
        assert result.X == pytest.approx(5.0)

    def test_random_grid(self, rng):
        """Test the residual vanishes on random admissible inputs."""
        for _ in range(1000):
            x = float(rng.uniform(1e-6, 0.99))
            a = float(rng.uniform(0.01, 0.99))
            p = float(rng.uniform(1.0 / a + 1e-3, 1.0 / a + 50.0))
            assert conservation_solve(x, a, p).residual < 1e-10

    @pytest.mark.parametrize("x, a, p", [(0.5, "1/3", 3), (0.5, "1/3", 2), (0.5, 1.0, 9), (1.0, "1/3", 9)])
    def test_domain(self, x, a, p):
        """Test p a <= 1 and values outside (0, 1)."""
        with pytest.raises(DomainError):
            conservation_solve(x, a, p)

    def test_valuation_form(self):
        """Test the valuation form of the law."""
        assert conservation_valuation_check(0.01, 0.5, 10.0) == 0.0
        assert conservation_valuation_check(0.3, 0.0, 1.0) == 0.0
        assert conservation_valuation_check(0.01, 0.5, 9.0) == pytest.approx(0.10536, abs=1e-5)

    def test_valuation_form_from_deformation(self, rng):
        """Test Y = x**-v satisfies the law exactly."""
        for _ in range(1000):
            x, v = float(rng.uniform(1e-9, 0.999)), float(rng.uniform(0.0, 1.0))
            assert conservation_valuation_check(x, v, deformed_variable(x, v)) == 0.0

    def test_valuation_form_domain(self):
        """Test bad arguments."""
        with pytest.raises(DomainError):
            conservation_valuation_check(0.5, -0.1, 2.0)
        with pytest.raises(DomainError):
            conservation_valuation_check(0.5, 0.1, 0.5)


class TestChebyshevDeformation:
    """Tests for the two routes to log Y."""

    def test_routes_close(self, prime_table):
        """Test that the Chebyshev route is close to 1 and the routes approach."""
        near = chebyshev_deformation(1e-6, prime_table)
        far = chebyshev_deformation(1e-3, prime_table)
        assert abs(far.log_y_psi - 1.0) < 0.05
        assert abs(near.log_y_psi - 1.0) < 0.01
        assert near.gap < far.gap

    def test_half(self, small_table):
        """Test both routes vanish at x = 1/2."""
        routes = chebyshev_deformation(0.5, small_table)
        assert routes.log_y_psi == 0.0
        assert routes.log_y_pi == 0.0

    @pytest.mark.parametrize("m", [1.0, 2.5, 10.0])
    def test_identity_exponent_cancels(self, small_table, m):
        """Test the identity holds for any exponent m."""
        assert psi_identity_residual(1e-3, small_table, m) < 1e-9


class TestInversionCascade:
    """Tests for the prime-driven inversion cascade."""

    def test_tenth(self, small_table):
        """Test the cascade at x = 0.1."""
        trace = inversion_cascade(0.1, small_table)
        assert trace.transitions == 4
        assert [s.prime for s in trace.steps] == [2, 3, 5, 7]
        assert [s.level for s in trace.steps] == [3, 2, 1, 1]
        assert trace.log_weight == pytest.approx(chebyshev_psi(10, small_table, strict=True))
        assert trace.final_state == pytest.approx(1 / 7)

    def test_no_primes(self, small_table):
        """Test x = 0.9 has no transitions."""
        trace = inversion_cascade(0.9, small_table)
        assert trace.transitions == 0
        assert trace.final_state == 0.9
        assert trace.accumulated_valuation == pytest.approx(0.81)

    def test_matches_growth(self, small_table):
        """Test transitions equal Pi(1/x) and the valuation is within x."""
        x = 1e-3
        trace = inversion_cascade(x, small_table)
        growth = valuation_growth(x, small_table)
        assert trace.transitions == growth.count
        assert abs(trace.accumulated_valuation - growth.v) <= x

    def test_states_and_thresholds(self, small_table):
        """Test landings in (0, 1] and 1/threshold - 1 = delta."""
        trace = inversion_cascade(1e-3, small_table)
        assert all(0 < s <= 1 for s in trace.states)
        for step in trace.steps:
            assert 1 / step.threshold - 1 == pytest.approx(step.delta)
            assert step.prime ** step.level < 1000 <= step.prime ** (step.level + 1)

    def test_markdown_truncates(self, small_table):
        """Test that long traces are shortened."""
        md = inversion_cascade(1e-3, small_table).to_markdown(limit=5)
        assert "163 more" in md
