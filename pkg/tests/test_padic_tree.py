"""Tests for p-adic valuations, expansions, the Monna map and ultrametric trees."""

import math
from fractions import Fraction as F
from itertools import product

import pytest
from sympy import primerange

from ultrascale.analysis.padic_tree import (
    PadicNumber,
    TailPolicy,
    build_tree,
    default_monna_ratio,
    digit_tree,
    monna_map,
    padic_expand,
    padic_norm,
    padic_valuation,
    sup_norm,
)
from ultrascale.errors import ConvergenceError, DomainError
from ultrascale.geometry.cantor_sets import approximate, build_ifs, contains


class TestPadicValuation:
    """Tests for order and norm."""

    def test_known_values(self):
        """Test v_2(12) = 2 and |12|_2 = 1/4."""
        result = padic_valuation(12, 2)
        assert result.order == 2
        assert result.norm == F(1, 4)

    @pytest.mark.parametrize("p", [2, 3, 5, 7, 97])
    @pytest.mark.parametrize("n", [0, 1, 5])
    def test_prime_powers(self, p, n):
        """Test v_p(p**n) = n."""
        assert padic_valuation(p**n, p).order == n
        assert padic_norm(p**n, p) == F(1, p**n)

    def test_rational(self):
        """Test a negative order."""
        result = padic_valuation(F(3, 8), 2)
        assert result.order == -3
        assert result.norm == 8

    def test_zero(self):
        """Test the conventions at zero."""
        result = padic_valuation(0, 5)
        assert result.order == math.inf
        assert result.norm == 0
        assert "+inf" in result.to_markdown()

    def test_sign_ignored(self):
        """Test |-q|_p = |q|_p."""
        assert padic_norm(-18, 3) == padic_norm(18, 3) == F(1, 9)

    @pytest.mark.parametrize("p", [1, 4, 0, -3])
    def test_non_prime(self, p):
        """Test that p must be prime."""
        with pytest.raises(DomainError):
            padic_valuation(12, p)

    def test_serialized_as_rational_strings(self):
        """Test n/d serialization of q and the norm."""
        dumped = padic_valuation(F(3, 8), 2).model_dump()
        assert dumped["q"] == "3/8"
        assert dumped["norm"] == "8/1"

    def test_multiplicative(self, rng):
        """Test |ab|_p = |a|_p |b|_p on random rationals."""
        for _ in range(1000):
            num = [int(v) for v in rng.integers(1, 10**6, size=2)]
            den = [int(v) for v in rng.integers(1, 10**3, size=2)]
            a, b = F(num[0], den[0]), F(num[1], den[1])
            p = int(rng.choice([2, 3, 5, 7]))
            assert padic_norm(a * b, p) == padic_norm(a, p) * padic_norm(b, p)

    def test_strong_triangle(self, rng):
        """Test |a + b|_p <= max(|a|_p, |b|_p)."""
        for _ in range(1000):
            a, b = (int(v) for v in rng.integers(-(10**6), 10**6, size=2))
            p = int(rng.choice([2, 3, 5, 7]))
            assert padic_norm(a + b, p) <= max(padic_norm(a, p), padic_norm(b, p))


class TestPadicExpansion:
    """Tests for truncated p-adic expansions."""

    def test_minus_one(self):
        """Test -1 = 1 + 2 + 4 + ... in Z_2."""
        number = padic_expand(-1, 2, 5)
        assert number.order == 0
        assert number.digits == (1, 1, 1, 1, 1)

    def test_integer(self):
        """Test 12 = 4 * (1 + 2)."""
        number = padic_expand(12, 2, 4)
        assert number.order == 2
        assert number.digits == (1, 1, 0, 0)
        assert number.to_rational() == 12
        assert number.integer_digits(4) == (0, 0, 1, 1)

    def test_third(self):
        """Test 1/3 = 11 mod 16 in Z_2."""
        assert padic_expand(F(1, 3), 2, 4).digits == (1, 1, 0, 1)

    def test_truncation_congruence(self, rng):
        """Test that the truncation agrees with q modulo p**(order + depth)."""
        for _ in range(200):
            q = F(int(rng.integers(-(10**5), 10**5)) or 1, int(rng.integers(1, 200)))
            p = int(rng.choice([2, 3, 5]))
            number = padic_expand(q, p, 8)
            assert padic_norm(q - number.to_rational(), p) <= F(1, p ** (number.order + 8))

    def test_not_integral(self):
        """Test that negative orders have no integer digits."""
        with pytest.raises(DomainError):
            padic_expand(F(1, 2), 2, 4).integer_digits(4)

    def test_invalid_digits(self):
        """Test digit and leading-digit validation."""
        with pytest.raises(DomainError):
            PadicNumber(p=3, order=0, digits=(3,))
        with pytest.raises(DomainError):
            PadicNumber(p=3, order=0, digits=(0, 1))


class TestMonnaMap:
    """Tests for the Monna map onto Cantor sets."""

    def test_values(self):
        """Test simple images in the middle-thirds set."""
        assert monna_map(()) == 0
        assert monna_map((0, 0, 0)) == 0
        assert monna_map((1,)) == F(2, 3)
        assert monna_map((0, 1)) == F(2, 9)
        assert monna_map((1,) * 30) == 1 - F(1, 3**30)

    def test_images_in_cover(self):
        """Test that every image lies in the middle-thirds cover."""
        cover = approximate(build_ifs("1/3"), 10)
        for digits in product((0, 1), repeat=10):
            assert contains(cover, monna_map(digits))

    def test_injective(self):
        """Test distinct digit streams have distinct images."""
        images = {monna_map(d) for d in product((0, 1), repeat=10)}
        assert len(images) == 1024

    def test_continuity(self, rng):
        """Test streams agreeing on n digits map within 3**-n."""
        for _ in range(200):
            n = int(rng.integers(1, 12))
            head = tuple(int(d) for d in rng.integers(0, 2, size=n))
            tail1 = tuple(int(d) for d in rng.integers(0, 2, size=8))
            tail2 = tuple(int(d) for d in rng.integers(0, 2, size=8))
            assert abs(monna_map(head + tail1) - monna_map(head + tail2)) <= F(1, 3**n)

    def test_other_prime(self):
        """Test p = 3 defaults onto the ratio-1/4 set."""
        assert default_monna_ratio(3) == F(1, 4)
        assert monna_map((2,), p=3) == F(3, 4)
        assert monna_map((2, 2, 2), p=3) == 1 - F(1, 4**3)
        assert monna_map((2,), p=3, a=F(1, 3)) == F(2, 3)

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_default_target_leaves_gaps(self, p):
        """Test images for general p split into p first-level blocks with open gaps between."""
        a = default_monna_ratio(p)
        step = (1 - a) / (p - 1)
        assert step > a
        images = {monna_map(digits, p) for digits in product(range(p), repeat=4)}
        assert len(images) == p**4
        for digits in product(range(p), repeat=4):
            offset = monna_map(digits, p) - digits[0] * step
            assert 0 <= offset < a

    def test_prime_five_accepted(self):
        """Test p = 5 uses ratio 1/6 by default."""
        assert monna_map((1, 2), 5) == F(5, 18)

    def test_domain(self):
        """Test digit range and the ratio bound."""
        with pytest.raises(DomainError):
            monna_map((2,))
        with pytest.raises(DomainError):
            monna_map((1,), p=2, a=F(3, 5))


class TestUltrametricTree:
    """Tests for prime trees and digit tries."""

    def test_prime_branches_sorted(self):
        """Test branches in increasing prime order."""
        tree = build_tree([(3, 0.3), (2, 0.5)])
        assert tree.label == "0"
        assert [c.label for c in tree.children] == ["2", "3"]
        assert tree.payloads() == [0.5, 0.3]
        assert tree.depth == 1

    def test_empty(self):
        """Test the empty tree."""
        tree = build_tree([])
        assert tree.breadth == 0
        assert tree.depth == 0

    @pytest.mark.parametrize(
        "components", [[(2, 0.5), (2, 0.1)], [(4, 0.5)], [(2, -0.1)], [(3, math.inf)]]
    )
    def test_invalid_components(self, components):
        """Test duplicates, non-primes and bad payloads."""
        with pytest.raises(DomainError):
            build_tree(components)

    def test_many_primes(self, rng):
        """Test payload preservation over 100 primes."""
        primes = list(primerange(2, 600))[:100]
        values = rng.uniform(0.0, 1.0, size=100).tolist()
        components = list(zip(primes, values))
        shuffled = [components[i] for i in rng.permutation(100)]
        tree = build_tree(shuffled)
        assert tree.breadth == 100
        assert [int(c.label) for c in tree.children] == primes
        assert sorted(tree.payloads()) == sorted(values)

    def test_exports(self):
        """Test text and nested exports."""
        tree = build_tree([(2, 0.5)])
        assert tree.to_nested() == ["0", 0.0, [["2", 0.5, []]]]
        assert tree.to_text().splitlines() == ["0 [0]", "  2 [0.5]"]

    def test_digit_tree_balls(self):
        """Test that lowest common ancestors carry |a - b|_p."""
        numbers = [padic_expand(k, 2, 4) for k in (1, 3, 5)]
        tree = digit_tree(numbers)
        (one,) = tree.children
        assert one.label == "1"
        assert one.payload == 0.5
        assert [c.label for c in one.children] == ["1.0", "1.1"]
        ball = one.children[0]
        assert ball.payload == float(padic_norm(1 - 5, 2))
        assert one.payload == float(padic_norm(1 - 3, 2))

    def test_digits_under_prime_branch(self):
        """Test attaching digit tries to a prime branch."""
        numbers = [padic_expand(k, 2, 3) for k in (1, 3)]
        tree = build_tree([(2, 0.5), (3, 0.1)], digits={2: numbers})
        branch = tree.children[0]
        assert branch.payload == 0.5
        assert [c.label for c in branch.children] == ["2.1"]
        assert tree.children[1].children == []

    def test_digit_tree_mixed_primes(self):
        """Test that one trie holds one prime."""
        with pytest.raises(DomainError):
            digit_tree([padic_expand(1, 2, 3), padic_expand(1, 3, 3)])


class TestSupNorm:
    """Tests for the sup-norm of component vectors."""

    def test_max(self):
        """Test the maximum of listed components."""
        assert sup_norm([(2, 0.5), (3, 0.3), (5, 0.1)]) == 0.5

    def test_zero(self):
        """Test the zero vector and the empty vector."""
        assert sup_norm([(2, 0.0), (3, 0.0)]) == 0.0
        assert sup_norm([]) == 0.0

    def test_homogeneous(self):
        """Test sup(mu v) = mu sup(v)."""
        components = [(2, 0.5), (3, 0.3)]
        scaled = [(p, 3 * v) for p, v in components]
        assert sup_norm(scaled) == pytest.approx(3 * sup_norm(components))

    def test_non_vanishing_tail(self):
        """Test that a constant tail violates convergence."""
        with pytest.raises(ConvergenceError):
            sup_norm([(2, 0.5)], TailPolicy.constant(0.2))

    def test_tail_bound_above_max(self):
        """Test that a dominating tail bound cannot be certified."""
        with pytest.raises(ConvergenceError):
            sup_norm([(2, 0.1)], TailPolicy(bound=0.2))
        assert sup_norm([(2, 0.5)], TailPolicy(bound=0.2)) == 0.5
