"""p-adic valuations, the Monna map onto Cantor sets, and ultrametric trees over primes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_serializer
from sympy import isprime, multiplicity

from ultrascale.errors import ConvergenceError, DomainError
from ultrascale.parsing import RationalLike, format_rational, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_PRIME = 2
ROOT_LABEL = "0"


def _check_prime(p: int) -> None:
    if isinstance(p, bool) or not isinstance(p, int) or not isprime(p):
        raise DomainError(f"p must be a prime, got {p!r}")


class PadicValuation(BaseModel):
    """Order and norm of a rational at a prime."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: Fraction
    p: int
    order: Union[int, float]
    norm: Fraction

    @field_serializer("q", "norm")
    def _serialize_rational(self, value: Fraction) -> str:
        return format_rational(value)

    def to_markdown(self) -> str:
        """Format valuation as markdown."""
        order = "+inf" if self.order == math.inf else str(self.order)
        return (
            f"**v_{self.p}({format_rational(self.q)})** = {order}, "
            f"**|q|_{self.p}** = {format_rational(self.norm)}"
        )


def padic_valuation(q: RationalLike, p: int) -> PadicValuation:
    """
    p-adic order of a rational and its norm p**-order.

    Zero has order +inf and norm 0.

    Raises:
        DomainError: If p is not prime
    """
    _check_prime(p)
    value = parse_rational(q)
    if value == 0:
        return PadicValuation(q=value, p=p, order=math.inf, norm=Fraction(0))
    order = int(multiplicity(p, abs(value.numerator))) - int(multiplicity(p, value.denominator))
    return PadicValuation(q=value, p=p, order=order, norm=Fraction(p) ** -order)


def padic_norm(q: RationalLike, p: int) -> Fraction:
    """|q|_p as an exact rational."""
    return padic_valuation(q, p).norm


@dataclass(frozen=True)
class PadicNumber:
    """
    Truncated p-adic number p**order * (d0 + d1*p + d2*p**2 + ...).

    Digits are little-endian; the leading unit digit d0 is nonzero unless
    the number is zero. Only len(digits) unit digits are known.
    """

    p: int
    order: int
    digits: Tuple[int, ...]

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if any(not 0 <= d < self.p for d in self.digits):
            raise DomainError(f"Digits must lie in [0, {self.p - 1}], got {self.digits}")
        if self.digits and self.digits[0] == 0 and any(self.digits):
            raise DomainError("Leading unit digit must be nonzero for a nonzero number")

    @property
    def is_zero(self) -> bool:
        return not any(self.digits)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def norm(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.p) ** -self.order

    def integer_digits(self, depth: int) -> Tuple[int, ...]:
        """
        First `depth` digits of the number as a p-adic integer.

        Raises:
            DomainError: If the number is not integral or too few digits are known
        """
        if self.is_zero:
            return (0,) * depth
        if self.order < 0:
            raise DomainError(f"Order {self.order} < 0: not a p-adic integer")
        stream = (0,) * self.order + self.digits
        if len(stream) < depth:
            raise DomainError(f"Only {len(stream)} digits known, {depth} requested")
        return stream[:depth]

    def to_rational(self) -> Fraction:
        """Rational value of the truncation."""
        unit = sum(d * self.p**k for k, d in enumerate(self.digits))
        return Fraction(self.p) ** self.order * unit


def padic_expand(q: RationalLike, p: int, depth: int) -> PadicNumber:
    """
    Order and first `depth` unit digits of a rational in Q_p.

    The unit part u = q / p**order has denominator prime to p; its digits
    are those of u mod p**depth, computed with a modular inverse.
    """
    _check_prime(p)
    if depth < 1:
        raise DomainError(f"Depth must be positive, got {depth}")
    value = parse_rational(q)
    if value == 0:
        return PadicNumber(p=p, order=0, digits=(0,) * depth)
    order = int(padic_valuation(value, p).order)
    unit = value / Fraction(p) ** order
    modulus = p**depth
    residue = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
    digits = []
    for _ in range(depth):
        residue, digit = divmod(residue, p)
        digits.append(digit)
    return PadicNumber(p=p, order=order, digits=tuple(digits))


def default_monna_ratio(p: int) -> Fraction:
    """Target ratio 1/(p+1): the middle-thirds set for p = 2."""
    _check_prime(p)
    return Fraction(1, p + 1)


def monna_map(
    digits: Sequence[int], p: int = DEFAULT_PRIME, a: Optional[RationalLike] = None
) -> Fraction:
    """
    Monna map of a truncated p-adic integer onto a Cantor set.

    xi(sum d_k p**k) = sum d_k * (1 - a)/(p - 1) * a**k. For p = 2 and
    a = 1/3 this is sum 2*d_k / 3**(k+1), the middle-thirds set.

    Args:
        digits: Little-endian digits in [0, p-1]
        p: Prime
        a: Contraction ratio of the target set, p*a <= 1; defaults to
            1/(p+1)

    Raises:
        DomainError: If a digit is out of range or p*a > 1
    """
    _check_prime(p)
    ratio = default_monna_ratio(p) if a is None else parse_rational(a)
    if not 0 < ratio or p * ratio > 1:
        raise DomainError(f"Target ratio must satisfy 0 < a <= 1/p, got a={ratio} for p={p}")
    if any(not 0 <= d < p for d in digits):
        raise DomainError(f"Digits must lie in [0, {p - 1}], got {list(digits)}")
    weight = (1 - ratio) / (p - 1)
    value = Fraction(0)
    for d in digits:
        value += d * weight
        weight *= ratio
    return value


class UltrametricTreeNode(BaseModel):
    """
    Node of a rooted ultrametric tree.

    Prime branches carry the component valuation as payload; digit
    branches carry the diameter p**-k of their p-adic ball.
    """

    label: str
    payload: float = 0.0
    children: List["UltrametricTreeNode"] = []

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=-1)

    @property
    def breadth(self) -> int:
        return len(self.children)

    def payloads(self) -> List[float]:
        """Payloads of all descendants, depth first."""
        out = []
        for child in self.children:
            out.append(child.payload)
            out.extend(child.payloads())
        return out

    def to_text(self, indent: int = 0) -> str:
        """Indented text export."""
        lines = [f"{'  ' * indent}{self.label} [{self.payload:.6g}]"]
        lines.extend(child.to_text(indent + 1) for child in self.children)
        return "\n".join(lines)

    def to_nested(self) -> list:
        """Nested [label, payload, children] export."""
        return [self.label, self.payload, [child.to_nested() for child in self.children]]


UltrametricTreeNode.model_rebuild()


def digit_tree(
    numbers: Sequence[PadicNumber], depth: Optional[int] = None, prefix: str = ""
) -> UltrametricTreeNode:
    """
    Trie of the digit streams of p-adic integers.

    The lowest common ancestor of two leaves has payload |a - b|_p (up to
    truncation), the diameter of the smallest ball holding both.
    """
    if not numbers:
        return UltrametricTreeNode(label=prefix or ROOT_LABEL, payload=1.0)
    primes = {n.p for n in numbers}
    if len(primes) != 1:
        raise DomainError(f"All numbers must share one prime, got {sorted(primes)}")
    p = primes.pop()
    if depth is None:
        depth = min(n.order + n.depth if not n.is_zero else n.depth for n in numbers)
    streams = [n.integer_digits(depth) for n in numbers]

    def grow(path: Tuple[str, ...], group: List[Tuple[int, ...]]) -> UltrametricTreeNode:
        level = len(path) - 1
        label = ".".join(path) if path[0] else ".".join(path[1:]) or ROOT_LABEL
        node = UltrametricTreeNode(label=label, payload=float(p) ** -level)
        if level == depth:
            return node
        branches: Dict[int, List[Tuple[int, ...]]] = {}
        for stream in group:
            branches.setdefault(stream[level], []).append(stream)
        for digit in sorted(branches):
            node.children.append(grow(path + (str(digit),), branches[digit]))
        return node

    return grow((prefix,), streams)


def _check_components(components: Sequence[Tuple[int, float]]) -> None:
    seen = set()
    for p, v in components:
        _check_prime(p)
        if p in seen:
            raise DomainError(f"Duplicate prime {p} in components")
        seen.add(p)
        if not (math.isfinite(v) and v >= 0):
            raise DomainError(f"Component valuation must be finite and non-negative, got {v} at p={p}")


def build_tree(
    components: Sequence[Tuple[int, float]],
    digits: Optional[Mapping[int, Sequence[PadicNumber]]] = None,
) -> UltrametricTreeNode:
    """
    Rooted tree with one branch per prime, in increasing order.

    Args:
        components: (prime, valuation) pairs with distinct primes
        digits: Optional p-adic numbers per prime, attached as digit tries

    Raises:
        DomainError: On duplicate or non-prime labels or negative payloads
    """
    _check_components(components)
    digits = digits or {}
    root = UltrametricTreeNode(label=ROOT_LABEL)
    for p, v in sorted(components):
        branch = UltrametricTreeNode(label=str(p), payload=float(v))
        if p in digits:
            branch.children = digit_tree(digits[p], prefix=str(p)).children
        root.children.append(branch)
    logger.debug(f"Built tree over {len(components)} primes")
    return root


@dataclass(frozen=True)
class TailPolicy:
    """Declared behavior of the components beyond the listed primes."""

    bound: float = 0.0
    vanishing: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.bound) and self.bound >= 0):
            raise DomainError(f"Tail bound must be finite and non-negative, got {self.bound}")

    @classmethod
    def constant(cls, value: float) -> "TailPolicy":
        """Every unlisted component equals `value`."""
        return cls(bound=value, vanishing=value == 0)


def sup_norm(
    components: Sequence[Tuple[int, float]], tail: TailPolicy = TailPolicy()
) -> float:
    """
    Sup-norm max v_p of a component vector.

    The tail must vanish (v_p -> 0) and its bound may not exceed the listed
    maximum, otherwise the supremum is not certified.

    Raises:
        ConvergenceError: If the tail does not vanish or dominates the listed maximum
    """
    _check_components(components)
    current = max((float(v) for _, v in components), default=0.0)
    if not tail.vanishing:
        raise ConvergenceError(
            f"Tail of constant size {tail.bound} violates the convergence condition v_p -> 0"
        )
    if tail.bound > current:
        raise ConvergenceError(
            f"Tail bound {tail.bound} exceeds the listed maximum {current}; sup not certified"
        )
    return current
