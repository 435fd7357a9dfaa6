"""Acceptance suite run by `ultrascale verify-all`.

Every check draws from its own generator seeded with (seed, check id), so a
single check can be re-run and reproduces its sample exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, computed_field

from ultrascale.analysis.padic_tree import monna_map, padic_norm, padic_valuation
from ultrascale.analysis.valuation import (
    InfinitesimalFamily,
    deformed_variable,
    ultrametric_check,
    valuate,
)
from ultrascale.config import RunConfig
from ultrascale.errors import UltrascaleError
from ultrascale.geometry.cantor_function import (
    devil_staircase,
    gap_constancy_check,
    ode_residual,
)
from ultrascale.geometry.cantor_sets import (
    CantorApproximation,
    GapSchedule,
    approximate,
    build_ifs,
    contains,
    gaps,
    lebesgue_measure,
    refine,
)
from ultrascale.geometry.fractal_measures import (
    ScaleLadder,
    box_count_dimension,
    fatness_exponent,
)
from ultrascale.observability import RunTracer, create_tracer, trace_check
from ultrascale.primes.prime_flow import (
    chebyshev_deformation,
    chebyshev_psi,
    conservation_solve,
    conservation_valuation_check,
    inversion_cascade,
    pnt_deviation,
    prime_pi,
    valuation_growth,
)
from ultrascale.primes.sieve import PrimeTable, sieve

logger = logging.getLogger(__name__)

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


class CheckResult(BaseModel):
    """Outcome of one acceptance criterion."""

    id: int
    name: str
    passed: bool
    detail: str
    error: Optional[str] = None


class AcceptanceReport(BaseModel):
    """All criteria with the config they ran under."""

    config_hash: str
    seed: int
    checks: List[CheckResult]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_markdown(self) -> str:
        """Format report as markdown."""
        lines = [
            f"**Config:** {self.config_hash} (seed {self.seed})",
            "",
            "| # | check | result | detail |",
            "|---|---|---|---|",
        ]
        for c in self.checks:
            result = "PASS" if c.passed else "FAIL"
            detail = c.error or c.detail
            lines.append(f"| {c.id} | {c.name} | {result} | {detail} |")
        verdict = "all criteria pass" if self.passed else "FAILURES present"
        lines.extend(["", f"**Verdict:** {verdict}"])
        return "\n".join(lines)


@dataclass
class AcceptanceContext:
    """Shared inputs of the checks; the prime table is built on first use."""

    config: RunConfig
    prebuilt_table: Optional[PrimeTable] = None
    rerun: Sequence[int] = field(default_factory=lambda: (5, 6, 7, 9, 11))

    def rng(self, check_id: int) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, check_id])

    @cached_property
    def table(self) -> PrimeTable:
        if self.prebuilt_table is not None and self.prebuilt_table.limit >= self.config.sieve_limit:
            return self.prebuilt_table
        logger.info(f"Sieving primes up to {self.config.sieve_limit}")
        return sieve(self.config.sieve_limit)


Outcome = Tuple[bool, str]


def check_ifs_exactness(ctx: AcceptanceContext) -> Outcome:
    approx = approximate(build_ifs("1/3"), 0, ctx.config.max_level)
    for n in range(21):
        if n:
            approx = refine(approx, ctx.config.max_level)
        if len(approx) != 2**n or lebesgue_measure(approx) != Fraction(2, 3) ** n:
            return False, f"level {n}: count {len(approx)}, measure {lebesgue_measure(approx)}"
    return True, "levels 0-20: count 2^n and measure (2/3)^n exact"


def _thin_covers(ctx: AcceptanceContext) -> List[Tuple[str, CantorApproximation, ScaleLadder]]:
    return [
        (
            "1/3",
            approximate(build_ifs("1/3"), 20, ctx.config.max_level),
            ScaleLadder.geometric(Fraction(1, 3), 8, start=Fraction(1, 3)),
        ),
        (
            "1/4",
            approximate(build_ifs("1/4"), 20, ctx.config.max_level),
            ScaleLadder.geometric(Fraction(1, 4), 8, start=Fraction(1, 4)),
        ),
    ]


def check_dimension(ctx: AcceptanceContext) -> Outcome:
    bounds = {"1/3": (0.61, 0.65), "1/4": (0.48, 0.52)}
    parts, ok = [], True
    for label, cover, ladder in _thin_covers(ctx):
        s = box_count_dimension(cover, ladder, ctx.config.r2_threshold).exponent
        lo, hi = bounds[label]
        ok &= lo <= s <= hi
        parts.append(f"a={label}: s={s:.6f}")
    return ok, ", ".join(parts)


def check_fatness_identity(ctx: AcceptanceContext) -> Outcome:
    parts, ok = [], True
    for label, cover, ladder in _thin_covers(ctx):
        s = box_count_dimension(cover, ladder, ctx.config.r2_threshold).exponent
        beta = fatness_exponent(cover, ladder, threshold=ctx.config.r2_threshold).exponent
        ok &= 0.97 <= s + beta <= 1.03
        parts.append(f"a={label}: beta+s={beta + s:.6f}")
    return ok, ", ".join(parts)


def check_fat_measure(ctx: AcceptanceContext) -> Outcome:
    approx = approximate(GapSchedule.geometric("1/4"), 30, ctx.config.max_level)
    measure = float(lebesgue_measure(approx))
    oracle = math.prod(1.0 - 2.0 ** -(k + 2) for k in range(30))
    ok = abs(measure - oracle) < 1e-6 and measure > 0.55
    return ok, f"level-30 measure {measure:.8f}, oracle {oracle:.8f}"


def check_valuation_recovery(ctx: AcceptanceContext) -> Outcome:
    rng = ctx.rng(5)
    ladder = ScaleLadder.from_exponents(10.0, -2, -9)
    worst = 0.0
    for l, lam in zip(rng.uniform(0.05, 0.95, 100), rng.uniform(0.01, 1.0, 100)):
        estimate = valuate(InfinitesimalFamily(float(l), float(lam)), ladder)
        worst = max(worst, abs(estimate.value - float(l)))
    return worst < ctx.config.extrapolation_tolerance, f"100 families, worst error {worst:.3e}"


def check_ultrametric_sweep(ctx: AcceptanceContext) -> Outcome:
    rng = ctx.rng(6)
    count = 10_000
    ls = rng.uniform(0.01, 0.99, (count, 2))
    lams = rng.uniform(0.01, 1.0, (count, 2))
    pairs = [
        (InfinitesimalFamily(float(l1), float(m1)), InfinitesimalFamily(float(l2), float(m2)))
        for (l1, l2), (m1, m2) in zip(ls, lams)
    ]
    report = ultrametric_check(pairs, tolerance=ctx.config.extrapolation_tolerance)
    return report.all_passed, (
        f"{report.passed}/{report.total} ultrametric, {report.dominant_passed}/{report.total} "
        f"dominant, worst dominance error {report.worst_dominance_error:.3e}"
    )


def check_staircase(ctx: AcceptanceContext) -> Outcome:
    rng = ctx.rng(7)
    precision = ctx.config.precision
    denominator = 10**6
    violations = 0
    for a, b in np.sort(rng.integers(0, denominator + 1, (10_000, 2)), axis=1):
        lo = devil_staircase(Fraction(int(a), denominator), precision).phi
        hi = devil_staircase(Fraction(int(b), denominator), precision).phi
        violations += lo > hi
    quarter = devil_staircase(Fraction(1, 4), precision).phi
    third = devil_staircase(Fraction(1, 3), precision).phi
    cover = approximate(build_ifs("1/3"), 6, ctx.config.max_level)
    constancy = gap_constancy_check(gaps(cover), precision=precision)
    ok = (
        violations == 0
        and quarter == Fraction(1, 3)
        and third == Fraction(1, 2)
        and constancy.passed
    )
    return ok, (
        f"{violations} monotonicity violations, phi(1/4)={quarter}, phi(1/3)={third}, "
        f"{len(constancy.failures)}/{len(constancy.gaps)} gap failures"
    )


def check_scale_invariant_ode(ctx: AcceptanceContext) -> Outcome:
    worst = max(
        ode_residual(C, x, 1e-5) for C in (0.1, 1.0, 10.0) for x in (0.5, 0.1, 0.01)
    )
    return worst < 1e-8, f"worst residual {worst:.3e}"


def _random_rational(rng: np.random.Generator) -> Fraction:
    num = int(rng.integers(1, 10**6)) * (1 if rng.random() < 0.5 else -1)
    return Fraction(num, int(rng.integers(1, 10**6)))


def check_padic_and_monna(ctx: AcceptanceContext) -> Outcome:
    rng = ctx.rng(9)
    algebra_failures = 0
    for _ in range(10_000):
        p = int(rng.choice(SMALL_PRIMES))
        q1, q2 = _random_rational(rng), _random_rational(rng)
        o1, o2 = padic_valuation(q1, p).order, padic_valuation(q2, p).order
        algebra_failures += padic_valuation(q1 * q2, p).order != o1 + o2
        if q1 + q2 != 0:
            n1, n2, ns = padic_norm(q1, p), padic_norm(q2, p), padic_norm(q1 + q2, p)
            algebra_failures += ns > max(n1, n2) or (o1 != o2 and ns != max(n1, n2))

    monna_failures = 0
    for n in range(1, 17):
        depth = n + 8
        target = approximate(build_ifs("1/3"), depth, ctx.config.max_level)
        prefixes = rng.integers(0, 2, (1000, n))
        tails = rng.integers(0, 2, (1000, 2, depth - n))
        images = set()
        streams = set()
        for prefix, (tail_a, tail_b) in zip(prefixes, tails):
            alpha = tuple(int(d) for d in np.concatenate((prefix, tail_a)))
            beta = tuple(int(d) for d in np.concatenate((prefix, tail_b)))
            xa, xb = monna_map(alpha), monna_map(beta)
            monna_failures += abs(xa - xb) > Fraction(1, 3**n)
            monna_failures += not contains(target, xa)
            streams.add(alpha)
            images.add(xa)
        monna_failures += len(images) != len(streams)
    ok = algebra_failures == 0 and monna_failures == 0
    return ok, f"{algebra_failures} algebra failures, {monna_failures} Monna failures"


def check_prime_deviation(ctx: AcceptanceContext) -> Outcome:
    table = ctx.table
    ys = [10.0**k for k in range(2, 8)]
    deviations = pnt_deviation(ys, table, ctx.config.r2_threshold)
    devs = [r.dev_pi for r in deviations.rows]
    decreasing = all(b < a for a, b in zip(devs[1:], devs[2:]))
    at_1e3, at_1e6 = devs[1], devs[4]
    psi_route = abs(chebyshev_psi(1e6, table, strict=True) / 1e6 - 1.0)
    ok = (
        decreasing
        and abs(at_1e3 - 0.1605) < 1e-3
        and abs(at_1e6 - 0.0845) < 1e-3
        and psi_route < 0.01
    )
    alpha = f"{deviations.alpha_hat:.4f}" if deviations.alpha_hat is not None else "n/a"
    r2 = f"{deviations.r_squared:.4f}" if deviations.r_squared is not None else "n/a"
    return ok, (
        f"dev(1e2)={devs[0]:.4f}, dev(1e3)={at_1e3:.4f}, dev(1e6)={at_1e6:.4f}, "
        f"decreasing from 1e3: {decreasing}, psi route {psi_route:.2e}, "
        f"alpha_hat={alpha} (R² {r2})"
    )


def check_conservation(ctx: AcceptanceContext) -> Outcome:
    rng = ctx.rng(11)
    worst = 0.0
    for x, a, factor in zip(
        rng.uniform(1e-6, 0.99, 1000), rng.uniform(0.01, 0.99, 1000), rng.uniform(1.01, 10.0, 1000)
    ):
        p = factor / a
        worst = max(worst, conservation_solve(float(x), float(a), float(p)).residual)
    nonzero = 0
    for x, v in zip(rng.uniform(1e-6, 0.99, 1000), rng.uniform(0.0, 1.0, 1000)):
        x, v = float(x), float(v)
        nonzero += conservation_valuation_check(x, v, deformed_variable(x, v)) != 0.0
    ok = worst < ctx.config.residual_tolerance and nonzero == 0
    return ok, f"worst conservation residual {worst:.3e}, {nonzero} nonzero valuation residuals"


def check_cross_route(ctx: AcceptanceContext) -> Outcome:
    coarse = chebyshev_deformation(1e-3, ctx.table)
    fine = chebyshev_deformation(1e-6, ctx.table)
    ok = (
        fine.gap < coarse.gap
        and abs(fine.log_y_psi - 1.0) < 0.2
        and abs(fine.log_y_pi - 1.0) < 0.2
    )
    return ok, (
        f"gap(1e-3)={coarse.gap:.4f}, gap(1e-6)={fine.gap:.4f}, "
        f"logY at 1e-6: psi {fine.log_y_psi:.4f}, pi {fine.log_y_pi:.4f}"
    )


def check_cascade(ctx: AcceptanceContext) -> Outcome:
    parts, ok = [], True
    for x in (0.1, 1e-2, 1e-3, 1e-4):
        trace = inversion_cascade(x, ctx.table)
        count = prime_pi(1.0 / x, ctx.table, strict=True)
        growth = valuation_growth(x, ctx.table)
        ok &= trace.transitions == count
        ok &= abs(trace.accumulated_valuation - growth.v) <= x
        parts.append(f"x={x:g}: {trace.transitions}")
    return ok, "transitions " + ", ".join(parts)


Check = Callable[[AcceptanceContext], Outcome]

CHECKS: List[Tuple[int, str, Check]] = [
    (1, "ifs-exactness", check_ifs_exactness),
    (2, "dimension-recovery", check_dimension),
    (3, "thin-fatness-identity", check_fatness_identity),
    (4, "fat-measure", check_fat_measure),
    (5, "valuation-recovery", check_valuation_recovery),
    (6, "ultrametric-sweep", check_ultrametric_sweep),
    (7, "staircase", check_staircase),
    (8, "scale-invariant-ode", check_scale_invariant_ode),
    (9, "padic-monna", check_padic_and_monna),
    (10, "prime-deviation", check_prime_deviation),
    (11, "conservation", check_conservation),
    (12, "cross-route", check_cross_route),
    (13, "cascade", check_cascade),
]


def _run_check(
    ctx: AcceptanceContext, tracer: RunTracer, check_id: int, name: str, check: Check
) -> CheckResult:
    with trace_check(tracer, name) as span:
        try:
            passed, detail = check(ctx)
            error = None
        except UltrascaleError as e:
            passed, detail, error = False, "", f"{type(e).__name__}: {e}"
        span.passed = passed
    return CheckResult(id=check_id, name=name, passed=passed, detail=detail, error=error)


def check_determinism(
    ctx: AcceptanceContext, tracer: RunTracer, results: Sequence[CheckResult]
) -> CheckResult:
    """Re-run the seeded checks and compare their results byte for byte."""
    by_id = {r.id: r for r in results}
    mismatched = []
    with trace_check(tracer, "determinism") as span:
        for check_id, name, check in CHECKS:
            if check_id not in ctx.rerun:
                continue
            again = _run_check(ctx, tracer, check_id, name, check)
            if again.model_dump_json() != by_id[check_id].model_dump_json():
                mismatched.append(name)
        span.passed = not mismatched
    detail = f"re-ran checks {', '.join(map(str, ctx.rerun))}: " + (
        "identical" if not mismatched else f"mismatch in {', '.join(mismatched)}"
    )
    return CheckResult(id=14, name="determinism", passed=not mismatched, detail=detail)


def run_acceptance(
    config: RunConfig,
    table: Optional[PrimeTable] = None,
    only: Optional[Sequence[int]] = None,
) -> AcceptanceReport:
    """
    Run the acceptance criteria.

    Args:
        config: Run configuration (tolerances, seed, sieve limit)
        table: Optional prebuilt prime table reaching config.sieve_limit
        only: Optional subset of check ids; 14 needs the rerun checks selected

    Returns:
        AcceptanceReport; failures and module errors are report entries
    """
    ctx = AcceptanceContext(config=config, prebuilt_table=table)
    tracer = create_tracer()
    selected = [c for c in CHECKS if only is None or c[0] in only]
    results = [_run_check(ctx, tracer, *c) for c in selected]
    if only is None or 14 in only:
        ctx.rerun = [i for i in ctx.rerun if any(r.id == i for r in results)]
        results.append(check_determinism(ctx, tracer, results))
    tracer.complete()
    return AcceptanceReport(config_hash=config.config_hash(), seed=config.seed, checks=results)
