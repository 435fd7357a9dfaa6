"""Prime tables and the prime-driven valuation flow."""

from ultrascale.primes.prime_flow import (
    CascadeTrace,
    DeviationTable,
    chebyshev_deformation,
    chebyshev_psi,
    chebyshev_theta,
    conservation_solve,
    conservation_valuation_check,
    inversion_cascade,
    pnt_deviation,
    prime_pi,
    valuation_growth,
)
from ultrascale.primes.sieve import PrimeTable, sieve

__all__ = [
    "CascadeTrace",
    "DeviationTable",
    "PrimeTable",
    "chebyshev_deformation",
    "chebyshev_psi",
    "chebyshev_theta",
    "conservation_solve",
    "conservation_valuation_check",
    "inversion_cascade",
    "pnt_deviation",
    "prime_pi",
    "sieve",
    "valuation_growth",
]
