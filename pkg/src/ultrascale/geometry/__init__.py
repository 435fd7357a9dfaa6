"""Cantor set covers, fractal measures and the Cantor function."""

from ultrascale.geometry.cantor_function import (
    StaircaseValue,
    devil_staircase,
    gap_constancy_check,
    ode_residual,
)
from ultrascale.geometry.cantor_sets import (
    CantorApproximation,
    GapSchedule,
    IfsSystem,
    IntervalCover,
    address,
    approximate,
    build_ifs,
    cantor_ultrametric,
    contains,
    gaps,
    lebesgue_measure,
    refine,
)
from ultrascale.geometry.fractal_measures import (
    ScaleLadder,
    box_count_dimension,
    box_counts,
    fatness_exponent,
    local_measure_scaling,
    neighborhood_measure,
)

__all__ = [
    "CantorApproximation",
    "GapSchedule",
    "IfsSystem",
    "IntervalCover",
    "ScaleLadder",
    "StaircaseValue",
    "address",
    "approximate",
    "box_count_dimension",
    "box_counts",
    "build_ifs",
    "cantor_ultrametric",
    "contains",
    "devil_staircase",
    "fatness_exponent",
    "gap_constancy_check",
    "gaps",
    "lebesgue_measure",
    "local_measure_scaling",
    "neighborhood_measure",
    "ode_residual",
    "refine",
]
