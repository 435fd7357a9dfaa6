"""Least-squares fits in transformed coordinates."""

from __future__ import annotations

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, computed_field
from scipy.stats import linregress

from ultrascale.errors import FitError

logger = logging.getLogger(__name__)

DEFAULT_R2_THRESHOLD = 0.99


class ExponentEstimate(BaseModel):
    """Slope of a log-log (or otherwise linearized) fit."""

    exponent: float
    intercept: float
    stderr: float
    r_squared: float
    points: List[Tuple[float, float]]
    threshold: float = DEFAULT_R2_THRESHOLD

    @computed_field  # type: ignore[prop-decorator]
    @property
    def valid(self) -> bool:
        """Whether the fit quality reaches the configured R² threshold."""
        return self.r_squared >= self.threshold

    def to_markdown(self) -> str:
        """Format estimate as markdown."""
        flag = "" if self.valid else " _(below R² threshold)_"
        lines = [
            f"**Exponent:** {self.exponent:.6f} ± {self.stderr:.2e}{flag}",
            f"**R²:** {self.r_squared:.6f}",
            "",
            "| log scale | log quantity |",
            "|---|---|",
        ]
        lines.extend(f"| {u:.6f} | {w:.6f} |" for u, w in self.points)
        return "\n".join(lines)


def linear_fit(
    xs: Sequence[float],
    ys: Sequence[float],
    threshold: float = DEFAULT_R2_THRESHOLD,
) -> ExponentEstimate:
    """
    Fit ys = intercept + exponent * xs by ordinary least squares.

    Args:
        xs: Abscissae, already transformed (e.g. log 1/eps)
        ys: Ordinates, already transformed (e.g. log N)
        threshold: R² below which the estimate is flagged

    Returns:
        ExponentEstimate with the fitted points attached

    Raises:
        FitError: If fewer than two points or the abscissae have no spread
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise FitError(f"Need at least two paired points, got {x.size} and {y.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("Fit points must be finite")
    if np.ptp(x) == 0.0:
        raise FitError("Degenerate fit: abscissae have zero variance")

    if np.ptp(y) == 0.0:
        # linregress reports r = 0 here; a flat line is an exact fit
        slope, intercept, r_squared, stderr = 0.0, float(y[0]), 1.0, 0.0
    else:
        result = linregress(x, y)
        slope = float(result.slope)
        intercept = float(result.intercept)
        r_squared = float(result.rvalue) ** 2
        stderr = float(result.stderr) if x.size > 2 else 0.0
        if math.isnan(stderr):
            stderr = 0.0

    logger.debug(f"Fitted {x.size} points: slope={slope:.6g}, r2={r_squared:.6g}")
    return ExponentEstimate(
        exponent=slope,
        intercept=intercept,
        stderr=stderr,
        r_squared=min(max(r_squared, 0.0), 1.0),
        points=[(float(u), float(w)) for u, w in zip(x, y)],
        threshold=threshold,
    )
