"""Timing spans for acceptance runs.

Spans record how long each check took and whether it passed. Durations are
logged only; reports never include them, so they stay reproducible.
"""

from __future__ import annotations

import logging
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class CheckSpan:
    """One timed check."""

    name: str
    duration_ms: float = 0.0
    passed: Optional[bool] = None
    error: Optional[str] = None


@dataclass
class RunTrace:
    """All spans of one acceptance run."""

    trace_id: str
    spans: List[CheckSpan] = field(default_factory=list)
    start_time: float = field(default_factory=time.perf_counter)
    end_time: Optional[float] = None

    @property
    def duration_ms(self) -> float:
        """Total duration of the run in milliseconds."""
        end = self.end_time if self.end_time is not None else time.perf_counter()
        return (end - self.start_time) * 1000

    @property
    def total_checks(self) -> int:
        return len(self.spans)

    @property
    def failed_checks(self) -> int:
        return sum(1 for s in self.spans if s.passed is False)


class RunTracer:
    """Collects check spans and logs a summary when the run completes."""

    def __init__(self, run_id: Optional[str] = None):
        self.trace = RunTrace(trace_id=run_id or str(uuid.uuid4()))

    def log_check(self, span: CheckSpan) -> None:
        """Record a finished span."""
        self.trace.spans.append(span)
        status = "ERROR" if span.error else ("PASS" if span.passed else "FAIL")
        logger.debug(f"Check {span.name}: {span.duration_ms:.0f}ms, {status}")

    def complete(self) -> RunTrace:
        """Close the trace and log the summary."""
        self.trace.end_time = time.perf_counter()
        logger.info(
            f"Run {self.trace.trace_id} complete: {self.trace.total_checks} checks, "
            f"{self.trace.failed_checks} failed, {self.trace.duration_ms:.0f}ms"
        )
        return self.trace


def create_tracer(run_id: Optional[str] = None) -> RunTracer:
    """Create a tracer for one acceptance run."""
    return RunTracer(run_id)


@contextmanager
def trace_check(tracer: RunTracer, name: str) -> Iterator[CheckSpan]:
    """
    Time a check.

    Usage:
        with trace_check(tracer, "ifs-exactness") as span:
            span.passed = run_check()
    """
    span = CheckSpan(name=name)
    start = time.perf_counter()
    try:
        yield span
    except Exception as e:
        span.error = str(e)
        raise
    finally:
        span.duration_ms = (time.perf_counter() - start) * 1000
        tracer.log_check(span)
