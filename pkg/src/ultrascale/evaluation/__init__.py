"""Acceptance suite."""

from ultrascale.evaluation.acceptance import AcceptanceReport, CheckResult, run_acceptance

__all__ = ["AcceptanceReport", "CheckResult", "run_acceptance"]
