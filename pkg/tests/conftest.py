"""Shared fixtures: prime tables and seeded generators."""

import numpy as np
import pytest

from ultrascale.primes.sieve import sieve

SEED = 20240601


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep ULTRASCALE_* variables of the calling shell out of the tests."""
    import os

    for key in list(os.environ):
        if key.startswith("ULTRASCALE_"):
            monkeypatch.delenv(key)


@pytest.fixture(scope="session")
def prime_table():
    """Primes up to 10**7, shared by the whole session."""
    return sieve(10**7)


@pytest.fixture(scope="session")
def small_table():
    """Primes up to 10**4."""
    return sieve(10**4)


@pytest.fixture
def rng():
    """Seeded generator so failing samples reproduce."""
    return np.random.default_rng(SEED)
