"""Centralized run configuration for ultrascale.

Values come from defaults, a flat key=value file (ULTRASCALE_CONFIG),
ULTRASCALE_* environment variables and command-line flags, in increasing
priority.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values

from ultrascale.errors import DomainError
from ultrascale.geometry.fractal_measures import ScaleLadder
from ultrascale.parsing import parse_rational

logger = logging.getLogger(__name__)

ENV_PREFIX = "ULTRASCALE_"
CONFIG_ENV = "ULTRASCALE_CONFIG"
OUTPUT_FORMATS = ("json", "csv", "plain")
MIN_SIEVE_LIMIT = 10**4


@dataclass(frozen=True)
class RunConfig:
    """Tolerances, default ladders, sieve size, output format and seed."""

    # Estimators
    extrapolation_tolerance: float = 1e-3
    r2_threshold: float = 0.99
    residual_tolerance: float = 1e-10

    # Default box-counting ladder: ratio**1 .. ratio**count
    ladder_ratio: str = "1/3"
    ladder_count: int = 8

    # Cover depth cap
    max_level: int = 40

    # Primes
    sieve_limit: int = 10**7

    # Output
    output_format: str = "json"
    seed: int = 20240601
    precision: int = 64

    def __post_init__(self) -> None:
        for name in ("extrapolation_tolerance", "r2_threshold", "residual_tolerance"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if self.sieve_limit < MIN_SIEVE_LIMIT:
            raise DomainError(f"sieve_limit must be at least {MIN_SIEVE_LIMIT}, got {self.sieve_limit}")
        if not 1 <= self.max_level <= 64:
            raise DomainError(f"max_level must lie in [1, 64], got {self.max_level}")
        if self.output_format not in OUTPUT_FORMATS:
            raise DomainError(
                f"output_format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}"
            )
        if self.precision < 1:
            raise DomainError(f"precision must be positive, got {self.precision}")
        self.ladder()

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]], source: str = "mapping") -> "RunConfig":
        """
        Build a config from string values keyed by field name.

        Keys may carry the ULTRASCALE_ prefix and any case.

        Raises:
            DomainError: On unknown keys or unparsable values
        """
        return cls().with_overrides(**_coerce_all(values, source))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """Load a flat key=value config file."""
        if not Path(path).is_file():
            raise DomainError(f"Config file not found: {path}")
        logger.info(f"Loading config from {path}")
        return cls.from_mapping(dotenv_values(path), source=str(path))

    @classmethod
    def from_env(
        cls,
        environ: Optional[Mapping[str, str]] = None,
        config_path: Optional[Union[str, Path]] = None,
    ) -> "RunConfig":
        """
        Layer the config file and ULTRASCALE_* variables over the defaults.

        Args:
            environ: Environment mapping, defaults to os.environ
            config_path: File overriding ULTRASCALE_CONFIG
        """
        env = os.environ if environ is None else environ
        path = config_path or env.get(CONFIG_ENV)
        values: Dict[str, Any] = {}
        if path:
            if not Path(path).is_file():
                raise DomainError(f"Config file not found: {path}")
            values.update(_coerce_all(dotenv_values(path), str(path)))
        env_values = {
            k: v for k, v in env.items() if k.startswith(ENV_PREFIX) and _field_name(k) in _FIELDS
        }
        values.update(_coerce_all(env_values, "environment"))
        config = cls().with_overrides(**values)
        logger.debug(f"Configuration loaded: hash={config.config_hash()}")
        return config

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with the given fields replaced; None values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(changes) - set(_FIELDS)
        if unknown:
            raise DomainError(f"Unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(self, **changes)

    def rendering(self) -> str:
        """Sorted key=value lines."""
        items = sorted(dataclasses.asdict(self).items())
        return "\n".join(f"{k}={v}" for k, v in items)

    def config_hash(self) -> str:
        """First 12 hex digits of the SHA-256 of the rendering."""
        return hashlib.sha256(self.rendering().encode()).hexdigest()[:12]

    def ladder(self) -> ScaleLadder:
        """Default box-counting ladder ratio**1 .. ratio**count."""
        ratio = parse_rational(self.ladder_ratio)
        return ScaleLadder.geometric(ratio, self.ladder_count, start=ratio)


_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _field_name(key: str) -> str:
    key = key.strip().lower()
    prefix = ENV_PREFIX.lower()
    return key[len(prefix) :] if key.startswith(prefix) else key


def _coerce(name: str, raw: str) -> Any:
    kind = _FIELDS[name]
    if kind == "int":
        number = float(raw)
        if number != int(number):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(number)
    return _CASTS[str(kind)](raw)


def _coerce_all(values: Mapping[str, Optional[str]], source: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, raw in values.items():
        name = _field_name(key)
        if name not in _FIELDS:
            raise DomainError(f"Unknown config key {key!r} in {source}")
        if raw is None or raw.strip() == "":
            continue
        try:
            out[name] = _coerce(name, raw.strip())
        except ValueError as e:
            raise DomainError(f"Invalid value for {name} in {source}: {e}") from e
    return out


# Global config instance (initialized on first use)
_config: Optional[RunConfig] = None


def get_config() -> RunConfig:
    """Get the global configuration, loading it from the environment on first call."""
    global _config
    if _config is None:
        _config = RunConfig.from_env()
    return _config
