"""Tests for run configuration."""

import pytest

from ultrascale.config import RunConfig
from ultrascale.errors import DomainError


class TestRunConfig:
    """Tests for RunConfig defaults, layering and validation."""

    def test_defaults(self):
        """Test the documented defaults."""
        config = RunConfig()
        assert config.extrapolation_tolerance == 1e-3
        assert config.r2_threshold == 0.99
        assert config.sieve_limit == 10**7
        assert config.output_format == "json"
        assert config.seed == 20240601

    def test_default_ladder(self):
        """Test the default ladder runs 3**-1 .. 3**-8."""
        ladder = RunConfig().ladder()
        assert ladder.count == 8
        assert ladder.values[0] == pytest.approx(1 / 3)
        assert ladder.values[-1] == pytest.approx(3.0**-8)

    def test_from_mapping(self):
        """Test prefixed, mixed-case keys and scientific integers."""
        config = RunConfig.from_mapping(
            {"ULTRASCALE_SEED": "7", "sieve_limit": "1e5", "Output_Format": "csv", "ladder_ratio": "1/2"}
        )
        assert config.seed == 7
        assert config.sieve_limit == 100_000
        assert config.output_format == "csv"
        assert config.ladder().values[0] == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "values",
        [
            {"colour": "blue"},
            {"seed": "seven"},
            {"sieve_limit": "12345.5"},
            {"sieve_limit": "100"},
            {"max_level": "65"},
            {"output_format": "xml"},
            {"r2_threshold": "0"},
            {"ladder_ratio": "2"},
            {"ladder_count": "3"},
        ],
    )
    def test_invalid_values(self, values):
        """Test that bad keys and values are domain errors."""
        with pytest.raises(DomainError):
            RunConfig.from_mapping(values)

    def test_blank_values_ignored(self):
        """Test that empty values keep the default."""
        assert RunConfig.from_mapping({"seed": " "}).seed == 20240601

    def test_layering(self, tmp_path):
        """Test file < environment < explicit overrides."""
        path = tmp_path / "run.env"
        path.write_text("seed=3\nprecision=32\n# comment\n")
        env = {"ULTRASCALE_CONFIG": str(path), "ULTRASCALE_SEED": "5", "HOME": "/root"}
        config = RunConfig.from_env(environ=env)
        assert config.precision == 32
        assert config.seed == 5
        assert config.with_overrides(seed=9, sieve_limit=None).seed == 9

    def test_explicit_path_wins(self, tmp_path):
        """Test that an explicit path overrides ULTRASCALE_CONFIG."""
        first, second = tmp_path / "a.env", tmp_path / "b.env"
        first.write_text("seed=1\n")
        second.write_text("seed=2\n")
        config = RunConfig.from_env(environ={"ULTRASCALE_CONFIG": str(first)}, config_path=second)
        assert config.seed == 2

    def test_missing_file(self, tmp_path):
        """Test that a missing config file is reported."""
        with pytest.raises(DomainError):
            RunConfig.from_env(environ={}, config_path=tmp_path / "missing.env")

    def test_unknown_override(self):
        """Test that unknown override keys are rejected."""
        with pytest.raises(DomainError):
            RunConfig().with_overrides(colour="blue")

    def test_hash(self):
        """Test the config hash is stable and tracks every field."""
        assert RunConfig().config_hash() == RunConfig().config_hash()
        assert len(RunConfig().config_hash()) == 12
        assert RunConfig(seed=1).config_hash() != RunConfig().config_hash()
        assert "seed=20240601" in RunConfig().rendering().splitlines()
