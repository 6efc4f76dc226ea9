"""Tests for the run configuration file loader."""
import os

import pytest

from domain.constants.model import MirrorMode
from domain.exceptions import CFLViolationError, ConfigValidationError
from infrastructure.config.run_config_loader import RunConfigLoader

VALID = """
[run]
name = tiny
seed = 3

[domain]
cells = 16

[species.0]
name = ion
charge = 1.0
support_x = 0.5
particles = 100
tracers = 2

[species.1]
name = electron
charge = -1.0
mirror_of = 0
mirror_mode = reflect

[time]
dt = 0.2
t_max = 2.0
"""


def _write(directory: str, name: str, text: str) -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return path


def _error_key(text: str) -> str:
    with pytest.raises(ConfigValidationError) as exc_info:
        RunConfigLoader.parse(text)
    return exc_info.value.key_path


class TestParse:
    """Tests for RunConfigLoader.parse."""

    def test_parse_valid(self):
        """Test that every section is mapped onto the model."""
        config = RunConfigLoader.parse(VALID)

        assert config.run.name == "tiny"
        assert config.domain.cells == 16
        assert len(config.species) == 2
        assert config.species[1].mirror_mode is MirrorMode.REFLECT
        assert config.time.t_max == 2.0

    def test_serialize_round_trip(self):
        """Test that a serialized configuration parses back to an equal one."""
        config = RunConfigLoader.parse(VALID)

        assert RunConfigLoader.parse(RunConfigLoader.serialize(config)) == config

    def test_unknown_section(self):
        """Test that unknown sections are reported by name."""
        assert _error_key(VALID + "\n[plasma]\nx = 1\n") == "[plasma]"

    def test_bad_species_section(self):
        """Test that species sections need a numeric index."""
        assert _error_key(VALID + "\n[species.ion]\nmass = 1\n") == "[species.ion]"

    def test_species_indices_contiguous(self):
        """Test that species indices must be 0..n-1."""
        assert _error_key(VALID.replace("[species.1]", "[species.2]")) == "[species]"

    def test_invalid_value_key_path(self):
        """Test that a pydantic error carries the section and key."""
        assert _error_key(VALID.replace("cells = 16", "cells = 4")) == "[domain].cells"

    def test_invalid_species_value_key_path(self):
        """Test that species errors carry the species index."""
        text = VALID.replace("charge = -1.0", "charge = -1.0\nsupport_x = -2")

        assert _error_key(text) == "[species.1].support_x"

    def test_unknown_key(self):
        """Test that unknown keys are rejected."""
        assert _error_key(VALID.replace("seed = 3", "seed = 3\ncolour = red")) == "[run].colour"

    def test_physics_validation(self):
        """Test that cross-section constraints are checked unless disabled."""
        text = VALID.replace("dt = 0.2", "dt = 0.5")

        with pytest.raises(CFLViolationError):
            RunConfigLoader.parse(text)
        assert RunConfigLoader.parse(text, validate=False).time.dt == 0.5

    def test_malformed_file(self):
        """Test that text outside any section is a config error."""
        assert _error_key("seed = 3\n") == "[config]"


class TestLoad:
    """Tests for RunConfigLoader.load and load_thresholds."""

    def test_load(self, temp_dir):
        """Test loading a configuration file."""
        path = _write(temp_dir, "tiny.ini", VALID)

        assert RunConfigLoader.load(path).run.seed == 3

    def test_missing_file(self, temp_dir):
        """Test that a missing file raises ConfigValidationError."""
        with pytest.raises(ConfigValidationError):
            RunConfigLoader.load(os.path.join(temp_dir, "missing.ini"))

    def test_load_thresholds(self, temp_dir):
        """Test that a thresholds file overrides the analysis defaults."""
        path = _write(temp_dir, "thresholds.ini", "[analysis]\nvanish_tol = 0.01\np_rate_tol = 0.5\n")

        thresholds = RunConfigLoader.load_thresholds(path)

        assert thresholds.vanish_tol == 0.01
        assert thresholds.p_rate_tol == 0.5
        assert thresholds.p_rate_vanishing == -1.5

    def test_thresholds_only_analysis(self, temp_dir):
        """Test that other sections are rejected."""
        path = _write(temp_dir, "thresholds.ini", "[analysis]\nvanish_tol = 0.01\n[time]\ndt = 1\n")

        with pytest.raises(ConfigValidationError) as exc_info:
            RunConfigLoader.load_thresholds(path)

        assert exc_info.value.key_path == "[time]"

    def test_thresholds_invalid_value(self, temp_dir):
        """Test that invalid thresholds carry the analysis key path."""
        path = _write(temp_dir, "thresholds.ini", "[analysis]\np_rate_tol = -1\n")

        with pytest.raises(ConfigValidationError) as exc_info:
            RunConfigLoader.load_thresholds(path)

        assert exc_info.value.key_path == "[analysis].p_rate_tol"
