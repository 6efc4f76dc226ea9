"""Tests for the run configuration model."""
import math

import pytest

from domain.constants.model import MirrorMode, VelocityModel
from domain.exceptions import CFLViolationError, ConfigValidationError
from domain.models.run_config import RunConfig


def _config(**overrides) -> RunConfig:
    data = {
        "run": {"name": "tiny", "seed": 3},
        "domain": {"cells": 16},
        "species": [
            {"name": "ion", "charge": 1.0, "support_x": 0.5, "particles": 100, "tracers": 2},
            {"name": "electron", "charge": -1.0, "mirror_of": 0, "mirror_mode": "reflect"},
        ],
        "time": {"dt": 0.2, "t_max": 2.0},
    }
    data.update(overrides)
    return RunConfig.model_validate(data)


class TestDerivedQuantities:
    """Tests for the quantities RunConfig derives from its sections."""

    def test_dyadic_schedule(self):
        """Test that dt is snapped so the checkpoints t_max/16 * 2^k are hit exactly."""
        config = _config()

        assert config.dyadic_start == pytest.approx(0.125)
        assert config.effective_dt == pytest.approx(0.125)
        assert config.total_steps == 16
        assert config.checkpoint_steps == [1, 2, 4, 8, 16]
        assert config.checkpoints == pytest.approx([0.125, 0.25, 0.5, 1.0, 2.0])
        assert config.diagnostic_stride == 1

    def test_default_dyadic_window_spans_fit_decades(self):
        """Test that the default checkpoint chain is long enough for the default decay fit."""
        config = _config(time={"dt": 0.2, "t_max": 8.0})

        span = math.log10(config.checkpoints[-1] / config.dyadic_start)

        assert span >= config.analysis.fit_decades
        assert config.checkpoints[-1] == pytest.approx(8.0)

    def test_stride_divides_first_checkpoint(self):
        """Test that the diagnostic stride never skips the first checkpoint."""
        config = _config(time={"dt": 0.01, "t_max": 8.0}, diagnostics={"interval": 0.07})

        assert config.steps_per_dyadic_start % config.diagnostic_stride == 0

    def test_automatic_extent(self):
        """Test extent = (t_max + L) / (1 - 4/cells) with a pad of two cells."""
        config = _config()

        assert config.extent == pytest.approx(2.5 / 0.75)
        assert config.pad == pytest.approx(2.0 * config.geometry.dx)
        assert config.support_x == pytest.approx(0.5)

    def test_beta_bound_default(self):
        """Test beta_bound = 1.5 * momentum support and the momentum lattice half-width."""
        config = _config()

        assert config.beta_bound == pytest.approx(0.375)
        assert config.momentum_grid.half_width == pytest.approx(1.25 * 0.375)

    def test_mirrored_species(self):
        """Test that a mirror inherits the profile and particle count of its source."""
        data = _config().initial_data()

        assert data.species[1].particles == 100
        assert data.species[1].mirror_mode is MirrorMode.REFLECT
        assert data.species[1].profile == data.species[0].profile
        assert data.is_neutral

    def test_species_specs_use_model(self):
        """Test that every species carries the configured velocity map."""
        config = _config(model={"velocity": "classical"})

        assert all(s.model is VelocityModel.CLASSICAL for s in config.species_specs())

    def test_vector_text(self):
        """Test that comma-separated centers are parsed."""
        config = _config(species=[{"center_x": "0.1, 0, -0.2"}, {"charge": -1.0, "mirror_of": 0}])

        assert config.species[0].center_x == (0.1, 0.0, -0.2)


class TestValidatePhysics:
    """Tests for RunConfig.validate_physics."""

    def test_valid(self):
        """Test that a consistent configuration validates to itself."""
        config = _config()

        assert config.validate_physics() is config

    def test_no_species(self):
        """Test that at least one species is required."""
        with pytest.raises(ConfigValidationError) as exc_info:
            _config(species=[]).validate_physics()

        assert exc_info.value.key_path == "[species.0]"

    def test_mirror_must_reference_earlier_species(self):
        """Test that forward mirror links are rejected."""
        config = _config(species=[{"mirror_of": 1}, {"charge": -1.0}])

        with pytest.raises(ConfigValidationError) as exc_info:
            config.validate_physics()

        assert exc_info.value.key_path == "[species.0].mirror_of"

    def test_more_tracers_than_particles(self):
        """Test that tracers must be a subset of the particles."""
        config = _config(species=[{"particles": 2, "tracers": 3}, {"charge": -1.0, "mirror_of": 0}])

        with pytest.raises(ConfigValidationError) as exc_info:
            config.validate_physics()

        assert exc_info.value.key_path == "[species.0].tracers"

    def test_classical_needs_slow_support(self):
        """Test that the classical map requires a momentum support below 1."""
        config = _config(species=[{"support_p": 1.5}, {"charge": -1.0, "mirror_of": 0}],
                         model={"velocity": "classical", "beta_bound": 2.0})

        with pytest.raises(ConfigValidationError) as exc_info:
            config.validate_physics()

        assert exc_info.value.key_path == "[species.0].support_p"

    def test_cfl(self):
        """Test that dt above dx/sqrt(3) raises CFLViolationError."""
        with pytest.raises(CFLViolationError) as exc_info:
            _config(time={"dt": 0.5, "t_max": 2.0}).validate_physics()

        assert exc_info.value.key_path == "[time].dt"

    def test_extent_must_contain_cone(self):
        """Test that an explicit extent below t_max + L + pad is rejected."""
        config = _config(domain={"cells": 16, "extent": 2.0}, time={"dt": 0.1, "t_max": 2.0})

        with pytest.raises(ConfigValidationError) as exc_info:
            config.validate_physics()

        assert exc_info.value.key_path == "[domain].extent"

    def test_neutrality(self):
        """Test that a single charged species is rejected."""
        config = _config(species=[{"support_x": 0.5}])

        with pytest.raises(ConfigValidationError) as exc_info:
            config.validate_physics()

        assert exc_info.value.key_path == "[species].charge"

    def test_beta_below_support(self):
        """Test that beta_bound below the momentum support is rejected."""
        with pytest.raises(ConfigValidationError) as exc_info:
            _config(model={"beta_bound": 0.1}).validate_physics()

        assert exc_info.value.key_path == "[model].beta_bound"

    def test_ellipticity_margin(self):
        """Test that gamma too close to 1 is rejected."""
        with pytest.raises(ConfigValidationError) as exc_info:
            _config(model={"beta_bound": 5.0}).validate_physics()

        assert "ellipticity" in str(exc_info.value)
