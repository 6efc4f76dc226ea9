"""Tests for the velocity maps, their Jacobians and the Lorentz force."""
import math

import numpy as np
import pytest

from domain.constants.model import VelocityModel
from domain.exceptions import DomainViolationError
from domain.models.species import SpeciesSpec
from domain.physics.kinematics import (
    cone_margin,
    cone_margin_bound,
    energy_factor,
    inv_det_D,
    inverse_velocity,
    jacobian_A,
    jacobian_B,
    lorentz_force,
    support_params,
    translated_position,
    velocity,
)


@pytest.fixture
def momenta():
    """Random momenta with |p| up to about 3.5."""
    rng = np.random.default_rng(7)
    return rng.uniform(-2.0, 2.0, size=(200, 3))


class TestVelocityMap:
    """Tests for velocity and inverse_velocity."""

    def test_velocity_below_light_speed(self, relativistic_species, momenta):
        """Test that relativistic velocities have magnitude below 1."""
        v = velocity(momenta, relativistic_species)

        assert np.all(np.linalg.norm(v, axis=-1) < 1.0)

    def test_round_trip_relativistic(self, relativistic_species, momenta):
        """Test that inverse_velocity undoes velocity."""
        back = inverse_velocity(velocity(momenta, relativistic_species), relativistic_species)

        np.testing.assert_allclose(back, momenta, rtol=1e-10, atol=1e-12)

    def test_round_trip_classical(self, classical_species, momenta):
        """Test the classical map is p/m both ways."""
        v = velocity(momenta, classical_species)

        np.testing.assert_allclose(v, momenta)
        np.testing.assert_allclose(inverse_velocity(v, classical_species), momenta)

    def test_mass_scales_velocity(self):
        """Test that a heavier species moves slower at equal momentum."""
        heavy = SpeciesSpec(mass=2.0)
        light = SpeciesSpec(mass=1.0)
        p = np.array([1.0, 0.0, 0.0])

        assert velocity(p, heavy)[0] == pytest.approx(1.0 / math.sqrt(5.0))
        assert velocity(p, light)[0] == pytest.approx(1.0 / math.sqrt(2.0))

    def test_single_vector(self, relativistic_species):
        """Test that a single 3-vector gives a 3-vector."""
        v = velocity([0.0, 0.0, 0.0], relativistic_species)

        assert v.shape == (3,)
        np.testing.assert_array_equal(v, 0.0)

    def test_energy_factor(self, relativistic_species, classical_species):
        """Test p0 for both velocity models."""
        p = np.array([3.0, 4.0, 0.0])

        assert float(energy_factor(p, relativistic_species)) == pytest.approx(math.sqrt(26.0))
        assert float(energy_factor(p, classical_species)) == 1.0

    def test_inverse_velocity_rejects_light_speed(self, relativistic_species):
        """Test that |q| >= 1 - 1e-12 raises DomainViolationError."""
        with pytest.raises(DomainViolationError):
            inverse_velocity([1.0, 0.0, 0.0], relativistic_species)

    def test_inverse_velocity_classical_accepts_fast_velocity(self, classical_species):
        """Test that the classical map has no light-speed guard."""
        np.testing.assert_allclose(inverse_velocity([2.0, 0.0, 0.0], classical_species), [2.0, 0.0, 0.0])


class TestJacobians:
    """Tests for jacobian_A, jacobian_B and inv_det_D."""

    def test_jacobians_are_inverse(self, relativistic_species, momenta):
        """Test that A(p) B(v(p)) is the identity."""
        A = jacobian_A(momenta, relativistic_species)
        B = jacobian_B(velocity(momenta, relativistic_species), relativistic_species)

        product = np.einsum("nij,njk->nik", A, B)
        np.testing.assert_allclose(product, np.broadcast_to(np.eye(3), product.shape), atol=1e-10)

    def test_jacobian_A_matches_finite_differences(self, relativistic_species):
        """Test jacobian_A against central differences of velocity."""
        p = np.array([0.3, -1.2, 0.7])
        h = 1e-6
        numeric = np.empty((3, 3))
        for j in range(3):
            step = np.zeros(3)
            step[j] = h
            numeric[:, j] = (velocity(p + step, relativistic_species) - velocity(p - step, relativistic_species)) / (2 * h)

        np.testing.assert_allclose(jacobian_A(p, relativistic_species), numeric, atol=1e-8)

    def test_inv_det_matches_determinant(self, relativistic_species, momenta):
        """Test that inv_det_D is 1/det(A)."""
        det = np.linalg.det(jacobian_A(momenta, relativistic_species))

        np.testing.assert_allclose(inv_det_D(momenta, relativistic_species), 1.0 / det, rtol=1e-10)

    def test_classical_jacobians(self):
        """Test the constant classical Jacobians."""
        species = SpeciesSpec(mass=2.0, model=VelocityModel.CLASSICAL, support_p=0.5)
        p = np.zeros((4, 3))

        np.testing.assert_allclose(jacobian_A(p, species), np.broadcast_to(np.eye(3) / 2.0, (4, 3, 3)))
        np.testing.assert_allclose(jacobian_B(p, species), np.broadcast_to(2.0 * np.eye(3), (4, 3, 3)))
        np.testing.assert_allclose(inv_det_D(p, species), 8.0)

    def test_jacobian_B_rejects_light_speed(self, relativistic_species):
        """Test the light-speed guard of jacobian_B."""
        with pytest.raises(DomainViolationError):
            jacobian_B([0.0, 0.0, 1.0], relativistic_species)


class TestLorentzForce:
    """Tests for lorentz_force."""

    def test_electric_only(self, relativistic_species):
        """Test that the force is eE when B vanishes."""
        force = lorentz_force([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], [0.5, 0.0, 0.0], relativistic_species)

        np.testing.assert_allclose(force, [1.0, 2.0, 3.0])

    def test_magnetic_force_is_perpendicular(self, relativistic_species, momenta):
        """Test that v x B is orthogonal to v."""
        B = np.array([0.2, -0.5, 1.0])
        force = lorentz_force(np.zeros(3), B, momenta, relativistic_species)

        np.testing.assert_allclose(np.einsum("ni,ni->n", force, velocity(momenta, relativistic_species)), 0.0,
                                   atol=1e-14)

    def test_charge_sign(self):
        """Test that a negative charge flips the force."""
        species = SpeciesSpec(charge=-1.0)

        np.testing.assert_allclose(lorentz_force([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], species),
                                   [-1.0, 0.0, 0.0])


class TestSupportParams:
    """Tests for support_params."""

    def test_small_beta_uses_half(self):
        """Test that gamma is 1/2 for small beta."""
        params = support_params(0.1)

        assert params.gamma == 0.5
        assert params.zeta == pytest.approx(0.1 / math.sqrt(1.01))
        assert params.ordered is True

    def test_large_beta(self):
        """Test gamma = 2 beta / sqrt(1 + 4 beta^2) above the threshold."""
        params = support_params(2.0)

        assert params.gamma == pytest.approx(4.0 / math.sqrt(17.0))
        assert params.zeta == pytest.approx(2.0 / math.sqrt(5.0))
        assert params.zeta < params.gamma

    def test_classical_zeta(self):
        """Test the classical velocity radius beta / m."""
        params = support_params(0.5, mass=2.0, model=VelocityModel.CLASSICAL)

        assert params.zeta == pytest.approx(0.25)

    def test_negative_beta(self):
        """Test that a negative beta raises DomainViolationError."""
        with pytest.raises(DomainViolationError):
            support_params(-0.1)


class TestConeGeometry:
    """Tests for translated_position and cone_margin."""

    def test_translated_position(self, relativistic_species):
        """Test Y = x - v t."""
        p = np.array([1.0, 0.0, 0.0])
        y = translated_position([2.0, 0.0, 0.0], p, 2.0, relativistic_species)

        np.testing.assert_allclose(y, [2.0 - 2.0 / math.sqrt(2.0), 0.0, 0.0])

    def test_cone_margin_respects_bound(self, relativistic_species):
        """Test that the margin over the support stays above its analytic lower bound."""
        rng = np.random.default_rng(3)
        L, beta, t = 1.0, 1.5, 4.0
        x = rng.uniform(-1.0, 1.0, size=(500, 3))
        x *= (L / np.maximum(np.linalg.norm(x, axis=-1), L))[:, None]
        p = rng.uniform(-1.0, 1.0, size=(500, 3))
        p *= (beta * rng.uniform(size=500) / np.linalg.norm(p, axis=-1))[:, None]

        margin = cone_margin(x, p, t, L, relativistic_species)

        assert np.min(margin) >= cone_margin_bound(t, L, beta)
