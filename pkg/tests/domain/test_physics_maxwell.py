"""Tests for the staggered-grid Maxwell solver."""
import numpy as np
import pytest

from domain.constants.model import PoissonSymbol
from domain.exceptions import CFLViolationError, GridShapeError, NeutralityError, OutOfDomainError
from domain.models.field_grid import E_OFFSETS, FieldGrid, GridGeometry
from domain.physics.kinematics import support_params
from domain.physics.maxwell import (
    advance_fields,
    cfl_limit,
    cone_mask,
    discrete_energy,
    divergence_B,
    divergence_E,
    field_diagnostics,
    init_fields,
    sample_fields,
    scalar_wave_leapfrog,
    step_fields,
)


@pytest.fixture
def geometry():
    """Small box [-2, 2]^3 with 16 cells per axis."""
    return GridGeometry(extent=2.0, cells=16)


def _dipole_density(geometry: GridGeometry) -> np.ndarray:
    """Neutral density: odd in x, smooth and compactly supported."""
    X, Y, Z = geometry.mesh()
    r2 = X ** 2 + Y ** 2 + Z ** 2
    return np.where(r2 < 1.0, X * (1.0 - r2) ** 3, 0.0)


def _edge_potential(geometry: GridGeometry, seed: int = 0):
    rng = np.random.default_rng(seed)
    return [rng.normal(size=geometry.staggered_shape(o)) for o in E_OFFSETS]


class TestTimeStep:
    """Tests for the CFL bound."""

    def test_cfl_limit(self, geometry):
        """Test dx/sqrt(3)."""
        assert cfl_limit(geometry.dx) == pytest.approx(0.25 / np.sqrt(3.0))

    def test_advance_rejects_large_dt(self, geometry):
        """Test that a step above the CFL bound raises CFLViolationError."""
        grid = FieldGrid.zeros(geometry, dt=geometry.dx)

        with pytest.raises(CFLViolationError) as exc_info:
            advance_fields(grid)

        assert exc_info.value.key_path == "[time].dt"


class TestInitFields:
    """Tests for init_fields."""

    def test_discrete_gauss_law(self, geometry):
        """Test that the discrete Poisson symbol gives div E0 = rho0 at interior nodes."""
        rho = _dipole_density(geometry)
        grid = init_fields(rho, None, geometry, dt=0.5 * cfl_limit(geometry.dx))

        residual = divergence_E(grid) - rho[1:-1, 1:-1, 1:-1]
        assert np.max(np.abs(residual)) < 1e-9 * np.max(np.abs(rho))

    def test_continuous_symbol_is_close(self, geometry):
        """Test that the continuous symbol leaves a small, nonzero residual."""
        rho = _dipole_density(geometry)
        grid = init_fields(rho, None, geometry, dt=0.1, symbol=PoissonSymbol.CONTINUOUS)

        residual = np.max(np.abs(divergence_E(grid) - rho[1:-1, 1:-1, 1:-1]))
        assert 1e-6 * np.max(np.abs(rho)) < residual < np.max(np.abs(rho))

    def test_magnetic_potential_gives_divergence_free_b(self, geometry):
        """Test that B0 = curl A has zero discrete divergence."""
        grid = init_fields(np.zeros(geometry.node_shape), _edge_potential(geometry), geometry, dt=0.1)

        assert np.max(np.abs(divergence_B(grid))) < 1e-10
        assert np.max(np.abs(grid.bx)) > 0.0

    def test_zero_density_gives_zero_e(self, geometry):
        """Test that no charge means no electric field."""
        grid = init_fields(np.zeros(geometry.node_shape), None, geometry, dt=0.1)

        assert all(not np.any(a) for a in grid.E + grid.B)
        assert grid.time == 0.0

    def test_non_neutral_density(self, geometry):
        """Test that a net charge raises NeutralityError."""
        with pytest.raises(NeutralityError) as exc_info:
            init_fields(np.ones(geometry.node_shape), None, geometry, dt=0.1)

        assert exc_info.value.net_charge > 0

    def test_density_shape_mismatch(self, geometry):
        """Test that a wrong density shape raises GridShapeError."""
        with pytest.raises(GridShapeError):
            init_fields(np.zeros((4, 4, 4)), None, geometry, dt=0.1)


class TestAdvanceFields:
    """Tests for the leapfrog update."""

    def test_vacuum_preserves_div_b_and_discrete_energy(self, geometry):
        """Test divergence-free B and exact discrete energy over vacuum steps."""
        rng = np.random.default_rng(1)
        grid = init_fields(np.zeros(geometry.node_shape), _edge_potential(geometry), geometry,
                           dt=0.9 * cfl_limit(geometry.dx))
        grid.ex[:, 1:-1, 1:-1] = rng.normal(size=grid.ex[:, 1:-1, 1:-1].shape)
        energy0 = discrete_energy(grid)

        for _ in range(20):
            advance_fields(grid)

        assert grid.step == 20
        assert grid.time == pytest.approx(20 * grid.dt)
        assert np.max(np.abs(divergence_B(grid))) < 1e-9
        assert discrete_energy(grid) == pytest.approx(energy0, rel=1e-10)

    def test_step_fields_leaves_input_untouched(self, geometry):
        """Test that the functional form returns a new grid."""
        grid = init_fields(np.zeros(geometry.node_shape), _edge_potential(geometry), geometry, dt=0.1)
        before = grid.bx.copy()

        advanced = step_fields(grid)

        np.testing.assert_array_equal(grid.bx, before)
        assert advanced.step == 1
        assert grid.step == 0

    def test_current_shape_mismatch(self, geometry):
        """Test that a wrong current shape raises GridShapeError."""
        grid = FieldGrid.zeros(geometry, dt=0.1)
        j = [np.zeros(geometry.node_shape)] * 3

        with pytest.raises(GridShapeError):
            advance_fields(grid, j)

    def test_current_drives_e(self, geometry):
        """Test that a uniform interior current lowers E by dt * j."""
        grid = FieldGrid.zeros(geometry, dt=0.1)
        j = [np.ones(geometry.staggered_shape(o)) for o in E_OFFSETS]

        advance_fields(grid, j)

        assert grid.ex[3, 5, 5] == pytest.approx(-0.1)
        assert grid.ex[3, 0, 5] == 0.0


class TestSampling:
    """Tests for sample_fields."""

    def test_uniform_field(self, geometry):
        """Test that a constant component interpolates to itself."""
        grid = FieldGrid.zeros(geometry, dt=0.1)
        grid.ex[...] = 2.0
        grid.bz[...] = -1.0

        E, B = sample_fields(grid, [[0.3, -0.2, 0.7], [0.0, 0.0, 0.0]])

        np.testing.assert_allclose(E, [[2.0, 0.0, 0.0]] * 2)
        np.testing.assert_allclose(B, [[0.0, 0.0, -1.0]] * 2)

    def test_single_position(self, geometry):
        """Test that one position gives 3-vectors."""
        E, B = sample_fields(FieldGrid.zeros(geometry, dt=0.1), [0.0, 0.0, 0.0])

        assert E.shape == (3,)
        assert B.shape == (3,)

    def test_out_of_domain(self, geometry):
        """Test that positions within dx of the wall raise OutOfDomainError."""
        with pytest.raises(OutOfDomainError):
            sample_fields(FieldGrid.zeros(geometry, dt=0.1), [1.95, 0.0, 0.0])


class TestDiagnostics:
    """Tests for cone_mask and field_diagnostics."""

    def test_cone_mask_falls_back_to_nearest_cell(self, geometry):
        """Test that a zero radius keeps the cells nearest the origin."""
        mask = cone_mask(geometry, 0.0)

        assert mask.sum() == 8

    def test_cone_mask_radius(self, geometry):
        """Test that a radius beyond the box corner keeps every cell."""
        assert cone_mask(geometry, 10.0).all()

    def test_zero_fields(self, geometry):
        """Test that empty fields give zero norms and residuals."""
        diag = field_diagnostics(FieldGrid.zeros(geometry, dt=0.1, time=1.0), None, support_params(0.5))

        assert diag.sup_e_cone == 0.0
        assert diag.sup_b == 0.0
        assert diag.div_b_residual == 0.0
        assert diag.energy == 0.0


class TestScalarWave:
    """Tests for scalar_wave_leapfrog."""

    def test_zero_data_stays_zero(self, geometry):
        """Test that zero initial data give zero."""
        psi = scalar_wave_leapfrog(np.zeros(geometry.node_shape), geometry, dt=0.1, steps=5)

        assert not np.any(psi)

    def test_boundary_held_at_zero(self, geometry):
        """Test that boundary nodes stay zero."""
        X, Y, Z = geometry.mesh()
        psi0 = np.exp(-4.0 * (X ** 2 + Y ** 2 + Z ** 2))

        psi = scalar_wave_leapfrog(psi0, geometry, dt=0.1, steps=4)

        assert not np.any(psi[0]) and not np.any(psi[:, -1]) and not np.any(psi[:, :, 0])
        assert psi[8, 8, 8] < psi0[8, 8, 8]
