"""Grid, Gaussian packet construction, density bookkeeping."""

import numpy as np
import pytest

from dirac1d.errors import (
    ConfigError,
    NormalizationError,
    PacketTooWideError,
)
from dirac1d.grid import (
    EDGE_MASS_TOL,
    GaussianSpec,
    Grid1D,
    SpinorField,
    edge_mass,
    expectation_position,
    field_from_array,
    make_gaussian_spinor,
    norm_squared,
    probability_density,
)

R2 = 1.0 / np.sqrt(2.0)


def test_grid_nodes_and_spacing():
    grid = Grid1D(1024, 1.0)
    assert grid.d_x == pytest.approx(2.0 / 1023)
    assert grid.x[0] == -1.0 and grid.x[-1] == 1.0
    # node coordinates are x_min + j d_x
    j = np.arange(1024)
    np.testing.assert_allclose(grid.x, -1.0 + j * grid.d_x, atol=1e-14)


def test_grid_guards():
    with pytest.raises(ConfigError):
        Grid1D(7, 1.0)  # below the minimum size
    with pytest.raises(ConfigError):
        Grid1D(64, 0.0)
    with pytest.raises(ConfigError):
        Grid1D(64, -2.0)
    Grid1D(8, 1.0)  # smallest legal grid


def test_static_packet_components_equal():
    grid = Grid1D(1024, 1.0)
    spec = GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    field = make_gaussian_spinor(grid, spec)
    np.testing.assert_allclose(field.upper, field.lower, rtol=0, atol=1e-15)
    assert norm_squared(field) == pytest.approx(1.0, abs=1e-12)


def test_upper_only_packet_has_zero_lower():
    grid = Grid1D(1024, 1.0)
    spec = GaussianSpec(sigma=0.04, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    field = make_gaussian_spinor(grid, spec)
    assert np.all(field.lower == 0)
    assert norm_squared(field) == pytest.approx(1.0, abs=1e-12)


def test_every_constructed_packet_is_normalized():
    grid = Grid1D(600, 2.0)
    rng = np.random.default_rng(7)
    for _ in range(20):
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        amp /= np.linalg.norm(amp)
        spec = GaussianSpec(
            sigma=float(rng.uniform(0.02, 0.15)),
            k1=float(rng.uniform(-20, 20)),
            k2=float(rng.uniform(-20, 20)),
            Sigma0=complex(amp[0]),
            X0=complex(amp[1]),
            x_center=float(rng.uniform(-0.3, 0.3)),
        )
        field = make_gaussian_spinor(grid, spec)
        assert abs(norm_squared(field) - 1.0) < 1e-12


def test_gaussian_spec_rejects_unnormalized_amplitudes():
    with pytest.raises(ConfigError):
        GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=1.0 + 0j)
    with pytest.raises(ConfigError):
        GaussianSpec(sigma=-0.1, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    # the builder normalizes arbitrary amplitude pairs
    spec = GaussianSpec.normalized(0.1, 0.0, 0.0, 3.0 + 0j, 4.0j)
    assert abs(spec.Sigma0) ** 2 + abs(spec.X0) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_probability_density_forms():
    grid = Grid1D(16, 1.0)
    upper = np.zeros(16, dtype=complex)
    lower = np.zeros(16, dtype=complex)
    field = SpinorField(grid, upper.copy(), lower.copy())
    assert np.all(probability_density(field) == 0.0)

    # single occupied node with |Sigma|^2 + |X|^2 = 1
    upper[5] = R2
    lower[5] = R2 * 1j
    field = SpinorField(grid, upper, lower)
    p = probability_density(field)
    assert p[5] == pytest.approx(1.0, abs=1e-15)
    assert np.sum(p) == pytest.approx(1.0)
    assert np.all(p >= 0)


def test_norm_squared_bilinearity():
    grid = Grid1D(256, 1.0)
    spec = GaussianSpec(sigma=0.05, k1=3.0, k2=-1.0, Sigma0=0.6 + 0j, X0=0.8j)
    field = make_gaussian_spinor(grid, spec)
    doubled = SpinorField(grid, 2.0 * field.upper, 2.0 * field.lower)
    assert norm_squared(doubled) == pytest.approx(4.0 * norm_squared(field), rel=1e-13)


def test_density_sums_to_norm():
    grid = Grid1D(300, 1.5)
    rng = np.random.default_rng(3)
    arr = rng.normal(size=(2, 300)) + 1j * rng.normal(size=(2, 300))
    field = field_from_array(grid, arr)
    total = np.sum(probability_density(field)) * grid.d_x
    assert total == pytest.approx(norm_squared(field), rel=1e-13)


def test_expectation_position_symmetric_and_shifted():
    grid = Grid1D(1024, 1.0)
    spec = GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    assert abs(expectation_position(make_gaussian_spinor(grid, spec))) < 1e-10

    shifted = GaussianSpec(
        sigma=0.1, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j, x_center=0.3
    )
    x_mean = expectation_position(make_gaussian_spinor(grid, shifted))
    assert abs(x_mean - 0.3) < 5.0 * grid.d_x


def test_expectation_position_requires_normalization():
    grid = Grid1D(256, 1.0)
    spec = GaussianSpec(sigma=0.05, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    field = make_gaussian_spinor(grid, spec)
    field = SpinorField(grid, 1.5 * field.upper, 1.5 * field.lower)
    with pytest.raises(NormalizationError):
        expectation_position(field)


def test_translation_covariance_one_step():
    # moving x_center by one lattice step shifts the density by one index
    grid = Grid1D(1024, 1.0)
    base = GaussianSpec(sigma=0.08, k1=5.0, k2=5.0, Sigma0=R2 + 0j, X0=R2 * 1j)
    moved = GaussianSpec(
        sigma=0.08, k1=5.0, k2=5.0, Sigma0=R2 + 0j, X0=R2 * 1j, x_center=grid.d_x
    )
    p0 = probability_density(make_gaussian_spinor(grid, base))
    p1 = probability_density(make_gaussian_spinor(grid, moved))
    assert np.max(np.abs(p1[1:] - p0[:-1])) < 1e-10


def test_packet_too_wide_raises():
    grid = Grid1D(128, 1.0)
    with pytest.raises(PacketTooWideError):
        make_gaussian_spinor(
            grid, GaussianSpec(sigma=0.5, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
        )
    with pytest.raises(PacketTooWideError):
        # narrow packet parked close to the wall
        make_gaussian_spinor(
            grid,
            GaussianSpec(
                sigma=0.05, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j, x_center=0.98
            ),
        )


def test_edge_mass_measures_boundary_probability():
    grid = Grid1D(200, 1.0)
    p = np.zeros(200)
    p[3] = 0.5 / grid.d_x
    p[150] = 0.5 / grid.d_x
    # node 3 lies within the 10-node boundary strip, node 150 does not
    assert edge_mass(p, grid.d_x) == pytest.approx(0.5, rel=1e-12)
    spec = GaussianSpec(sigma=0.05, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    field = make_gaussian_spinor(grid, spec)
    assert edge_mass(probability_density(field), grid.d_x) < EDGE_MASS_TOL


def test_field_from_array_shape_guard():
    grid = Grid1D(64, 1.0)
    with pytest.raises(ConfigError):
        field_from_array(grid, np.zeros((2, 63), dtype=complex))
