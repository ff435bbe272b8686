"""Free-particle analytics: eigenspinors, projections, exact and
approximate propagation, dispersion laws.

Reference numbers were frozen from independent high-precision runs
(mpmath quadrature and finite differences, dense 2x2 eigensolves).
"""

import numpy as np
import pytest

from dirac1d.errors import (
    ApproximationDomainError,
    ConfigError,
    DegenerateModeError,
)
from dirac1d.free import (
    PlaneWaveMode,
    QuadratureSpec,
    dispersion_rate,
    dispersion_width,
    dispersion_width_exact,
    eigenspinor,
    eigenspinor_pointwise_norm,
    large_sigma_coeffs,
    large_sigma_propagate,
    momentum_hamiltonian,
    project_gaussian,
    select_sigma_min,
    spectral_propagate,
    ultra_relativistic_density,
)
from dirac1d.grid import (
    GaussianSpec,
    Grid1D,
    make_gaussian_spinor,
    norm_squared,
    probability_density,
)

R2 = 1.0 / np.sqrt(2.0)


def rel_l2(a, b, d_x):
    num = np.sqrt(np.sum(np.abs(a - b) ** 2) * d_x)
    den = np.sqrt(np.sum(np.abs(b) ** 2) * d_x)
    return num / den


def field_rel_l2(f, g):
    num = np.sum(np.abs(f.upper - g.upper) ** 2) + np.sum(np.abs(f.lower - g.lower) ** 2)
    den = np.sum(np.abs(g.upper) ** 2) + np.sum(np.abs(g.lower) ** 2)
    return np.sqrt(num / den)


# ---------------------------------------------------------------- modes


def test_momentum_hamiltonian_eigenvalues():
    for k, m in [(3.0, 4.0), (0.0, 1.0), (1.0, 0.0), (-2.0, 1.5)]:
        h = momentum_hamiltonian(k, m)
        np.testing.assert_allclose(h, [[m, k], [k, -m]])
        vals = np.linalg.eigvalsh(h)
        w = np.hypot(k, m)
        np.testing.assert_allclose(vals, [-w, w], atol=1e-12)


def test_eigenspinors_diagonalize_h():
    # h(k) psi = +- omega psi on the spinor factor
    for k, m in [(3.0, 4.0), (-7.0, 0.5), (0.2, 11.0)]:
        h = momentum_hamiltonian(k, m)
        w = np.hypot(k, m)
        for branch, sign in (("positive", 1.0), ("negative", -1.0)):
            vec = eigenspinor(PlaneWaveMode(k, m, branch), 0.0)
            np.testing.assert_allclose(h @ vec, sign * w * vec, atol=1e-12)


def test_pointwise_norm_is_inverse_two_pi():
    kms = [(3.0, 4.0), (1e-9, 1.0), (1e-12, 5.0), (5.0, 0.0), (-0.3, 2.0)]
    for k, m in kms:
        for branch in ("positive", "negative"):
            mode = PlaneWaveMode(k, m, branch)
            assert eigenspinor_pointwise_norm(mode) * 2.0 * np.pi == pytest.approx(
                1.0, abs=1e-13
            )


def test_rest_frame_positive_spinor():
    vec = eigenspinor(PlaneWaveMode(0.0, 1.0, "positive"), 0.0)
    assert vec[0] == pytest.approx(1.0 / np.sqrt(2.0 * np.pi), abs=1e-15)
    assert vec[1] == 0.0


def test_massless_spinor_closed_form():
    # m=0: (1, sgn k)/(2 sqrt(pi)) and (-1, sgn k)/(2 sqrt(pi))
    for k in (4.0, -4.0):
        s = np.sign(k)
        pos = eigenspinor(PlaneWaveMode(k, 0.0, "positive"), 0.0)
        neg = eigenspinor(PlaneWaveMode(k, 0.0, "negative"), 0.0)
        np.testing.assert_allclose(pos, np.array([1.0, s]) / (2 * np.sqrt(np.pi)), atol=1e-15)
        np.testing.assert_allclose(neg, np.array([-1.0, s]) / (2 * np.sqrt(np.pi)), atol=1e-15)


def test_plane_wave_phase():
    mode = PlaneWaveMode(2.0, 1.0, "positive")
    x = np.linspace(-1, 1, 11)
    vals = eigenspinor(mode, x)
    np.testing.assert_allclose(
        vals[0], vals[0][5] * np.exp(2j * x) / np.exp(2j * x[5]), atol=1e-14
    )


def test_mode_guards():
    with pytest.raises(DegenerateModeError):
        PlaneWaveMode(0.0, 1.0, "negative")
    with pytest.raises(ConfigError):
        PlaneWaveMode(1.0, -1.0, "positive")
    with pytest.raises(ConfigError):
        PlaneWaveMode(1.0, 1.0, 1)  # branch must be a string label
    # tiny but nonzero momentum keeps the negative branch well-defined
    vec = eigenspinor(PlaneWaveMode(1e-9, 1.0, "negative"), 0.0)
    assert np.all(np.isfinite(vec))


def test_orthonormality_quadrature():
    """Discrete x-quadrature of psi_k^dag psi_k' falls off for far k."""
    x = np.linspace(-40, 40, 16001)
    d_x = x[1] - x[0]
    m = 2.0
    window = 2.0 * np.pi / 80.0
    k0 = 3.0
    base = eigenspinor(PlaneWaveMode(k0, m, "positive"), x)
    for dk in (4 * window, 9 * window, 40 * window):
        other = eigenspinor(PlaneWaveMode(k0 + dk, m, "positive"), x)
        overlap = np.sum(np.conj(base[0]) * other[0] + np.conj(base[1]) * other[1]) * d_x
        assert abs(overlap) < 1e-3
    # cross-branch overlap at the same k vanishes identically
    neg = eigenspinor(PlaneWaveMode(k0, m, "negative"), x)
    cross = np.sum(np.conj(base[0]) * neg[0] + np.conj(base[1]) * neg[1]) * d_x
    assert abs(cross) < 1e-3


# ------------------------------------------------------------ projection


def test_completeness_three_packet_shapes():
    # independent quadrature oracle gives exactly 1 for each of these
    shapes = [
        dict(sigma=0.1, k1=3.0, k2=3.0, Sigma0=R2 + 0j, X0=R2 + 0j, m=2.0),
        dict(sigma=0.1, k1=10.0, k2=-10.0, Sigma0=0.6 + 0j, X0=0.8j, m=50.0),
        dict(sigma=0.04, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j, m=500.0),
    ]
    for sh in shapes:
        m = sh.pop("m")
        spec = GaussianSpec(**sh)
        half = 8.0 / spec.sigma
        k = np.linspace(min(spec.k1, spec.k2) - half, max(spec.k1, spec.k2) + half, 4097)
        coeffs = project_gaussian(spec, m, k)
        assert abs(coeffs.completeness() - 1.0) < 1e-6


def test_projection_massless_closed_form():
    # m=0 collapses the branch amplitudes to (G1 +- sgn(k) G2)/sqrt(2)
    spec = GaussianSpec(sigma=0.1, k1=12.0, k2=12.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    k = np.linspace(2.0, 22.0, 801)
    coeffs = project_gaussian(spec, 0.0, k)
    n_g = (2.0 * np.pi * spec.sigma**2) ** -0.25
    pref = n_g * spec.sigma * np.sqrt(2.0)
    g = np.exp(-((k - 12.0) ** 2) * spec.sigma**2)
    np.testing.assert_allclose(coeffs.pi_plus, pref * g * (R2 + R2) / np.sqrt(2.0), atol=1e-12)
    np.testing.assert_allclose(coeffs.pi_minus, pref * g * (R2 - R2) / np.sqrt(2.0), atol=1e-12)


# ------------------------------------------------------- exact propagation


def test_spectral_t0_reconstruction():
    grid = Grid1D(1024, 1.0)
    spec = GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    direct = make_gaussian_spinor(grid, spec)
    rebuilt = spectral_propagate(spec, 30.0, 0.0, grid)
    assert field_rel_l2(rebuilt, direct) < 1e-8


def test_spectral_norm_and_parity():
    grid = Grid1D(1024, 1.0)
    # upper-only zero-momentum data is parity-even (the lower component
    # it develops is odd and enters the density squared)
    spec = GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    evolved = spectral_propagate(spec, 30.0, 0.3, grid)
    assert norm_squared(evolved) == pytest.approx(1.0, abs=1e-8)
    p = probability_density(evolved)
    assert np.max(np.abs(p - p[::-1])) / np.max(p) < 1e-8


def test_spectral_matches_ultra_relativistic():
    grid = Grid1D(2048, 2.0)
    spec = GaussianSpec(sigma=0.1, k1=10.0, k2=10.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    for t in (0.0, 0.4, 0.9):
        evolved = spectral_propagate(spec, 0.0, t, grid)
        p = probability_density(evolved)
        ur = ultra_relativistic_density(grid.x, t, spec)
        assert rel_l2(p, ur, grid.d_x) < 1e-6


def test_ultra_relativistic_splits_at_light_cone():
    grid = Grid1D(2048, 2.0)
    spec = GaussianSpec(sigma=0.05, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    t = 0.8
    p = ultra_relativistic_density(grid.x, t, spec)
    peaks = grid.x[np.argsort(p)[-2:]]
    assert sorted(np.round(peaks, 2)) == [-0.8, 0.8]
    assert np.sum(p) * grid.d_x == pytest.approx(1.0, rel=1e-6)


def test_quadrature_spec_guards():
    with pytest.raises(ConfigError):
        QuadratureSpec(n_nodes=4096)  # Simpson needs odd counts
    with pytest.raises(ConfigError):
        QuadratureSpec(window=4.0)
    grid = Grid1D(1024, 1.0)
    spec = GaussianSpec(sigma=0.02, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    with pytest.raises(ConfigError):
        # 65 nodes over a 800-wide window cannot resolve the phases
        spectral_propagate(spec, 1.0, 0.5, grid, QuadratureSpec(n_nodes=65))


def test_spectral_rejects_negative_mass():
    grid = Grid1D(512, 1.0)
    spec = GaussianSpec(sigma=0.1, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)
    with pytest.raises(ConfigError):
        spectral_propagate(spec, -1.0, 0.1, grid)


# ------------------------------------------------------------ wide packets


def test_large_sigma_coeffs_rest_frame():
    c = large_sigma_coeffs(0.0, 5.0, 1.0, 0.0)
    assert c.A == pytest.approx(0.0, abs=1e-14)
    assert c.B == pytest.approx(0.2, abs=1e-12)
    assert c.C == pytest.approx(0.0, abs=1e-12)
    assert c.D_plus == pytest.approx(2.0, abs=1e-12)
    assert c.D_minus == pytest.approx(0.0, abs=1e-12)


def test_large_sigma_coeffs_moving_frame():
    # five-point finite differences of k/w and (w +- m)/w at k_j=10, m=30
    c = large_sigma_coeffs(10.0, 30.0, 1.0, 0.0)
    assert c.A == pytest.approx(0.316227766017, rel=1e-11)
    assert c.B == pytest.approx(0.0284604989415, rel=1e-9)
    assert c.C == pytest.approx(-0.000426907484123, rel=1e-7)
    assert c.D_plus == pytest.approx(1.94868329805, rel=1e-11)
    assert c.D_minus == pytest.approx(0.0513167019495, rel=1e-10)


def test_large_sigma_matches_spectral():
    grid = Grid1D(4096, 8.0)
    spec = GaussianSpec(sigma=0.5, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    m = 30.0
    for t in (0.1, 0.3, 0.5):
        # sigma=0.5 sits below the advertised validity floor, which the
        # routine flags, yet the expansion still lands within 1e-2 here
        with pytest.warns(UserWarning, match="wide-packet floor"):
            approx = large_sigma_propagate(spec, m, t, grid)
        exact = spectral_propagate(spec, m, t, grid)
        assert field_rel_l2(approx, exact) < 1e-2


def test_large_sigma_t0_initial_state():
    grid = Grid1D(4096, 8.0)
    spec = GaussianSpec(sigma=0.5, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    with pytest.warns(UserWarning, match="wide-packet floor"):
        start = large_sigma_propagate(spec, 30.0, 0.0, grid)
    direct = make_gaussian_spinor(grid, spec)
    assert field_rel_l2(start, direct) < 1e-3


def test_large_sigma_massless_reduces_to_ur():
    grid = Grid1D(4096, 8.0)
    spec = GaussianSpec(sigma=0.5, k1=3.0, k2=3.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    t = 0.6
    approx = large_sigma_propagate(spec, 0.0, t, grid)
    p = probability_density(approx)
    ur = ultra_relativistic_density(grid.x, t, spec)
    assert rel_l2(p, ur, grid.d_x) < 1e-6


# ------------------------------------------------------------- sigma rule


def test_sigma_rule_frozen_values():
    assert select_sigma_min(500.0, 0.0, 0.0) == pytest.approx(0.1118592, rel=1e-5)
    assert select_sigma_min(30.0, 0.0, 0.0) == pytest.approx(1.8643201, rel=1e-5)
    assert select_sigma_min(30.0, 10.0, 10.0) == pytest.approx(1.387122, rel=1e-5)


def test_sigma_rule_monotone_in_tolerance():
    # a stricter error budget demands a wider packet
    sig = [select_sigma_min(30.0, 10.0, 10.0, eps=e) for e in (1e-2, 1e-3, 1e-4)]
    assert sig[0] < sig[1] < sig[2]


def test_sigma_rule_massless_not_applicable():
    with pytest.raises(ApproximationDomainError):
        select_sigma_min(0.0, 5.0, 5.0)


@pytest.mark.xfail(
    reason="the cubic-remainder rule itself yields 0.112 at m=500, k=0; "
    "a bound of 0.05 is not consistent with its own prescription",
    strict=True,
)
def test_sigma_rule_heavy_mass_small_claim():
    assert select_sigma_min(500.0, 0.0, 0.0) <= 0.05


# ------------------------------------------------------------- dispersion


def test_dispersion_width_frozen_values():
    assert dispersion_width(1.0, 0.1, 30.0, 0.0) == pytest.approx(
        0.348010216964, rel=1e-10
    )
    assert dispersion_width_exact(1.0, 0.1, 30.0, 0.0) == pytest.approx(
        0.194365063162, rel=1e-10
    )
    # both reduce to sigma at t=0
    assert dispersion_width(0.0, 0.1, 30.0, 0.0) == 0.1
    assert dispersion_width_exact(0.0, 0.1, 30.0, 0.0) == 0.1


def test_dispersion_rate_frozen_value():
    assert dispersion_rate(30.0, 0.1, 10.0) == pytest.approx(0.284604989415, rel=1e-10)


def test_dispersion_rate_heavy_mass_limit():
    sigma = 0.07
    for m in (1e3, 1e5, 1e7):
        assert dispersion_rate(m, sigma, 10.0) * m == pytest.approx(
            1.0 / sigma, rel=1e-4 * (1e3 / m) ** 0 + 1e3 / m**1
        )


def test_dispersion_rate_peaks_at_sqrt2_k():
    k = 10.0
    ms = np.linspace(5.0, 40.0, 7001)
    rates = [dispersion_rate(m, 0.1, k) for m in ms]
    m_star = ms[int(np.argmax(rates))]
    assert m_star == pytest.approx(np.sqrt(2.0) * k, abs=2e-2)


def test_measured_width_tracks_exact_dispersion_law():
    # gaussian fit of the evolved density vs the quarter-corrected law
    grid = Grid1D(2048, 3.0)
    sigma, m = 0.1, 30.0
    spec = GaussianSpec(sigma=sigma, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    for t in (0.1, 0.2, 0.3):
        p = probability_density(spectral_propagate(spec, m, t, grid))
        p = p / (np.sum(p) * grid.d_x)
        var = np.sum(grid.x**2 * p) * grid.d_x
        fitted = np.sqrt(var)
        assert fitted == pytest.approx(dispersion_width_exact(t, sigma, m, 0.0), rel=5e-2)


@pytest.mark.xfail(
    reason="the uncorrected law overstates spreading by 4 in its t^2 "
    "coefficient and diverges from measurement past t ~ sigma^2 m / 3",
    strict=True,
)
def test_measured_width_tracks_printed_dispersion_law_late():
    grid = Grid1D(2048, 3.0)
    sigma, m = 0.1, 30.0
    spec = GaussianSpec(sigma=sigma, k1=0.0, k2=0.0, Sigma0=R2 + 0j, X0=R2 + 0j)
    t = sigma**2 * m
    p = probability_density(spectral_propagate(spec, m, t, grid))
    p = p / (np.sum(p) * grid.d_x)
    var = np.sum(grid.x**2 * p) * grid.d_x
    assert np.sqrt(var) == pytest.approx(dispersion_width(t, sigma, m, 0.0), rel=5e-2)
