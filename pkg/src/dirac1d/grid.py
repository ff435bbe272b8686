"""Spatial grid and two-component spinor fields.

Conventions used throughout the package (natural units, hbar = c = 1):

  * space is a symmetric interval [-x_max, x_max] sampled on n uniform
    nodes including both endpoints, d_x = 2 x_max / (n - 1);
  * a spinor field stores its upper and lower components as complex
    arrays over the grid nodes;
  * probability density p_j = |upper_j|^2 + |lower_j|^2 and norms are
    trapezoid-free plain Riemann sums, sum(p) * d_x, which is what the
    discrete evolution conserves.

The canonical initial state is a Gaussian packet

    upper(x) = N Sigma0 exp(i k1 x') exp(-x'^2 / (4 sigma^2))
    lower(x) = N X0     exp(i k2 x') exp(-x'^2 / (4 sigma^2))

with x' = x - x_center and N = (2 pi sigma^2)^(-1/4), renormalized on
the discrete grid so the Riemann-sum norm is exactly one.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NormalizationError, PacketTooWideError

# Nodes counted on each edge by the boundary-mass checks, and the mass
# beyond which a packet is considered to touch the boundary.
EDGE_NODES = 10
EDGE_MASS_TOL = 1e-8


@dataclass(frozen=True)
class Grid1D:
    """Uniform symmetric grid with inclusive endpoints."""

    n_points: int
    extent: float

    def __post_init__(self):
        if self.n_points < 8:
            raise ConfigError(f"grid needs at least 8 points, got {self.n_points}")
        if not (self.extent > 0):
            raise ConfigError(f"grid extent must be positive, got {self.extent}")

    @property
    def d_x(self) -> float:
        return 2.0 * self.extent / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n_points)


@dataclass(frozen=True)
class GaussianSpec:
    """Parameters of the two-component Gaussian packet.

    sigma     position-space width of the envelope
    k1, k2    carrier momenta of the upper and lower components
    Sigma0    complex amplitude of the upper component
    X0        complex amplitude of the lower component
    x_center  center of the envelope
    """

    sigma: float
    k1: float = 0.0
    k2: float = 0.0
    Sigma0: complex = 1.0 + 0.0j
    X0: complex = 0.0 + 0.0j
    x_center: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ConfigError(f"packet width sigma must be positive, got {self.sigma}")
        w = abs(self.Sigma0) ** 2 + abs(self.X0) ** 2
        if abs(w - 1.0) > 1e-12:
            raise ConfigError(
                f"spinor amplitudes must satisfy |Sigma0|^2 + |X0|^2 = 1, got {w!r}"
            )

    @staticmethod
    def normalized(sigma, k1=0.0, k2=0.0, Sigma0=1.0, X0=0.0, x_center=0.0):
        """Build a spec, rescaling (Sigma0, X0) onto the unit sphere."""
        w = np.sqrt(abs(Sigma0) ** 2 + abs(X0) ** 2)
        if w == 0:
            raise ConfigError("spinor amplitudes cannot both vanish")
        return GaussianSpec(sigma, k1, k2, Sigma0 / w, X0 / w, x_center)


@dataclass
class SpinorField:
    """Two-component complex field sampled on a grid."""

    grid: Grid1D
    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        n = self.grid.n_points
        if self.upper.shape != (n,) or self.lower.shape != (n,):
            raise ConfigError(
                f"component shapes {self.upper.shape}, {self.lower.shape} "
                f"do not match grid size {n}"
            )

    def as_array(self) -> np.ndarray:
        """Pack components into a (2, n) complex array (copy)."""
        return np.array([self.upper, self.lower], dtype=complex)

    def copy(self) -> "SpinorField":
        return replace(self, upper=self.upper.copy(), lower=self.lower.copy())


def field_from_array(grid: Grid1D, psi: np.ndarray) -> SpinorField:
    """Inverse of SpinorField.as_array."""
    return SpinorField(grid, psi[0].copy(), psi[1].copy())


def probability_density(field: SpinorField) -> np.ndarray:
    return np.abs(field.upper) ** 2 + np.abs(field.lower) ** 2


def norm_squared(field: SpinorField) -> float:
    return float(np.sum(probability_density(field)) * field.grid.d_x)


def expectation_position(field: SpinorField) -> float:
    """Discrete <x>; the field must arrive normalized."""
    p = probability_density(field)
    w = np.sum(p) * field.grid.d_x
    if abs(w - 1.0) > 1e-6:
        raise NormalizationError(
            f"expectation_position needs a normalized field, norm^2 = {w!r}"
        )
    return float(np.sum(field.grid.x * p) * field.grid.d_x)


def edge_mass(p: np.ndarray, d_x: float, edge_nodes: int = EDGE_NODES) -> float:
    """Probability mass carried by the outermost nodes on both edges."""
    k = min(edge_nodes, len(p) // 2)
    return float((np.sum(p[:k]) + np.sum(p[-k:])) * d_x)


def make_gaussian_spinor(grid: Grid1D, spec: GaussianSpec) -> SpinorField:
    """Sample the Gaussian packet on the grid and renormalize exactly.

    Raises PacketTooWideError when more than EDGE_MASS_TOL of the
    probability sits on the outer EDGE_NODES nodes of either side: such
    a packet cannot be represented (or evolved) on this box.
    """
    xs = grid.x - spec.x_center
    envelope = np.exp(-(xs**2) / (4.0 * spec.sigma**2))
    n_g = (2.0 * np.pi * spec.sigma**2) ** (-0.25)
    upper = n_g * spec.Sigma0 * np.exp(1j * spec.k1 * xs) * envelope
    lower = n_g * spec.X0 * np.exp(1j * spec.k2 * xs) * envelope
    field = SpinorField(grid, upper, lower)

    w = norm_squared(field)
    if w <= 0:
        raise ConfigError("packet has zero norm on this grid")
    field.upper /= np.sqrt(w)
    field.lower /= np.sqrt(w)

    if edge_mass(probability_density(field), grid.d_x) > EDGE_MASS_TOL:
        raise PacketTooWideError(
            f"packet with sigma={spec.sigma} at x_center={spec.x_center} "
            f"carries more than {EDGE_MASS_TOL} probability on the outer "
            f"{EDGE_NODES} nodes of a box with extent {grid.extent}"
        )
    return field
