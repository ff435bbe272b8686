"""Discrete spatial derivative and Hamiltonian for the 1+1D Dirac equation.

The first derivative is the compact averaged-difference scheme

    (1/4) (f'_{j-1} + 2 f'_j + f'_{j+1}) = (f_{j+1} - f_{j-1}) / (2 d_x)

written as D = M^-1 S with M = tridiag(1, 2, 1)/4 and
S = tridiag(-1, 0, 1)/(2 d_x), closed with zero ghost values beyond both
edges.  On smooth fields away from the boundary its symbol is
(2/d_x) tan(k d_x / 2) = k (1 + (k d_x)^2 / 12 + ...), a second-order
approximation.  Two facts about this closure matter downstream:

  * D is not exactly antisymmetric.  D + D^T has rank 2 and the defect
    is carried by a global oscillating mode sourced at the edges, so
    antisymmetry (and H hermiticity) holds only on fields that stay
    smooth and away from the boundary.
  * The eigenvalues of D are exactly (2 i / d_x) cot(pi m / (n + 1)),
    m = 1..n.  The spectral radius is therefore (2/d_x) cot(pi/(n+1)),
    about 2 n / pi^2 times LARGER than the pi/d_x suggested by the
    smooth-field symbol: the near-Nyquist modes of a Pade derivative
    are huge.  Polynomial propagators must enclose the full spectrum,
    so plan construction uses spectral_bounds_exact below; the
    symbol-based spectral_bounds is kept as the smooth-sector estimate.

The Hamiltonian acts on spinor fields as

    (H psi)_upper = (V + m) upper - i D lower
    (H psi)_lower = -i D upper + (V - m) lower

with site-wise potential V_j and mass m_j.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import get_lapack_funcs

from .errors import ConfigError
from .grid import Grid1D, SpinorField


class DerivativeOperator:
    """Compact first derivative with zero ghosts, factorized once."""

    def __init__(self, grid: Grid1D):
        self.grid = grid
        n = grid.n_points
        dl = np.full(n - 1, 0.25, dtype=complex)
        d = np.full(n, 0.50, dtype=complex)
        du = np.full(n - 1, 0.25, dtype=complex)
        gttrf, gttrs = get_lapack_funcs(("gttrf", "gttrs"), (d,))
        dl_f, d_f, du_f, du2, ipiv, info = gttrf(dl, d, du)
        if info != 0:
            raise ConfigError(f"tridiagonal factorization failed, info={info}")
        self._factors = (dl_f, d_f, du_f, du2, ipiv)
        self._gttrs = gttrs

    def _stencil(self, rows: np.ndarray) -> np.ndarray:
        """S applied to each row of a (k, n) array, returned as (n, k)."""
        inv2dx = 1.0 / (2.0 * self.grid.d_x)
        y = np.atleast_2d(rows)
        rhs = np.empty((y.shape[1], y.shape[0]), dtype=complex)
        rhs[1:-1, :] = (y[:, 2:] - y[:, :-2]).T
        rhs[0, :] = y[:, 1]
        rhs[-1, :] = -y[:, -2]
        rhs *= inv2dx
        return rhs

    def apply_rows(self, rows: np.ndarray) -> np.ndarray:
        """Apply D along the last axis of a (k, n) or (n,) array."""
        squeeze = rows.ndim == 1
        rhs = self._stencil(rows)
        x, info = self._gttrs(*self._factors, rhs)
        if info != 0:
            raise ConfigError(f"tridiagonal solve failed, info={info}")
        out = x.T
        return out[0] if squeeze else out

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.apply_rows(np.asarray(values, dtype=complex))

    def dense_matrix(self) -> np.ndarray:
        """Independent dense route: solve(M, S) with explicit matrices."""
        n = self.grid.n_points
        m = (
            np.diag(np.full(n, 0.5))
            + np.diag(np.full(n - 1, 0.25), 1)
            + np.diag(np.full(n - 1, 0.25), -1)
        )
        s = (
            np.diag(np.full(n - 1, 1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)
        ) / (2.0 * self.grid.d_x)
        return np.linalg.solve(m, s)

    def spectral_radius(self) -> float:
        """Exact: largest |eigenvalue| of D for the zero-ghost closure."""
        n = self.grid.n_points
        return 2.0 / (self.grid.d_x * np.tan(np.pi / (n + 1)))


@dataclass
class HamiltonianOperator:
    """H = [[V + m, -i D], [-i D, V - m]] with site-wise V and m."""

    grid: Grid1D
    potential: np.ndarray
    mass: np.ndarray
    deriv: DerivativeOperator = field(default=None, repr=False)

    def __post_init__(self):
        n = self.grid.n_points
        self.potential = np.broadcast_to(
            np.asarray(self.potential, dtype=float), (n,)
        ).copy()
        self.mass = np.broadcast_to(np.asarray(self.mass, dtype=float), (n,)).copy()
        if self.deriv is None:
            self.deriv = DerivativeOperator(self.grid)

    def apply_array(self, psi: np.ndarray) -> np.ndarray:
        """H acting on a packed (2, n) array."""
        d = self.deriv.apply_rows(psi)
        out = np.empty_like(psi)
        out[0] = (self.potential + self.mass) * psi[0] - 1j * d[1]
        out[1] = -1j * d[0] + (self.potential - self.mass) * psi[1]
        return out

    def apply(self, psi: SpinorField) -> SpinorField:
        if psi.grid != self.grid:
            raise ConfigError("field grid does not match operator grid")
        out = self.apply_array(psi.as_array())
        return SpinorField(self.grid, out[0], out[1])

    @property
    def m_absmax(self) -> float:
        return float(np.max(np.abs(self.mass)))


@dataclass(frozen=True)
class SpectralInterval:
    """Enclosure [e_min, e_max] of the Hamiltonian spectrum."""

    e_min: float
    e_max: float

    def __post_init__(self):
        if not self.e_max > self.e_min:
            raise ConfigError(f"empty spectral interval [{self.e_min}, {self.e_max}]")

    @property
    def width(self) -> float:
        return self.e_max - self.e_min

    @property
    def center(self) -> float:
        return 0.5 * (self.e_max + self.e_min)

    def widened(self, fraction: float) -> "SpectralInterval":
        """Stretch symmetrically about the center by the given fraction."""
        half = 0.5 * self.width * (1.0 + fraction)
        return SpectralInterval(self.center - half, self.center + half)


def spectral_bounds(v_min, v_max, m_max, d_x) -> SpectralInterval:
    """Smooth-sector estimate from the symbol, momenta capped at pi/d_x.

    e_max = v_max + sqrt(pi^2/d_x^2 + m_max^2) and the mirrored e_min.
    Valid for the modes a resolved wave packet actually occupies; the
    full matrix spectrum is larger, see spectral_bounds_exact.
    """
    reach = np.sqrt((np.pi / d_x) ** 2 + m_max**2)
    return SpectralInterval(v_min - reach, v_max + reach)


def spectral_bounds_exact(v_min, v_max, m_max, d_x, n_points) -> SpectralInterval:
    """Enclosure of the full discrete spectrum, near-Nyquist modes included.

    Uses the exact spectral radius c = (2/d_x) cot(pi/(n+1)) of the
    zero-ghost compact derivative; for constant coefficients the
    Hamiltonian eigenvalues are exactly V +- sqrt(m^2 + c_m^2).
    """
    c = 2.0 / (d_x * np.tan(np.pi / (n_points + 1)))
    reach = np.sqrt(c**2 + m_max**2)
    return SpectralInterval(v_min - reach, v_max + reach)


def bounds_for(h: HamiltonianOperator, margin: float = 0.05) -> SpectralInterval:
    """Widened exact enclosure for an assembled Hamiltonian."""
    interval = spectral_bounds_exact(
        float(np.min(h.potential)),
        float(np.max(h.potential)),
        h.m_absmax,
        h.grid.d_x,
        h.grid.n_points,
    )
    return interval.widened(margin)
