"""Free-particle solutions of the 1+1D Dirac equation in closed form.

The free Hamiltonian in momentum space is h(k) = [[m, k], [k, -m]] with
energies +-omega, omega = sqrt(k^2 + m^2), and eigenspinors

    psi_k(x) = (omega + m, k)^T e^{ikx} / sqrt(4 pi omega (omega + m))
    phi_k(x) = (m - omega, k)^T e^{ikx} / sqrt(4 pi omega (omega - m))

for the positive and negative branches.  Both have pointwise norm
1/(2 pi).  A Gaussian packet (see grid.make_gaussian_spinor) projects
onto the branches with coefficients

    Pi+(k) = N sigma [ sqrt((w+m)/w) Sigma0 G1 + sgn(k) sqrt((w-m)/w) X0 G2 ]
    Pi-(k) = N sigma [ -sqrt((w-m)/w) Sigma0 G1 + sgn(k) sqrt((w+m)/w) X0 G2 ]

with G_i = exp(-(k - k_i)^2 sigma^2), w = omega, N = (2 pi sigma^2)^(-1/4),
and evolves as

    Psi(x,t) = integral dk [ Pi+(k) psi_k(x) e^{-i omega t}
                           + Pi-(k) phi_k(x) e^{+i omega t} ].

Substituting the closed forms turns the integrand into smooth factors
(omega +- m)/omega and k/omega with no 0/0 anywhere (for m > 0), which
spectral_propagate integrates by composite Simpson quadrature.

For sigma large enough (select_sigma_min) the integral collapses to
Gaussian moment integrals after a second-order Taylor expansion of the
amplitudes and phase around each carrier k_j; large_sigma_propagate
evaluates that closed form.  The resulting packet width obeys

    sigma_j(t)^2 = sigma^2 + m^4 t^2 / (4 omega_j^6 sigma^2),

implemented by dispersion_width_exact.  dispersion_width keeps the
variant without the factor 4 in the denominator since downstream
constants were originally quoted from it; the exact law is what matches
both the quadrature solution and the nonrelativistic limit
sigma^2 + t^2/(4 m^2 sigma^2), so all internal consumers use the exact
form.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ApproximationDomainError,
    ConfigError,
    DegenerateModeError,
    QuadratureError,
    SingularSampleError,
)
from .grid import GaussianSpec, Grid1D, SpinorField, make_gaussian_spinor


def momentum_hamiltonian(k: float, m: float) -> np.ndarray:
    """2x2 momentum-space Hamiltonian [[m, k], [k, -m]]."""
    return np.array([[m, k], [k, -m]], dtype=float)


@dataclass(frozen=True)
class PlaneWaveMode:
    """One plane-wave eigenmode of the free Hamiltonian."""

    k: float
    m: float
    branch: str  # "positive" or "negative"

    def __post_init__(self):
        if self.m < 0:
            raise ConfigError(f"mass must be nonnegative, got {self.m}")
        if self.branch not in ("positive", "negative"):
            raise ConfigError(f"branch must be positive or negative, got {self.branch!r}")
        if self.branch == "negative" and self.k == 0.0:
            raise DegenerateModeError(
                f"negative branch needs omega > m, degenerate at k=0 with m={self.m}"
            )

    @property
    def omega(self) -> float:
        return float(np.hypot(self.k, self.m))


def _spinor_vector(mode: PlaneWaveMode) -> np.ndarray:
    """Constant spinor factor, without the e^{ikx} plane wave.

    The negative branch is evaluated through omega - m = k^2/(omega + m),
    which stays exact where the direct difference loses every digit
    (|k| far below sqrt(eps)*m).
    """
    w, m, k = mode.omega, mode.m, mode.k
    if mode.branch == "positive":
        return np.array([w + m, k]) / np.sqrt(4.0 * np.pi * w * (w + m))
    # (m-w, k)/sqrt(4 pi w (w-m)) with w-m written as k^2/(w+m):
    root = abs(k) / np.sqrt(w + m)  # sqrt(w - m), cancellation-free
    sgn = 1.0 if k > 0 else -1.0
    return np.array([-root, sgn * np.sqrt(w + m)]) / np.sqrt(4.0 * np.pi * w)


def eigenspinor(mode: PlaneWaveMode, x) -> np.ndarray:
    """Eigenspinor at position(s) x; shape (2,) + shape(x)."""
    vec = _spinor_vector(mode)
    wave = np.exp(1j * mode.k * np.asarray(x, dtype=float))
    return np.multiply.outer(vec, wave)


def eigenspinor_pointwise_norm(mode: PlaneWaveMode) -> float:
    """psi_k^dag psi_k, independent of x; equals 1/(2 pi) on both branches."""
    vec = _spinor_vector(mode)
    return float(np.sum(vec**2))


@dataclass
class MomentumCoefficients:
    """Branch projection coefficients Pi+-(k) on momentum samples."""

    k_samples: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray

    def completeness(self) -> float:
        """Trapezoid integral of |Pi+|^2 + |Pi-|^2; 1 for a normalized packet."""
        dens = np.abs(self.pi_plus) ** 2 + np.abs(self.pi_minus) ** 2
        return float(np.trapezoid(dens, self.k_samples))


def _smooth_factors(k: np.ndarray, m: float):
    """(omega, (w+m)/w, (w-m)/w, k/w) with the k=0, m=0 node patched.

    All three ratios extend continuously to k=0 for m > 0.  For m = 0
    they equal (1, 1, sign k); at the single point k=0 the even factors
    take their two-sided limit 1 and k/w is set to 0, which only ever
    multiplies terms that vanish there.
    """
    w = np.hypot(k, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(w > 0, (w + m) / np.where(w > 0, w, 1.0), 1.0)
        dm = np.where(w > 0, (w - m) / np.where(w > 0, w, 1.0), 1.0)
        ak = np.where(w > 0, k / np.where(w > 0, w, 1.0), 0.0)
    return w, dp, dm, ak


def project_gaussian(
    spec: GaussianSpec, m: float, k_samples, limit_handling: bool = True
) -> MomentumCoefficients:
    """Pi+-(k) for a Gaussian packet, on the given momentum samples.

    Pi- jumps at k=0 for m > 0; with limit_handling the sample at k=0
    takes its right-limit value, otherwise it is rejected.  The right
    limit keeps |Pi+-(0)|^2 at the jump's two-sided modulus, so branch-
    summed quadratures (completeness, densities) stay smooth in k.
    """
    k = np.asarray(k_samples, dtype=float)
    if k.ndim != 1 or k.size < 2 or not np.all(np.diff(k) > 0):
        raise ConfigError("k_samples must be a strictly increasing 1-d array")
    if m < 0:
        raise ConfigError(f"mass must be nonnegative, got {m}")
    if not limit_handling and m > 0 and np.any(k == 0.0):
        raise SingularSampleError("k=0 sits on the jump of Pi- for m > 0")

    _, dp, dm, ak = _smooth_factors(k, m)
    sq_dp, sq_dm = np.sqrt(dp), np.sqrt(dm)
    s = np.where(k >= 0.0, 1.0, -1.0)
    g1 = np.exp(-((k - spec.k1) ** 2) * spec.sigma**2)
    g2 = np.exp(-((k - spec.k2) ** 2) * spec.sigma**2)
    n_g = (2.0 * np.pi * spec.sigma**2) ** (-0.25)
    pref = n_g * spec.sigma * np.exp(-1j * k * spec.x_center)
    pi_plus = pref * (sq_dp * spec.Sigma0 * g1 + s * sq_dm * spec.X0 * g2)
    pi_minus = pref * (-sq_dm * spec.Sigma0 * g1 + s * sq_dp * spec.X0 * g2)
    return MomentumCoefficients(k, pi_plus, pi_minus)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Simpson rule parameters for the spectral integral."""

    n_nodes: int = 4097
    window: float = 8.0  # half-width beyond [min k_j, max k_j], in units 1/sigma
    check_tol: float = 1e-8  # relative L2 tolerance of the t=0 self-check

    def __post_init__(self):
        if self.n_nodes < 3 or self.n_nodes % 2 == 0:
            raise ConfigError(f"Simpson rule needs an odd node count >= 3, got {self.n_nodes}")
        if self.window < 8.0:
            raise ConfigError(f"window must cover at least 8/sigma, got {self.window}")


def _simpson_weights(n: int, dk: float) -> np.ndarray:
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (dk / 3.0)


def _spectral_sum(coef_u, coef_l, k, xs, weights):
    """sum_k w_k coef_k e^{i k x} for both components, chunked over k."""
    upper = np.zeros(xs.shape, dtype=complex)
    lower = np.zeros(xs.shape, dtype=complex)
    wu = weights * coef_u
    wl = weights * coef_l
    chunk = 512
    for i in range(0, k.size, chunk):
        phase = np.exp(1j * np.multiply.outer(k[i : i + chunk], xs))
        upper += wu[i : i + chunk] @ phase
        lower += wl[i : i + chunk] @ phase
    return upper, lower


def spectral_propagate(
    spec: GaussianSpec, m: float, t: float, grid: Grid1D, quad: QuadratureSpec = None
) -> SpinorField:
    """Exact free evolution of a Gaussian packet by spectral quadrature.

    Integrates the four-term branch decomposition over a window
    [min k_j - W/sigma, max k_j + W/sigma] with composite Simpson
    weights, then verifies itself by rebuilding the t=0 packet on the
    same nodes and comparing with the directly sampled initial state
    (relative L2, quad.check_tol).
    """
    if quad is None:
        quad = QuadratureSpec()
    if m < 0:
        raise ConfigError(f"mass must be nonnegative, got {m}")

    half = quad.window / spec.sigma
    k_lo, k_hi = min(spec.k1, spec.k2) - half, max(spec.k1, spec.k2) + half
    k = np.linspace(k_lo, k_hi, quad.n_nodes)
    dk = k[1] - k[0]
    reach = grid.extent + abs(t)
    if dk > np.pi / (2.0 * reach):
        need = int(np.ceil((k_hi - k_lo) * 2.0 * reach / np.pi)) | 1
        raise ConfigError(
            f"momentum spacing {dk:.3g} cannot resolve e^(ikx) phases out to "
            f"|x|+|t| = {reach:.3g}; need at least {need + 2} nodes"
        )

    w, dp, dm, ak = _smooth_factors(k, m)
    g1 = np.exp(-((k - spec.k1) ** 2) * spec.sigma**2) * spec.Sigma0
    g2 = np.exp(-((k - spec.k2) ** 2) * spec.sigma**2) * spec.X0
    weights = _simpson_weights(k.size, dk)
    n_g = (2.0 * np.pi * spec.sigma**2) ** (-0.25)
    pref = n_g * spec.sigma / np.sqrt(4.0 * np.pi)
    xs = grid.x - spec.x_center

    def assemble(ep, em):
        coef_u = g1 * (dp * ep + dm * em) + g2 * ak * (ep - em)
        coef_l = g1 * ak * (ep - em) + g2 * (dm * ep + dp * em)
        upper, lower = _spectral_sum(coef_u, coef_l, k, xs, weights)
        return pref * upper, pref * lower

    # a posteriori check: the same nodes must reproduce the initial packet
    initial = make_gaussian_spinor(grid, spec)
    u0, l0 = assemble(np.ones_like(k), np.ones_like(k))
    ref = np.sqrt(np.sum(np.abs(initial.upper) ** 2 + np.abs(initial.lower) ** 2))
    err = np.sqrt(np.sum(np.abs(u0 - initial.upper) ** 2 + np.abs(l0 - initial.lower) ** 2))
    if err > quad.check_tol * ref:
        raise QuadratureError(
            f"t=0 self-check failed: relative L2 error {err / ref:.3e} "
            f"exceeds {quad.check_tol} (window {quad.window}/sigma, "
            f"{quad.n_nodes} nodes)"
        )
    if t == 0:
        return SpinorField(grid, u0, l0)

    ep = np.exp(-1j * w * t)
    upper, lower = assemble(ep, np.conj(ep))
    return SpinorField(grid, upper, lower)


def ultra_relativistic_density(x, t: float, spec: GaussianSpec) -> np.ndarray:
    """Massless-limit density: two rigid packets moving at light speed.

    P(x,t) = (N^2/2) |Sigma0 - X0|^2 e^{-(x+t)^2 / 2 sigma^2}
           + (N^2/2) |Sigma0 + X0|^2 e^{-(x-t)^2 / 2 sigma^2}
    """
    xs = np.asarray(x, dtype=float) - spec.x_center
    n_g2 = 1.0 / np.sqrt(2.0 * np.pi * spec.sigma**2)
    s2 = 2.0 * spec.sigma**2
    left = abs(spec.Sigma0 - spec.X0) ** 2 * np.exp(-((xs + t) ** 2) / s2)
    right = abs(spec.Sigma0 + spec.X0) ** 2 * np.exp(-((xs - t) ** 2) / s2)
    return 0.5 * n_g2 * (left + right)


@dataclass(frozen=True)
class LargeSigmaCoeffs:
    """Second-order Taylor data around one carrier momentum k_j.

    A, B, C            value, slope, half-curvature of k/omega at k_j
                       (A and B double as the phase expansion
                       d omega/dk and d^2 omega/dk^2)
    D_pm, E_pm, F_pm   same for (omega +- m)/omega
    phi_pm             x-independent phase part +-omega_j t
    xi_pm              center shift +-A t of the e^{+-i omega t} branch
    sigma2_pm          complex squared width sigma^2 -+ i m^2 t/(2 omega_j^3)
    """

    k_j: float
    m: float
    sigma: float
    t: float
    omega: float
    A: float
    B: float
    C: float
    D_plus: float
    D_minus: float
    E_plus: float
    E_minus: float
    F_plus: float
    F_minus: float
    phi_plus: float
    phi_minus: float
    xi_plus: float
    xi_minus: float
    sigma2_plus: complex
    sigma2_minus: complex


def large_sigma_coeffs(k_j: float, m: float, sigma: float, t: float) -> LargeSigmaCoeffs:
    if m < 0:
        raise ConfigError(f"mass must be nonnegative, got {m}")
    if not (sigma > 0):
        raise ConfigError(f"sigma must be positive, got {sigma}")
    w = float(np.hypot(k_j, m))
    if w == 0.0:
        raise DegenerateModeError("zero frequency: k_j = m = 0 has no carrier")
    a = k_j / w
    b = m**2 / w**3
    c = -1.5 * k_j * m**2 / w**5
    e = -m * k_j / w**3
    f = -0.5 * m * (m**2 - 2.0 * k_j**2) / w**5
    half_phase = 0.5j * m**2 * t / w**3
    return LargeSigmaCoeffs(
        k_j=k_j,
        m=m,
        sigma=sigma,
        t=t,
        omega=w,
        A=a,
        B=b,
        C=c,
        D_plus=(w + m) / w,
        D_minus=(w - m) / w,
        E_plus=e,
        E_minus=-e,
        F_plus=f,
        F_minus=-f,
        phi_plus=w * t,
        phi_minus=-w * t,
        xi_plus=a * t,
        xi_minus=-a * t,
        sigma2_plus=sigma**2 - half_phase,
        sigma2_minus=sigma**2 + half_phase,
    )


def _moment_integrals(xi: np.ndarray, s2: complex):
    """I_p = integral dq q^p e^{i xi q - s2 q^2}, p = 0, 1, 2."""
    i0 = np.sqrt(np.pi / s2) * np.exp(-(xi**2) / (4.0 * s2))
    i1 = (1j * xi / (2.0 * s2)) * i0
    i2 = (1.0 / (2.0 * s2) - xi**2 / (4.0 * s2**2)) * i0
    return i0, i1, i2


def large_sigma_propagate(
    spec: GaussianSpec, m: float, t: float, grid: Grid1D
) -> SpinorField:
    """Closed-form free evolution in the wide-packet regime.

    Expands amplitude and phase of each branch to second order around
    the carriers and evaluates the remaining Gaussian moment integrals.
    Exact at t=0 and for m=0; otherwise accurate when sigma stays above
    select_sigma_min (a warning is issued below it).
    """
    try:
        sigma_floor = select_sigma_min(m, spec.k1, spec.k2)
        if spec.sigma < sigma_floor:
            warnings.warn(
                f"sigma = {spec.sigma:.4g} below the wide-packet floor "
                f"{sigma_floor:.4g}; expansion error may be large",
                stacklevel=2,
            )
    except ApproximationDomainError:
        pass  # rule not applicable (e.g. m = 0): nothing to warn about

    c1 = large_sigma_coeffs(spec.k1, m, spec.sigma, t)
    c2 = large_sigma_coeffs(spec.k2, m, spec.sigma, t)
    n_g = (2.0 * np.pi * spec.sigma**2) ** (-0.25)
    pref = n_g * spec.sigma / np.sqrt(4.0 * np.pi)
    xs = grid.x - spec.x_center

    upper = np.zeros(xs.shape, dtype=complex)
    lower = np.zeros(xs.shape, dtype=complex)
    # (coeffs, branch sign, amplitude, upper triple, lower triple)
    terms = (
        (c1, -1, spec.Sigma0, ("D_plus", "E_plus", "F_plus"), ("A", "B", "C")),
        (c1, +1, spec.Sigma0, ("D_minus", "E_minus", "F_minus"), ("-A", "-B", "-C")),
        (c2, -1, spec.X0, ("A", "B", "C"), ("D_minus", "E_minus", "F_minus")),
        (c2, +1, spec.X0, ("-A", "-B", "-C"), ("D_plus", "E_plus", "F_plus")),
    )

    def triple(c, names):
        out = []
        for name in names:
            sign = -1.0 if name.startswith("-") else 1.0
            out.append(sign * getattr(c, name.lstrip("-")))
        return out

    for c, sgn, amp, up_names, lo_names in terms:
        if amp == 0:
            continue
        if sgn < 0:
            s2, xi_off, phi_off = c.sigma2_minus, c.xi_minus, c.phi_minus
        else:
            s2, xi_off, phi_off = c.sigma2_plus, c.xi_plus, c.phi_plus
        i0, i1, i2 = _moment_integrals(xs + xi_off, s2)
        phase = np.exp(1j * (c.k_j * xs + phi_off))
        g0, g1, g2 = triple(c, up_names)
        h0, h1, h2 = triple(c, lo_names)
        common = pref * amp * phase
        upper += common * (g0 * i0 + g1 * i1 + g2 * i2)
        lower += common * (h0 * i0 + h1 * i1 + h2 * i2)
    return SpinorField(grid, upper, lower)


def select_sigma_min(m: float, k1: float, k2: float, n: float = 5.0, eps: float = 1e-3) -> float:
    """Smallest packet width for which the wide-packet expansion holds.

    For each amplitude function f in {k/w, (w+m)/w, (w-m)/w} and each
    carrier k_j, solves

        (1/6) |f'''(k_j)| (n sigma_k)^3 / |f(k_j + n sigma_k)| = eps

    for the momentum spread sigma_k (bracketed bisection), converts via
    sigma = 1/(2 sigma_k), and returns the largest sigma over all pairs.
    Pairs with f'''(k_j) = 0 carry no cubic error and are skipped; if
    every pair is skipped (m = 0 makes all three f piecewise constant)
    the rule is not applicable.
    """
    if m < 0:
        raise ConfigError(f"mass must be nonnegative, got {m}")
    if n <= 0 or eps <= 0:
        raise ConfigError("n and eps must be positive")

    def f_ak(k):
        return k / np.hypot(k, m)

    def f_dp(k):
        return (np.hypot(k, m) + m) / np.hypot(k, m)

    def f_dm(k):
        return (np.hypot(k, m) - m) / np.hypot(k, m)

    def f3_ak(k):
        w = np.hypot(k, m)
        return -3.0 * m**2 * (w**2 - 5.0 * k**2) / w**7

    def f3_dpm(k, sign):
        w = np.hypot(k, m)
        return -sign * 3.0 * m * k * (5.0 * k**2 - 3.0 * w**2) / w**7

    pairs = []
    for k_j in (k1, k2):
        if np.hypot(k_j, m) == 0.0:
            continue  # no carrier; partner terms vanish identically
        pairs.append((k_j, f_ak, f3_ak(k_j)))
        pairs.append((k_j, f_dp, f3_dpm(k_j, +1.0)))
        pairs.append((k_j, f_dm, f3_dpm(k_j, -1.0)))

    best = 0.0
    solved = False
    for k_j, f, f3 in pairs:
        if f3 == 0.0:
            continue
        scale = max(abs(k_j), m, 1.0)

        def rel_err(sigma_k):
            x = k_j + n * sigma_k
            denom = abs(f(x))
            if denom == 0.0:
                return np.inf
            return abs(f3) * (n * sigma_k) ** 3 / (6.0 * denom)

        lo, hi = 1e-8 * scale, 1e8 * scale
        if rel_err(lo) >= eps or rel_err(hi) <= eps:
            raise ApproximationDomainError(
                f"cannot bracket the width rule for k_j={k_j}, m={m}"
            )
        for _ in range(80):
            mid = np.sqrt(lo * hi)
            if rel_err(mid) < eps:
                lo = mid
            else:
                hi = mid
        sigma_k = 0.5 * (lo + hi)
        best = max(best, 1.0 / (2.0 * sigma_k))
        solved = True

    if not solved:
        raise ApproximationDomainError(
            "all third derivatives vanish (m = 0); width rule not applicable"
        )
    return best


def dispersion_width(t: float, sigma: float, m: float, k_j: float) -> float:
    """Quoted packet-width law sigma_j(t) = sqrt(s^2 + m^4 t^2 / (w_j^6 s^2)).

    Kept verbatim for reference values derived from it; the dynamically
    correct law carries an extra 1/4 (see dispersion_width_exact).
    Returns sigma for m = k_j = 0 (massless packets do not spread).
    """
    if not (sigma > 0):
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if m == 0.0 and k_j == 0.0:
        return sigma
    w2 = m**2 + k_j**2
    return float(np.sqrt(sigma**2 + m**4 * t**2 / (w2**3 * sigma**2)))


def dispersion_width_exact(t: float, sigma: float, m: float, k_j: float) -> float:
    """Packet width from the second-order expansion:

        sigma_j(t) = sqrt(sigma^2 + m^4 t^2 / (4 omega_j^6 sigma^2)).

    |I_0|^2 of the moment integral has squared width |sigma2|^2/sigma^2
    = sigma^2 + (m^2 t / (2 w^3))^2 / sigma^2, and the nonrelativistic
    k_j=0 limit reduces to the Schroedinger result
    sigma^2 + t^2/(4 m^2 sigma^2).
    """
    if not (sigma > 0):
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if m == 0.0 and k_j == 0.0:
        return sigma
    w2 = m**2 + k_j**2
    return float(np.sqrt(sigma**2 + m**4 * t**2 / (4.0 * w2**3 * sigma**2)))


def dispersion_rate(m: float, sigma: float, k_j: float) -> float:
    """Asymptotic spreading rate R = m^2 / (sigma (m^2 + k_j^2)^{3/2})."""
    if not (sigma > 0):
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if m == 0.0 and k_j == 0.0:
        raise ConfigError("dispersion rate undefined at m = k_j = 0")
    if m == 0.0:
        return 0.0
    return float(m**2 / (sigma * (m**2 + k_j**2) ** 1.5))
