"""1+1D Dirac wave-packet engine.

Analytic free-particle propagation (spectral quadrature and wide-packet
closed forms), Chebyshev-expanded evolution under site-wise disordered
mass and potential, localization-width analysis of density profiles,
disorder ensembles, and the power-law width-vs-strength fit.
"""

__version__ = "0.1.0"

from .chebyshev import (
    ChebyshevPlan,
    OrderPolicy,
    Trajectory,
    bessel_j,
    bessel_j_array,
    chebyshev_coefficients,
    make_plan,
    parse_order_policy,
    propagate,
    propagate_step,
    propagate_times,
)
from .config import SCENARIOS, RunConfig
from .disorder import (
    MASS_STRENGTHS,
    POTENTIAL_STRENGTHS,
    SPREADING_PACKET,
    T_STAR,
    DisorderSpec,
    EnsembleResult,
    SweepResult,
    mix_seed,
    run_ensemble,
    run_sample,
    sample_disorder,
    sweep_strengths,
)
from .errors import (
    ApproximationDomainError,
    BoundaryLeakError,
    ConfigError,
    DegenerateDataError,
    DegenerateModeError,
    EngineError,
    FitConvergenceError,
    FitError,
    NormalizationError,
    NormBlowupError,
    NumericError,
    PacketTooWideError,
    QuadratureError,
    SingularSampleError,
    SupportOverflowError,
    ZeroFunctionalError,
)
from .free import (
    LargeSigmaCoeffs,
    MomentumCoefficients,
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
from .grid import (
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
from .localization import (
    C_GAUSSIAN,
    DensityProfile,
    localization_constant,
    localization_functional,
    localization_width,
    rescale_density,
)
from .operators import (
    DerivativeOperator,
    HamiltonianOperator,
    SpectralInterval,
    bounds_for,
    spectral_bounds,
    spectral_bounds_exact,
)
from .powerlaw import (
    FitResult,
    fit_power_law,
    power_law,
    r_squared,
    weights_from_ensemble,
)
