"""Disorder ensembles: random site potentials/masses, width statistics.

Disorder is piecewise-constant per lattice node (its correlation length
IS the lattice constant d_x, so d_x is a physical parameter of every
result and is logged alongside it).  Two kinds:

    potential  V_j ~ Uniform[<V> - s, <V> + s],  m_j = <m>
    mass       m_j ~ Uniform[<m> - s, <m> + s],  V_j = <V>

Randomness contract: the per-sample seed is mix_seed(master_seed,
sample_index), a SplitMix64 hash, feeding a counter-based Philox
generator that draws one uniform per node.  Sample results are reduced
in index order, so ensembles are bit-identical for any worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chebyshev import OrderPolicy, propagate_times
from .errors import ConfigError, NumericError
from .grid import GaussianSpec, Grid1D, make_gaussian_spinor
from .localization import DensityProfile, localization_width
from .operators import HamiltonianOperator

MASK64 = (1 << 64) - 1


def mix_seed(master_seed: int, index: int) -> int:
    """SplitMix64 hash of (master_seed, index) -> 64-bit sample seed."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class DisorderSpec:
    """One disorder configuration: what fluctuates and how strongly."""

    kind: str  # "potential" or "mass"
    strength: float
    mean_mass: float = 500.0
    mean_potential: float = 0.0

    def __post_init__(self):
        if self.kind not in ("potential", "mass"):
            raise ConfigError(f"disorder kind must be potential or mass, got {self.kind!r}")
        if self.strength < 0:
            raise ConfigError(f"disorder strength must be nonnegative, got {self.strength}")


def sample_disorder(spec: DisorderSpec, grid: Grid1D, sample_seed: int):
    """One realization (V array, m array) from the seeded stream.

    A draw happens even at strength 0 (scaled by exactly 0), keeping
    the stream layout identical across strengths.
    """
    rng = np.random.Generator(np.random.Philox(key=sample_seed & MASK64))
    u = rng.uniform(-1.0, 1.0, grid.n_points)
    if spec.kind == "potential":
        v = spec.mean_potential + spec.strength * u
        m = np.full(grid.n_points, spec.mean_mass)
    else:
        v = np.full(grid.n_points, spec.mean_potential)
        m = spec.mean_mass + spec.strength * u
    return v, m


def run_sample(
    spec: DisorderSpec,
    initial: GaussianSpec,
    times,
    grid: Grid1D,
    policy: OrderPolicy = None,
    sample_seed: int = 0,
    a_target: float = None,
    dt_target: float = None,
) -> np.ndarray:
    """Propagate one disorder realization; W at each requested time."""
    field = make_gaussian_spinor(grid, initial)
    v, m = sample_disorder(spec, grid, sample_seed)
    h = HamiltonianOperator(grid, v, m)
    traj = propagate_times(
        h, field, times, policy, a_target=a_target, dt_target=dt_target
    )
    widths = np.empty(traj.times.size)
    for i in range(traj.times.size):
        profile = DensityProfile(grid, traj.densities[i] / traj.norms[i], normalized=True)
        widths[i] = localization_width(profile)
    return widths


@dataclass
class EnsembleResult:
    """Width statistics over disorder samples at common snapshot times."""

    spec: DisorderSpec
    times: np.ndarray
    w_mean: np.ndarray
    w_std: np.ndarray  # population std (ddof=0) over samples
    n_samples: int
    master_seed: int
    failed: tuple = ()  # (sample_index, reason) pairs, excluded from stats


def _sample_task(args):
    index, seed, spec, initial, times, grid, policy, a_target, dt_target = args
    try:
        w = run_sample(spec, initial, times, grid, policy, seed, a_target, dt_target)
        return index, w, None
    except NumericError as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def run_ensemble(
    spec: DisorderSpec,
    n_samples: int,
    initial: GaussianSpec,
    times,
    grid: Grid1D,
    policy: OrderPolicy = None,
    master_seed: int = 0,
    workers: int = 1,
    max_fail_fraction: float = 0.01,
    a_target: float = None,
    dt_target: float = None,
) -> EnsembleResult:
    """Independent samples, index-ordered reduction, deterministic stats."""
    if n_samples < 1:
        raise ConfigError(f"need at least one sample, got {n_samples}")
    times = np.asarray(times, dtype=float)
    tasks = [
        (i, mix_seed(master_seed, i), spec, initial, times, grid, policy,
         a_target, dt_target)
        for i in range(n_samples)
    ]
    rows = np.full((n_samples, times.size), np.nan)
    failures = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_task, tasks, chunksize=1))
    else:
        results = [_sample_task(t) for t in tasks]
    for index, w, err in results:
        if err is None:
            rows[index] = w
        else:
            failures.append((index, err))
    if len(failures) > max_fail_fraction * n_samples:
        detail = "; ".join(f"#{i}: {msg}" for i, msg in failures[:5])
        raise NumericError(
            f"{len(failures)}/{n_samples} samples failed "
            f"(allowed fraction {max_fail_fraction}): {detail}"
        )

    good = rows[~np.isnan(rows[:, 0])]
    if good.shape[0] == 0:
        raise NumericError("every sample failed; nothing to average")
    w_mean = np.mean(good, axis=0)
    w_std = np.std(good, axis=0, ddof=0)
    # Identical samples (e.g. strength 0) have exactly zero spread; the
    # running mean may differ from the common row by round-off, so pin it.
    same = np.all(good == good[0], axis=0)
    w_mean[same] = good[0, same]
    w_std[same] = 0.0
    return EnsembleResult(
        spec=spec,
        times=times,
        w_mean=w_mean,
        w_std=w_std,
        n_samples=n_samples,
        master_seed=master_seed,
        failed=tuple(failures),
    )


@dataclass
class SweepResult:
    """W(t_star) statistics across disorder strengths."""

    kind: str
    strengths: np.ndarray
    t_star: float
    w_mean: np.ndarray  # at t_star, per strength
    w_std: np.ndarray
    n_samples: int
    master_seed: int
    d_x: float
    n_points: int
    ensembles: list


# Default sweep grids and probe time for the localization experiment.
POTENTIAL_STRENGTHS = (0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
MASS_STRENGTHS = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 9.0, 11.0)
T_STAR = 0.71064
SPREADING_PACKET = GaussianSpec(sigma=0.04, k1=0.0, k2=0.0, Sigma0=1.0 + 0j, X0=0.0j)


def sweep_strengths(
    kind: str,
    strengths,
    t_star: float,
    n_samples: int,
    initial: GaussianSpec,
    grid: Grid1D,
    policy: OrderPolicy = None,
    master_seed: int = 0,
    times=None,
    workers: int = 1,
    mean_mass: float = 500.0,
    mean_potential: float = 0.0,
    a_target: float = None,
    dt_target: float = None,
    max_fail_fraction: float = 0.01,
) -> SweepResult:
    """One ensemble per strength; per-strength seed = mix_seed(master, index)."""
    strengths = np.asarray(strengths, dtype=float)
    if strengths.size == 0 or np.any(strengths < 0) or np.any(np.diff(strengths) <= 0):
        raise ConfigError("strengths must be nonnegative and strictly ascending")
    if not (t_star > 0):
        raise ConfigError(f"t_star must be positive, got {t_star}")
    if times is None:
        times = np.array([0.0, t_star])
    else:
        times = np.asarray(times, dtype=float)
        if not np.any(np.isclose(times, t_star, rtol=0, atol=1e-12)):
            times = np.sort(np.append(times, t_star))
    t_index = int(np.argmin(np.abs(times - t_star)))

    ensembles = []
    at_star_mean = np.empty(strengths.size)
    at_star_std = np.empty(strengths.size)
    for i, s in enumerate(strengths):
        spec = DisorderSpec(kind, float(s), mean_mass, mean_potential)
        res = run_ensemble(
            spec,
            n_samples,
            initial,
            times,
            grid,
            policy,
            master_seed=mix_seed(master_seed, i),
            workers=workers,
            max_fail_fraction=max_fail_fraction,
            a_target=a_target,
            dt_target=dt_target,
        )
        ensembles.append(res)
        at_star_mean[i] = res.w_mean[t_index]
        at_star_std[i] = res.w_std[t_index]
    return SweepResult(
        kind=kind,
        strengths=strengths,
        t_star=float(times[t_index]),
        w_mean=at_star_mean,
        w_std=at_star_std,
        n_samples=n_samples,
        master_seed=master_seed,
        d_x=grid.d_x,
        n_points=grid.n_points,
        ensembles=ensembles,
    )
