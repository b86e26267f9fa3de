"""Stochastic trajectory dynamics and ensemble averaging.

A zero-mean, unit-variance Gaussian process x(t) with autocorrelation
<x(t+tau) x(t)> = exp(-alpha0 tau^2) drives the coupling g0 cos(k_f x(t)).
Trajectories are sampled by Cholesky factorization of the covariance on
the time grid; each trajectory gets its own counter-derived random stream,
so results do not depend on execution order or worker count.

The dephasing envelope exp(-(t/2) sqrt(pi/alpha0) Erf(t sqrt(alpha0)))
describes the decay of ensemble-averaged interference terms.  Its
brute-force counterpart is the Gaussian phase identity

    <exp(i int_0^t phi)> = exp(-D(t)/2),
    D(t) = sqrt(pi/alpha0) t Erf(sqrt(alpha0) t) + (exp(-alpha0 t^2) - 1)/alpha0,

for a unit-variance Gaussian phi with the same autocorrelation; the
envelope above is its large-t form with the bounded transient dropped.
phase_average estimates the left side by Monte Carlo.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erf as _erf_vec

from . import kernels, model
from .concurrence import Populations
from .errors import (
    FactorizationFailure,
    GridMismatch,
    InvalidParameters,
    NotNormalized,
    StepTooLarge,
)

COV_JITTER = 1e-10
MAX_GRID = 5000
# integrator: dt_int = min(grid dt, DT_SAFETY / ||V||); empirically keeps
# norm drift well under 1e-8 over default horizons
DT_SAFETY = 0.05
NORM_DRIFT_FAIL = 1e-6
# trajectories per reduction chunk; fixed so that results are independent
# of the thread count
CHUNK = 4


@dataclass(frozen=True)
class ProcessParams:
    """Random-process and ensemble parameters.

    alpha0: autocorrelation width of x(t); correlation time 1/sqrt(alpha0)
    dt:     time grid spacing (must resolve the correlation time)
    t_max:  horizon
    n_traj: ensemble size
    seed:   64-bit master seed
    """

    alpha0: float
    dt: float
    t_max: float
    n_traj: int
    seed: int

    def __post_init__(self):
        if self.alpha0 <= 0:
            raise InvalidParameters("alpha0 must be > 0")
        if self.dt <= 0 or self.t_max < self.dt:
            raise InvalidParameters("need 0 < dt <= t_max")
        if self.dt > 0.1 / math.sqrt(self.alpha0) + 1e-12:
            raise InvalidParameters(
                f"dt={self.dt:g} does not resolve the correlation time; "
                f"need dt <= 0.1/sqrt(alpha0) = {0.1 / math.sqrt(self.alpha0):g}"
            )
        if self.n_traj < 1:
            raise InvalidParameters("n_traj must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise InvalidParameters("seed must fit in 64 bits")

    def times(self):
        m = int(round(self.t_max / self.dt)) + 1
        if m > MAX_GRID:
            raise InvalidParameters(
                f"grid length {m} exceeds {MAX_GRID} (dense covariance factorization)"
            )
        return np.arange(m) * self.dt


@dataclass(frozen=True)
class Trajectory:
    """One realization of the random process on the time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise InvalidParameters("times and values must have matching length")
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameters("trajectory contains non-finite values")

    @property
    def dt(self):
        return self.times[1] - self.times[0]


_COV_CACHE = {}


def _cov_factor(alpha0, times):
    key = (float(alpha0), float(times[1] - times[0]), len(times))
    factor = _COV_CACHE.get(key)
    if factor is None:
        diff = times[:, None] - times[None, :]
        cov = np.exp(-alpha0 * diff**2)
        cov[np.diag_indices_from(cov)] += COV_JITTER
        try:
            factor = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise FactorizationFailure(
                f"covariance not PSD after {COV_JITTER:g} jitter: {exc}"
            ) from exc
        _COV_CACHE[key] = factor
    return factor


def trajectory_stream(seed, index):
    """Independent per-trajectory random stream from a counter-based split
    of the master seed."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_trajectory(p, stream):
    """Draw one Gaussian-process trajectory using the given random stream."""
    times = p.times()
    factor = _cov_factor(p.alpha0, times)
    z = stream.standard_normal(len(times))
    return Trajectory(times, factor @ z)


# ---------------------------------------------------------------------------
# Schroedinger propagation


def _csr_parts(p):
    static, coupling = model.build_potential_parts(p)
    mask = (static != 0) | (coupling != 0)
    mask[np.diag_indices_from(mask)] = True  # keep the full diagonal addressable
    rows, cols = np.nonzero(mask)
    indptr = np.zeros(p.dim + 1, dtype=np.int32)
    indptr[1:] = np.cumsum(np.bincount(rows, minlength=p.dim))
    indices = cols.astype(np.int32)
    data_static = static[rows, cols]
    data_coupling = coupling[rows, cols]
    # rigorous spectral-norm bound for Hermitian V: max absolute row sum,
    # with |cos| <= 1
    bound = float(np.max(np.sum(np.abs(static) + np.abs(coupling), axis=1)))
    return indptr, indices, data_static, data_coupling, bound


_PARTS_CACHE = {}


def _cached_parts(p):
    parts = _PARTS_CACHE.get(p)
    if parts is None:
        parts = _PARTS_CACHE[p] = _csr_parts(p)
    return parts


def _substeps(grid_dt, bound, dt_safety):
    dt_int = min(grid_dt, dt_safety / bound) if bound > 0 else grid_dt
    return max(1, math.ceil(grid_dt / dt_int - 1e-12))


@dataclass(frozen=True)
class EvolveResult:
    """State vectors at every grid point for one trajectory."""

    times: np.ndarray
    states: np.ndarray  # (m, dim)
    norm_drift: float
    n_sub: int

    def populations_series(self):
        a = self.states.reshape(len(self.times), 4, -1)
        return np.sum(np.abs(a) ** 2, axis=2)

    def density_series(self):
        a = self.states.reshape(len(self.times), 4, -1)
        return np.einsum("man,mbn->mab", a, a.conj())


def evolve(initial, traj, mp, dt_safety=DT_SAFETY):
    """Integrate i d|psi>/dt = V(x(t)) |psi> along one trajectory.

    Fourth-order fixed-step integration with x interpolated linearly
    between grid points; raises StepTooLarge if the norm drifts by more
    than 1e-6 anywhere on the horizon.
    """
    initial = np.asarray(initial, dtype=complex)
    if abs(np.linalg.norm(initial) - 1.0) > 1e-9:
        raise NotNormalized("initial state is not unit-normalized")
    indptr, indices, data_static, data_coupling, bound = _cached_parts(mp)
    grid_dt = float(traj.dt)
    if grid_dt * bound >= 0.1:
        raise InvalidParameters(
            f"time grid too coarse for this generator: dt*||V|| = {grid_dt * bound:.3f} >= 0.1"
        )
    n_sub = _substeps(grid_dt, bound, dt_safety)
    states = kernels.propagate_path(
        indptr, indices, data_static, data_coupling, initial,
        np.asarray(traj.values, dtype=float), grid_dt, n_sub, mp.k_f,
    )
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > NORM_DRIFT_FAIL:
        raise StepTooLarge(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_FAIL:g}")
    return EvolveResult(traj.times, states, drift, n_sub)


def phase_functional(traj, n, mp):
    """Unimodular phase factor Q(t) = exp(i int_0^t w dt') accumulated by
    trapezoid, with w(t) = sqrt(2(2n+1)) g0 cos(k_f x(t))."""
    w = math.sqrt(2.0 * (2 * n + 1)) * mp.g0 * np.cos(mp.k_f * traj.values)
    dt = traj.dt
    phase = np.concatenate(([0.0], np.cumsum(0.5 * dt * (w[1:] + w[:-1]))))
    return np.exp(1j * phase)


# ---------------------------------------------------------------------------
# Ensemble averaging


@dataclass(frozen=True)
class EnsembleAverage:
    times: np.ndarray
    density: np.ndarray      # (m, 4, 4) averaged atom-pair density
    populations: np.ndarray  # (m, 4) its diagonal, order w00 w01 w10 w11

    def populations_at(self, j):
        w = self.populations[j]
        return Populations(w[0], w[1], w[2], w[3])


def ensemble_average(results):
    """Average the reduced atom-pair densities of evolve() outputs.

    All runs must share one time grid; the averaged matrix is Hermitian
    with unit trace, and its diagonal is the averaged populations.
    """
    results = list(results)
    if not results:
        raise GridMismatch("no runs to average")
    times = results[0].times
    for r in results[1:]:
        if len(r.times) != len(times) or not np.allclose(r.times, times, atol=1e-12):
            raise GridMismatch("runs do not share a common time grid")
    dens = np.zeros((len(times), 4, 4), dtype=complex)
    for r in results:
        dens += r.density_series()
    dens /= len(results)
    dens = 0.5 * (dens + np.conj(np.transpose(dens, (0, 2, 1))))
    return EnsembleAverage(times, dens, np.real(np.einsum("maa->ma", dens)))


# ---------------------------------------------------------------------------
# Analytic envelope and its brute-force counterpart


def decoherence_envelope(t, alpha0):
    """exp(-(t/2) sqrt(pi/alpha0) Erf(t sqrt(alpha0)))."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t * math.sqrt(math.pi / alpha0) * _erf_vec(t * math.sqrt(alpha0)))
    return out if out.ndim else float(out)


def phase_variance_integral(t, alpha0):
    """D(t) = int_0^t int_0^t exp(-alpha0 (u-v)^2) du dv, in closed form."""
    t = np.asarray(t, dtype=float)
    out = (
        math.sqrt(math.pi / alpha0) * t * _erf_vec(math.sqrt(alpha0) * t)
        + (np.exp(-alpha0 * t**2) - 1.0) / alpha0
    )
    return out if out.ndim else float(out)


def envelope_gaussian_exact(t, alpha0):
    """exp(-D(t)/2): the exact phase-average magnitude for a unit-variance
    Gaussian dephasing frequency, transient term included."""
    return np.exp(-0.5 * phase_variance_integral(t, alpha0))


def crossover_time(alpha0):
    """Time scale sqrt(pi/alpha0) separating the effectively-pure regime
    from the mixed one (dimensionally consistent reading)."""
    if alpha0 <= 0:
        raise InvalidParameters("alpha0 must be > 0")
    return math.sqrt(math.pi / alpha0)


@dataclass(frozen=True)
class PhaseAverage:
    times: np.ndarray
    magnitude: np.ndarray
    stderr: np.ndarray


def phase_average(p):
    """Monte Carlo magnitude of <Q^-1> = <exp(-i int_0^t phi)> with phi the
    unit-variance Gaussian process itself.

    This is the brute-force check of the dephasing envelope: the result
    should match envelope_gaussian_exact within sampling error and
    approach decoherence_envelope once the transient term is negligible.
    The standard error is estimated from the real parts (the mean is real
    by time-reversal symmetry of the process).
    """
    times = p.times()
    factor = _cov_factor(p.alpha0, times)
    m = len(times)
    z = np.empty((m, p.n_traj))
    for i in range(p.n_traj):
        z[:, i] = trajectory_stream(p.seed, i).standard_normal(m)
    paths = factor @ z  # (m, n_traj)
    increments = 0.5 * p.dt * (paths[1:] + paths[:-1])
    phases = np.vstack([np.zeros(p.n_traj), np.cumsum(increments, axis=0)])
    vals = np.exp(-1j * phases)
    mean = vals.mean(axis=1)
    stderr = np.std(vals.real, axis=1, ddof=1) / math.sqrt(p.n_traj)
    return PhaseAverage(times, np.abs(mean), stderr)


# ---------------------------------------------------------------------------
# Full ensemble run (map over trajectories, associative reduction)


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble-averaged output of a full stochastic run.

    mean_density/mean_populations: averaged atom-pair state per grid point.
    mean_pure_concurrence: trajectory average of the per-trajectory
    population-form concurrence (the pure-regime measure).
    density_se: per-entry Monte Carlo standard errors.
    offdiag_mag: Frobenius norm of the off-diagonal part of mean_density.
    """

    times: np.ndarray
    mean_density: np.ndarray
    mean_populations: np.ndarray
    mean_pure_concurrence: np.ndarray
    density_se: np.ndarray
    offdiag_mag: np.ndarray
    norm_drift_max: float
    leakage_max: float
    n_traj: int
    n_sub: int


def _reduce_chunk(args):
    (indptr, indices, dstat, dcoup, psi0, factor, pp, mp, lo, hi, n_sub) = args
    m = factor.shape[0]
    z = np.empty((m, hi - lo))
    for i in range(lo, hi):
        z[:, i - lo] = trajectory_stream(pp.seed, i).standard_normal(m)
    xs = (factor @ z).T.copy()  # (B, m)
    states = kernels.propagate_path_block(
        indptr, indices, dstat, dcoup, psi0, xs, pp.dt, n_sub, mp.k_f
    )
    a = states.reshape(hi - lo, m, 4, -1)
    flat = a.reshape((hi - lo) * m, 4, -1)
    dens = (flat @ flat.conj().transpose(0, 2, 1)).reshape(hi - lo, m, 4, 4)
    pops = np.real(np.einsum("bmaa->bma", dens))
    root = np.sqrt(np.clip(pops, 0.0, None))
    conc = 2.0 * np.abs(root[:, :, 3] * root[:, :, 0] - root[:, :, 1] * root[:, :, 2])
    norms = np.linalg.norm(states, axis=2)
    nph = states.shape[2] // 4
    leak = np.sum(np.abs(a[:, :, :, nph - 2 :]) ** 2, axis=(2, 3))
    return (
        dens.sum(axis=0),
        (np.abs(dens) ** 2).sum(axis=0),
        conc.sum(axis=0),
        float(np.max(np.abs(norms - 1.0))),
        float(leak.max()),
    )


def run_ensemble(mp, pp, system_amplitudes, field_amplitudes, threads=1, dt_safety=DT_SAFETY):
    """Propagate an ensemble of trajectories and average it.

    Trajectories are independent map units; reduction happens in fixed
    chunk order, so the outcome is bit-identical for any worker count.
    Raises StepTooLarge if any trajectory drifts in norm beyond 1e-6.
    """
    psi0 = model.initial_state(system_amplitudes, field_amplitudes)
    indptr, indices, dstat, dcoup, bound = _cached_parts(mp)
    times = pp.times()
    if pp.dt * bound >= 0.1:
        raise InvalidParameters(
            f"time grid too coarse for this generator: dt*||V|| = {pp.dt * bound:.3f} >= 0.1"
        )
    n_sub = _substeps(pp.dt, bound, dt_safety)
    factor = _cov_factor(pp.alpha0, times)

    jobs = [
        (indptr, indices, dstat, dcoup, psi0, factor, pp, mp, lo, min(lo + CHUNK, pp.n_traj), n_sub)
        for lo in range(0, pp.n_traj, CHUNK)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(_reduce_chunk, jobs))
    else:
        partials = [_reduce_chunk(job) for job in jobs]

    m = len(times)
    dens_sum = np.zeros((m, 4, 4), dtype=complex)
    sq_sum = np.zeros((m, 4, 4))
    conc_sum = np.zeros(m)
    drift = 0.0
    leak = 0.0
    for d, s, c, dr, lk in partials:
        dens_sum += d
        sq_sum += s
        conc_sum += c
        drift = max(drift, dr)
        leak = max(leak, lk)
    if drift > NORM_DRIFT_FAIL:
        raise StepTooLarge(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_FAIL:g}")

    n = pp.n_traj
    mean = dens_sum / n
    mean = 0.5 * (mean + np.conj(np.transpose(mean, (0, 2, 1))))
    if n > 1:
        var = np.clip(sq_sum / n - np.abs(mean) ** 2, 0.0, None)
        se = np.sqrt(var / (n - 1))
    else:
        se = np.zeros_like(sq_sum)
    off = mean - np.einsum("ma,ab->mab", np.einsum("maa->ma", mean), np.eye(4))
    return EnsembleResult(
        times=times,
        mean_density=mean,
        mean_populations=np.real(np.einsum("maa->ma", mean)),
        mean_pure_concurrence=conc_sum / n,
        density_se=se,
        offdiag_mag=np.linalg.norm(off, axis=(1, 2)),
        norm_drift_max=drift,
        leakage_max=leak,
        n_traj=n,
        n_sub=n_sub,
    )
