import math

import numpy as np
import pytest
from scipy import integrate

from qconcur import dynamics, model
from qconcur.errors import GridMismatch, InvalidParameters, NotNormalized, StepTooLarge


def small_model(**kw):
    base = dict(omega0=1.0, Omega=0.05, omega_f=0.1, g0=0.1, k_f=1.0, nbar=0.25, n_max=12)
    base.update(kw)
    return model.ModelParams(**base)


def test_process_params_validation():
    with pytest.raises(InvalidParameters):
        dynamics.ProcessParams(alpha0=0.0, dt=0.01, t_max=1, n_traj=1, seed=1)
    with pytest.raises(InvalidParameters):
        dynamics.ProcessParams(alpha0=1.0, dt=0.5, t_max=1, n_traj=1, seed=1)  # coarse dt
    with pytest.raises(InvalidParameters):
        dynamics.ProcessParams(alpha0=1.0, dt=0.01, t_max=1, n_traj=0, seed=1)
    with pytest.raises(InvalidParameters):
        dynamics.ProcessParams(alpha0=1.0, dt=0.001, t_max=10, n_traj=1, seed=1).times()


def test_trajectory_determinism():
    pp = dynamics.ProcessParams(alpha0=2.0, dt=0.05, t_max=3.0, n_traj=1, seed=99)
    a = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(99, 0))
    b = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(99, 0))
    assert np.array_equal(a.values, b.values)
    c = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(99, 1))
    assert not np.array_equal(a.values, c.values)


def test_trajectory_statistics():
    # lag-0 variance 1 and lag tau=1/sqrt(alpha0) autocorrelation e^-1,
    # both within 3 standard errors over 10^4 trajectories
    alpha0 = 4.0
    pp = dynamics.ProcessParams(alpha0=alpha0, dt=0.05, t_max=1.5, n_traj=10_000, seed=7)
    times = pp.times()
    samples = np.empty((pp.n_traj, len(times)))
    factor = dynamics._cov_factor(alpha0, times)
    for i in range(pp.n_traj):
        samples[i] = factor @ dynamics.trajectory_stream(pp.seed, i).standard_normal(len(times))
    lag = int(round((1 / math.sqrt(alpha0)) / pp.dt))
    var0 = samples[:, 10] ** 2
    se = var0.std(ddof=1) / math.sqrt(pp.n_traj)
    assert abs(var0.mean() - 1.0) <= 3 * se
    prod = samples[:, 10] * samples[:, 10 + lag]
    se = prod.std(ddof=1) / math.sqrt(pp.n_traj)
    assert abs(prod.mean() - math.exp(-1.0)) <= 3 * se


def test_sample_trajectory_roundtrip_api():
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.1, t_max=2.0, n_traj=1, seed=5)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(5, 0))
    assert traj.times.shape == traj.values.shape
    assert traj.dt == pytest.approx(0.1)


def test_evolve_decoupled_sector():
    # g0 = 0: |1,1,n> only picks up phase, populations frozen
    mp = small_model(g0=0.0, Omega=0.4, omega_f=0.7)
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.01, t_max=4.0, n_traj=1, seed=11)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(11, 0))
    psi0 = model.initial_state([0, 0, 0, 1], model.fock_field_amplitudes(3, mp.n_max))
    res = dynamics.evolve(psi0, traj, mp)
    pops = res.populations_series()
    assert np.max(np.abs(pops[:, 3] - 1.0)) < 1e-10
    assert np.max(np.abs(pops[:, :3])) < 1e-10


def test_evolve_exchange_oscillation():
    # g0 = 0, Omega > 0: |01> <-> |10> exchange with population period pi/Omega
    mp = small_model(g0=0.0, Omega=0.05, omega_f=0.0)
    period = math.pi / mp.Omega
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=period, n_traj=1, seed=3)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(3, 0))
    psi0 = model.initial_state([0, 1, 0, 0], model.fock_field_amplitudes(2, mp.n_max))
    res = dynamics.evolve(psi0, traj, mp)
    pops = res.populations_series()
    expected = np.cos(mp.Omega * res.times) ** 2
    assert np.max(np.abs(pops[:, 1] - expected)) < 1e-9
    assert np.max(np.abs(pops[:, 2] - (1 - expected))) < 1e-9
    # full transfer near the half period, full return near the period
    # (grid points only bracket them, hence the resolution-limited bounds)
    assert pops[:, 1].min() < 1e-5
    assert pops[len(pops) // 2 :, 1].max() > 1.0 - 1e-5


def test_evolve_unitarity_and_drift_gate():
    mp = small_model()
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=10.0, n_traj=1, seed=13)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(13, 0))
    psi0 = model.initial_state(
        np.array([1, 0, 0, 1]) / math.sqrt(2), model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    )
    res = dynamics.evolve(psi0, traj, mp)
    assert res.norm_drift < 1e-8
    with pytest.raises(NotNormalized):
        dynamics.evolve(psi0 * 1.01, traj, mp)


def test_evolve_step_too_large():
    # adversarial: top Fock level occupied, large field frequency, one substep
    mp = model.ModelParams(omega0=0.0, Omega=0.0, omega_f=18.0, g0=0.3, k_f=1.0,
                           nbar=0.01, n_max=11)
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.00045, t_max=2.0, n_traj=1, seed=5)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(5, 0))
    psi0 = model.initial_state([0, 0, 0, 1], model.fock_field_amplitudes(11, 11))
    with pytest.raises(StepTooLarge):
        dynamics.evolve(psi0, traj, mp, dt_safety=10.0)


def test_evolve_rejects_coarse_grid():
    mp = small_model(omega_f=3.0)  # ||V|| bound ~ 24, dt*bound > 0.1
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=1.0, n_traj=1, seed=1)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(1, 0))
    psi0 = model.initial_state([1, 0, 0, 0], model.fock_field_amplitudes(0, mp.n_max))
    with pytest.raises(InvalidParameters):
        dynamics.evolve(psi0, traj, mp)


def test_phase_functional():
    mp = small_model()
    times = np.arange(51) * 0.1
    flat = dynamics.Trajectory(times, np.zeros(51))
    n = 3
    q = dynamics.phase_functional(flat, n, mp)
    expected = np.exp(1j * math.sqrt(2 * (2 * n + 1)) * mp.g0 * times)
    assert np.max(np.abs(q - expected)) < 1e-12

    zero_g = small_model(g0=0.0)
    q0 = dynamics.phase_functional(flat, n, zero_g)
    assert np.array_equal(q0, np.ones(51, dtype=complex))

    rng = np.random.default_rng(2)
    wild = dynamics.Trajectory(times, rng.standard_normal(51))
    q = dynamics.phase_functional(wild, 5, mp)
    assert np.max(np.abs(np.abs(q) - 1.0)) < 1e-15


def test_ensemble_average_degenerate_and_mismatch():
    mp = small_model()
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=2.0, n_traj=1, seed=17)
    traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(17, 0))
    psi0 = model.initial_state(
        np.array([1, 0, 0, 1]) / math.sqrt(2), model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    )
    res = dynamics.evolve(psi0, traj, mp)
    avg = dynamics.ensemble_average([res])
    assert np.allclose(avg.density, res.density_series(), atol=1e-15)
    assert np.allclose(avg.populations, res.populations_series(), atol=1e-12)

    pp2 = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=1.0, n_traj=1, seed=17)
    short = dynamics.evolve(
        psi0, dynamics.sample_trajectory(pp2, dynamics.trajectory_stream(17, 1)), mp
    )
    with pytest.raises(GridMismatch):
        dynamics.ensemble_average([res, short])
    with pytest.raises(GridMismatch):
        dynamics.ensemble_average([])


def test_envelope_examples():
    assert dynamics.decoherence_envelope(0.0, 2.0) == 1.0
    # saturated error function: pure exponential tail
    a0 = 1.7
    for t in (6.0, 9.0):
        expected = math.exp(-0.5 * t * math.sqrt(math.pi / a0))
        assert abs(dynamics.decoherence_envelope(t, a0) - expected) < 1e-10
    ts = np.linspace(0, 5, 200)
    env = dynamics.decoherence_envelope(ts, a0)
    assert np.all(np.diff(env) < 0)


def test_phase_variance_integral_against_quadrature():
    for a0 in (1.0, 25.0):
        for t in (0.3, 1.0, 2.0):
            closed = dynamics.phase_variance_integral(t, a0)
            num, _ = integrate.dblquad(
                lambda u, v: math.exp(-a0 * (u - v) ** 2), 0, t, 0, t,
                epsabs=1e-13, epsrel=1e-13,
            )
            assert abs(closed - num) < 1e-10


def test_crossover_examples():
    assert dynamics.crossover_time(math.pi) == pytest.approx(1.0, abs=1e-15)
    assert dynamics.crossover_time(1.0) / dynamics.crossover_time(2.0) == pytest.approx(
        math.sqrt(2.0), abs=1e-12
    )
    # envelope at the crossover: an order-one suppression, reported not asserted
    a0 = 1.0
    tc = dynamics.crossover_time(a0)
    val = dynamics.decoherence_envelope(tc, a0)
    assert 0.05 < val < 0.95


def test_envelope_asymptotics_vs_exact():
    # exact Gaussian-phase magnitude vs the simple envelope: ratio
    # approaches exp(1/(2 alpha0)) once the transient has saturated
    a0 = 25.0
    for t in (0.5, 1.0, 3.0):
        ratio = dynamics.envelope_gaussian_exact(t, a0) / dynamics.decoherence_envelope(t, a0)
        assert abs(math.log(ratio) - (1 - math.exp(-a0 * t * t)) / (2 * a0)) < 1e-12
    assert abs(math.log(
        dynamics.envelope_gaussian_exact(3.0, a0) / dynamics.decoherence_envelope(3.0, a0)
    ) - 1 / (2 * a0)) < 1e-10


def test_phase_average_matches_oracle():
    a0 = 9.0
    pp = dynamics.ProcessParams(alpha0=a0, dt=0.01, t_max=1.2, n_traj=3000, seed=21)
    mc = dynamics.phase_average(pp)
    exact = dynamics.envelope_gaussian_exact(mc.times, a0)
    dev = np.abs(mc.magnitude[1:] - exact[1:]) / mc.stderr[1:]
    assert dev.max() < 4.0  # whole-grid sweep, slightly wider than pointwise 3 se


def _tiny_run(threads, seed=101, n_traj=6):
    mp = small_model()
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=4.0, n_traj=n_traj, seed=seed)
    psi0 = np.array([1, 0, 0, 1]) / math.sqrt(2)
    field = model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    return dynamics.run_ensemble(mp, pp, psi0, field, threads=threads)


def test_run_ensemble_thread_invariance():
    a = _tiny_run(threads=1)
    b = _tiny_run(threads=3)
    assert np.array_equal(a.mean_density, b.mean_density)
    assert np.array_equal(a.mean_pure_concurrence, b.mean_pure_concurrence)
    assert np.array_equal(a.offdiag_mag, b.offdiag_mag)


def test_run_ensemble_matches_evolve_pipeline():
    # the fused ensemble runner must agree with composing the public
    # per-trajectory operations
    mp = small_model()
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.05, t_max=4.0, n_traj=6, seed=101)
    psi0 = model.initial_state(
        np.array([1, 0, 0, 1]) / math.sqrt(2), model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    )
    runs = []
    for i in range(pp.n_traj):
        traj = dynamics.sample_trajectory(pp, dynamics.trajectory_stream(pp.seed, i))
        runs.append(dynamics.evolve(psi0, traj, mp))
    avg = dynamics.ensemble_average(runs)
    fused = _tiny_run(threads=1)
    assert np.allclose(avg.density, fused.mean_density, atol=1e-12)
    assert np.allclose(avg.populations, fused.mean_populations, atol=1e-12)


def test_run_ensemble_invariants():
    res = _tiny_run(threads=1, n_traj=24)
    # populations sum to one at every grid point
    assert np.max(np.abs(res.mean_populations.sum(axis=1) - 1.0)) < 1e-8
    # averaged density Hermitian, unit trace, PSD within Monte Carlo noise
    for j in (0, len(res.times) // 2, len(res.times) - 1):
        rho = res.mean_density[j]
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-14
        assert abs(np.trace(rho).real - 1.0) < 1e-9
        bound = 3.0 * np.linalg.norm(res.density_se[j])
        assert np.linalg.eigvalsh(rho).min() >= -bound
    assert res.norm_drift_max < 1e-8
    assert res.leakage_max < 1e-8


def test_run_ensemble_offdiagonal_decay():
    # interference terms averaged over many trajectories decay below their
    # early-time magnitude after the crossover
    mp = small_model(nbar=1.0, n_max=15, g0=0.25, omega_f=0.05)
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.02, t_max=12.0, n_traj=48, seed=300)
    psi0 = np.array([1, 0, 0, 1]) / math.sqrt(2)
    field = model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    res = dynamics.run_ensemble(mp, pp, psi0, field, threads=2)
    tc = dynamics.crossover_time(pp.alpha0)
    early = res.offdiag_mag[(res.times > 0.1) & (res.times < tc)].max()
    late = res.offdiag_mag[res.times > 4 * tc].max()
    assert late < early
    # late-time populations reach a plateau: two late slices agree loosely
    j1 = np.searchsorted(res.times, 0.8 * pp.t_max)
    w1 = res.mean_populations[j1]
    w2 = res.mean_populations[-1]
    assert np.max(np.abs(w1 - w2)) < 0.12


def test_full_pipeline_bitwise_reproducible():
    a = _tiny_run(threads=2)
    b = _tiny_run(threads=2)
    assert np.array_equal(a.mean_density, b.mean_density)
    assert np.array_equal(a.mean_populations, b.mean_populations)
    assert a.norm_drift_max == b.norm_drift_max
