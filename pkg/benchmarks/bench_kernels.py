"""Throughput comparison of the compiled and pure-python propagation kernels.

Run:  python benchmarks/bench_kernels.py [n_traj]
"""
import sys
import time

import numpy as np

from qconcur import dynamics, kernels, model


def bench(backend, parts, psi0, xs, dt, n_sub, k_f, repeats=3):
    indptr, indices, dstat, dcoup, _ = parts
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        backend.propagate_path_block(indptr, indices, dstat, dcoup, psi0, xs, dt, n_sub, k_f)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n_traj = int(sys.argv[1]) if len(sys.argv) > 1 else 16
    mp = model.ModelParams(omega0=1.0, Omega=0.05, omega_f=0.1, g0=0.1, k_f=1.0,
                           nbar=4.0, n_max=44)
    pp = dynamics.ProcessParams(alpha0=1.0, dt=0.01, t_max=5.0, n_traj=n_traj, seed=7)
    parts = dynamics._cached_parts(mp)
    bound = parts[4]
    n_sub = dynamics._substeps(pp.dt, bound, dynamics.DT_SAFETY)
    psi0 = model.initial_state(
        np.array([1, 0, 0, 1]) / np.sqrt(2), model.coherent_field_amplitudes(mp.nbar, mp.n_max)
    )
    times = pp.times()
    factor = dynamics._cov_factor(pp.alpha0, times)
    xs = np.empty((n_traj, len(times)))
    for i in range(n_traj):
        xs[i] = factor @ dynamics.trajectory_stream(pp.seed, i).standard_normal(len(times))

    print(f"dim={mp.dim} grid={len(times)} substeps/dt={n_sub} trajectories={n_traj}")
    results = {}
    for name in ("python", "compiled"):
        try:
            backend = kernels.get_backend(name)
        except ImportError:
            print(f"{name:>9}: not built")
            continue
        dt_wall = bench(backend, parts, psi0, xs, pp.dt, n_sub, mp.k_f)
        results[name] = dt_wall
        print(f"{name:>9}: {dt_wall:8.3f} s total, {dt_wall / n_traj * 1e3:8.2f} ms/trajectory")
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['compiled']:.1f}x (compiled over python)")

    # sanity: same physics from both backends
    if len(results) == 2:
        a = kernels.get_backend("python").propagate_path_block(
            parts[0], parts[1], parts[2], parts[3], psi0, xs[:1], pp.dt, n_sub, mp.k_f)
        b = kernels.get_backend("compiled").propagate_path_block(
            parts[0], parts[1], parts[2], parts[3], psi0, xs[:1], pp.dt, n_sub, mp.k_f)
        print(f"  max |state difference|: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
