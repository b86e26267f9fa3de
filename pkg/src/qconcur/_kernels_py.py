"""Pure-python (numpy/scipy) propagation kernels.

Fallback implementation selected when the compiled extension is missing.
Fourth-order fixed-step integration of i dpsi/dt = (S + c(t) C) psi where
S, C share one CSR sparsity pattern and c(t) = cos(k_f * x(t)) with x
linearly interpolated between grid points.  The block variant advances a
batch of trajectories in lock-step, which keeps the work inside sparse
matrix-matrix products instead of per-trajectory matvecs.
"""
import numpy as np
import scipy.sparse as sp

BACKEND = "python"


def _csr(indptr, indices, data, dim):
    return sp.csr_matrix((data, indices, indptr), shape=(dim, dim))


def propagate_path(indptr, indices, data_static, data_coupling, psi0, x, dt, n_sub, k_f):
    """States at every grid point for one coupling path x; shape (m, dim)."""
    block = propagate_path_block(
        indptr, indices, data_static, data_coupling, psi0, np.asarray(x)[None, :], dt, n_sub, k_f
    )
    return block[0]


def propagate_path_block(indptr, indices, data_static, data_coupling, psi0, xs, dt, n_sub, k_f):
    """States for a batch of coupling paths xs of shape (B, m); returns (B, m, dim)."""
    xs = np.asarray(xs, dtype=float)
    n_paths, m = xs.shape
    dim = psi0.shape[0]
    s_mat = _csr(indptr, indices, data_static, dim)
    c_mat = _csr(indptr, indices, data_coupling, dim)

    out = np.empty((n_paths, m, dim), dtype=complex)
    psi = np.repeat(psi0[:, None], n_paths, axis=1)  # (dim, B)
    out[:, 0, :] = psi.T
    h = dt / n_sub
    sub = np.arange(n_sub, dtype=float)
    theta0 = sub / n_sub
    theta_half = (sub + 0.5) / n_sub
    theta1 = (sub + 1.0) / n_sub

    def rhs(c_row, v):
        # -i (S + diag-broadcast c * C) v for per-path couplings c_row (B,)
        return -1j * (s_mat @ v + (c_mat @ v) * c_row)

    for j in range(m - 1):
        x0 = xs[:, j]
        dx = xs[:, j + 1] - x0
        c0s = np.cos(k_f * (x0[None, :] + np.outer(theta0, dx)))
        chs = np.cos(k_f * (x0[None, :] + np.outer(theta_half, dx)))
        c1s = np.cos(k_f * (x0[None, :] + np.outer(theta1, dx)))
        for s in range(n_sub):
            k1 = rhs(c0s[s], psi)
            k2 = rhs(chs[s], psi + (0.5 * h) * k1)
            k3 = rhs(chs[s], psi + (0.5 * h) * k2)
            k4 = rhs(c1s[s], psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[:, j + 1, :] = psi.T
    return out
