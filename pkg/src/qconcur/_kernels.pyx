# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation kernels.

Same contract as _kernels_py: fourth-order fixed-step integration of
i dpsi/dt = (S + c(t) C) psi with S, C on one shared CSR pattern and
c(t) = cos(k_f * x(t)), x linearly interpolated between grid points.
The inner loops run without the GIL, so trajectories can be propagated
from a thread pool in parallel.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos

BACKEND = "compiled"

ctypedef double complex dcomplex

cdef dcomplex MINUS_I = -1j


cdef inline void _rhs(const int[::1] indptr, const int[::1] indices,
                      const dcomplex[::1] dstat, const dcomplex[::1] dcoup,
                      double c, const dcomplex* v, dcomplex* out, int dim) noexcept nogil:
    cdef int i, p
    cdef dcomplex acc
    for i in range(dim):
        acc = 0
        for p in range(indptr[i], indptr[i + 1]):
            acc = acc + (dstat[p] + c * dcoup[p]) * v[indices[p]]
        out[i] = MINUS_I * acc


cdef void _propagate_one(const int[::1] indptr, const int[::1] indices,
                         const dcomplex[::1] dstat, const dcomplex[::1] dcoup,
                         const double[::1] x, double dt, int n_sub, double k_f,
                         dcomplex* psi, dcomplex* k1, dcomplex* k2, dcomplex* k3,
                         dcomplex* k4, dcomplex* tmp, dcomplex[:, ::1] out,
                         int dim, int m) noexcept nogil:
    cdef int i, j, s
    cdef double x0, dx, h, c0, ch, c1
    h = dt / n_sub
    for i in range(dim):
        out[0, i] = psi[i]
    for j in range(m - 1):
        x0 = x[j]
        dx = x[j + 1] - x[j]
        for s in range(n_sub):
            c0 = cos(k_f * (x0 + dx * (s / <double> n_sub)))
            ch = cos(k_f * (x0 + dx * ((s + 0.5) / <double> n_sub)))
            c1 = cos(k_f * (x0 + dx * ((s + 1.0) / <double> n_sub)))
            _rhs(indptr, indices, dstat, dcoup, c0, psi, k1, dim)
            for i in range(dim):
                tmp[i] = psi[i] + 0.5 * h * k1[i]
            _rhs(indptr, indices, dstat, dcoup, ch, tmp, k2, dim)
            for i in range(dim):
                tmp[i] = psi[i] + 0.5 * h * k2[i]
            _rhs(indptr, indices, dstat, dcoup, ch, tmp, k3, dim)
            for i in range(dim):
                tmp[i] = psi[i] + h * k3[i]
            _rhs(indptr, indices, dstat, dcoup, c1, tmp, k4, dim)
            for i in range(dim):
                psi[i] = psi[i] + (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
        for i in range(dim):
            out[j + 1, i] = psi[i]


def propagate_path(int[::1] indptr, int[::1] indices,
                   dcomplex[::1] data_static, dcomplex[::1] data_coupling,
                   dcomplex[::1] psi0, double[::1] x, double dt, int n_sub, double k_f):
    """States at every grid point for one coupling path x; shape (m, dim)."""
    cdef int dim = psi0.shape[0]
    cdef int m = x.shape[0]
    out_arr = np.empty((m, dim), dtype=complex)
    work = np.empty((6, dim), dtype=complex)
    cdef dcomplex[:, ::1] out = out_arr
    cdef dcomplex[:, ::1] w = work
    cdef int i
    for i in range(dim):
        w[0, i] = psi0[i]
    with nogil:
        _propagate_one(indptr, indices, data_static, data_coupling, x, dt, n_sub, k_f,
                       &w[0, 0], &w[1, 0], &w[2, 0], &w[3, 0], &w[4, 0], &w[5, 0],
                       out, dim, m)
    return out_arr


def propagate_path_block(int[::1] indptr, int[::1] indices,
                         dcomplex[::1] data_static, dcomplex[::1] data_coupling,
                         dcomplex[::1] psi0, double[:, ::1] xs, double dt, int n_sub,
                         double k_f):
    """States for a batch of coupling paths xs of shape (B, m); returns (B, m, dim)."""
    cdef int dim = psi0.shape[0]
    cdef int n_paths = xs.shape[0]
    cdef int m = xs.shape[1]
    out_arr = np.empty((n_paths, m, dim), dtype=complex)
    work = np.empty((6, dim), dtype=complex)
    cdef dcomplex[:, :, ::1] out = out_arr
    cdef dcomplex[:, ::1] w = work
    cdef int b, i
    for b in range(n_paths):
        for i in range(dim):
            w[0, i] = psi0[i]
        with nogil:
            _propagate_one(indptr, indices, data_static, data_coupling, xs[b], dt, n_sub,
                           k_f, &w[0, 0], &w[1, 0], &w[2, 0], &w[3, 0], &w[4, 0], &w[5, 0],
                           out[b], dim, m)
    return out_arr
