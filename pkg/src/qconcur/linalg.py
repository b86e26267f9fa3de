"""Small dense complex linear algebra.

Kronecker products, Hermitian eigendecompositions and PSD matrix square
roots, on plain numpy arrays.  Everything is sized for the small matrices
used in this package (two-qubit densities, Fock-truncated Hamiltonians up
to a few hundred rows); LAPACK via numpy does the heavy lifting.  All
functions are pure and the returned arrays are never aliased to inputs.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, NegativeEigenvalue, NoConvergence, NonHermitian

HERMITIAN_TOL = 1e-10
# eigenvalues of nominally-PSD matrices this close to zero are round-off
EIG_CLAMP = 1e-12
# dense-only module: refuse matrices beyond this size
DIM_CAP = 1024


def kron(a, b):
    """Kronecker product of two complex matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted in decreasing order; vectors[:, k] pairs with values[k]."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def _checked_square(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitian(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > DIM_CAP:
        raise InvalidParameters(f"dense eigensolver capped at dimension {DIM_CAP}")
    return m


def eig_hermitian(m, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises NonHermitian if ``m`` deviates from its conjugate transpose by
    more than ``tol`` (element-wise), NoConvergence if LAPACK fails.
    """
    m = _checked_square(m)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian symmetry by {dev:.3e}")
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    return EigenDecomposition(values[::-1].copy(), vectors[:, ::-1].copy())


def sqrt_psd(m, tol=HERMITIAN_TOL):
    """Hermitian square root S of a PSD matrix, with S @ S == m.

    Eigenvalues within EIG_CLAMP of zero are round-off and clamped to zero
    before the square root (a +1e-16 stray would otherwise surface as a
    1e-8 eigenvalue of S); anything below -EIG_CLAMP raises
    NegativeEigenvalue.
    """
    dec = eig_hermitian(m, tol=tol)
    w = dec.values.copy()
    if w.min(initial=0.0) < -EIG_CLAMP:
        raise NegativeEigenvalue(
            f"matrix has eigenvalue {w.min():.3e} below the PSD clamp -{EIG_CLAMP:g}"
        )
    w[np.abs(w) <= EIG_CLAMP] = 0.0
    s = (dec.vectors * np.sqrt(w)) @ dec.vectors.conj().T
    return 0.5 * (s + s.conj().T)
