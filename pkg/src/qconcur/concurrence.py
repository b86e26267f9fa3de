"""Two-qubit entanglement measures.

Pure-state concurrence in its magic-basis form, the equivalent determinant
form 2|a00*a11 - a01*a10|, the spin-flip (Wootters) mixed-state
concurrence, and the ensemble-averaged concurrence built from level
populations.  Basis order everywhere is |00>, |01>, |10>, |11>.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NotNormalized

NORM_TOL = 1e-10
DENSITY_TOL = 1e-10

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
# spin-flip conjugation matrix sigma_y (x) sigma_y
_YY = np.real(linalg.kron(SIGMA_Y, SIGMA_Y))


@dataclass(frozen=True)
class Populations:
    """Occupations of the four two-qubit levels after the field is traced out."""

    w00: float
    w01: float
    w10: float
    w11: float

    def __post_init__(self):
        vals = self.as_array()
        if vals.min() < -1e-9 or vals.max() > 1 + 1e-9:
            raise NotNormalized(f"populations outside [0, 1]: {vals}")
        if abs(vals.sum() - 1.0) > 1e-9:
            raise NotNormalized(f"populations sum to {vals.sum()!r}, not 1")

    def as_array(self):
        return np.array([self.w00, self.w01, self.w10, self.w11])

    @classmethod
    def normalized(cls, w00, w01, w10, w11):
        """Build from non-negative weights, rescaling them to unit sum."""
        total = w00 + w01 + w10 + w11
        if total <= 0:
            raise NotNormalized("weights must have a positive sum")
        return cls(w00 / total, w01 / total, w10 / total, w11 / total)


def bell_basis():
    """The four maximally entangled basis states (magic basis), as
    amplitude vectors over |00>,|01>,|10>,|11>:
    e1 = phi+, e2 = i*phi-, e3 = i*psi+, e4 = psi-."""
    s = 1.0 / math.sqrt(2.0)
    return [
        np.array([s, 0, 0, s], dtype=complex),
        np.array([1j * s, 0, 0, -1j * s], dtype=complex),
        np.array([0, 1j * s, 1j * s, 0], dtype=complex),
        np.array([0, s, -s, 0], dtype=complex),
    ]


def _check_state(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise NotNormalized(f"expected 4 amplitudes, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL:g}")
    return psi


def concurrence_pure(psi):
    """Concurrence |sum_i <e_i|psi>^2| of a normalized two-qubit state.

    Also evaluated as 2|a00*a11 - a01*a10|; the two routes must agree to
    1e-12, which guards the magic-basis phases.
    """
    psi = _check_state(psi)
    magic = abs(sum(np.vdot(e, psi) ** 2 for e in bell_basis()))
    det_form = 2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2])
    if abs(magic - det_form) > 1e-12:
        raise ArithmeticError(
            f"magic-basis and determinant forms disagree: {magic!r} vs {det_form!r}"
        )
    return magic


def concurrence_product_form(w):
    """Concurrence 2|sqrt(w11*w00) - sqrt(w01*w10)| of the real
    square-root-amplitude state built from the level populations.

    Exact for states with non-negative real amplitudes sqrt(w_ij); for a
    general pure state use concurrence_pure.
    """
    return 2.0 * abs(math.sqrt(w.w11 * w.w00) - math.sqrt(w.w01 * w.w10))


def validate_density(rho, tol=DENSITY_TOL):
    """Check Hermiticity, unit trace and positivity of a 4x4 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotNormalized(f"expected a 4x4 density matrix, got shape {rho.shape}")
    dev = np.max(np.abs(rho - rho.conj().T))
    if dev > tol:
        raise NotNormalized(f"density deviates from Hermitian by {dev:.3e}")
    tr = rho.trace().real
    if abs(tr - 1.0) > tol:
        raise NotNormalized(f"density trace {tr!r} deviates from 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -tol:
        raise NotNormalized(f"density has negative eigenvalue {lo:.3e}")
    return rho


def spin_flip(rho):
    """Spin-flipped density (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y)."""
    rho = np.asarray(rho, dtype=complex)
    return _YY @ rho.conj() @ _YY


def concurrence_mixed_wootters(rho):
    """Mixed-state concurrence from the ordered eigenvalues l1>=..>=l4 of
    R = sqrt(sqrt(rho) rho~ sqrt(rho)): max(0, l1 - l2 - l3 - l4).

    Note: this is the standard sign convention; the report emitted by the
    sweep command documents the max{0, -l1, ..., -l4} variant sometimes
    quoted, which is identically zero because R is PSD.
    """
    rho = validate_density(rho)
    root = linalg.sqrt_psd(rho)
    inner = root @ spin_flip(rho) @ root
    inner = 0.5 * (inner + inner.conj().T)  # strip round-off asymmetry
    lam = linalg.eig_hermitian(linalg.sqrt_psd(inner)).values
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def concurrence_mixed_averaged(w):
    """Ensemble-averaged concurrence evaluated on statistically averaged
    populations (interference terms already decayed); numerically the
    product form, but its argument is the averaged weights."""
    return concurrence_product_form(w)
