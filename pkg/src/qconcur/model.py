"""Two interacting two-level atoms coupled to one truncated cavity mode.

Basis states |s1 s2 n> are ordered lexicographically by (s1, s2, n) with
s = 1 the excited atom level and 0 <= n <= n_max the photon number, so the
flat index is (2*s1 + s2)*(n_max + 1) + n.  The generator used for time
evolution is, in the interaction picture,

    V(x) = Omega (S1+ S2- + S1- S2+) + omega_f b'b
           - g0 cos(k_f x) [(S1+ + S2+) b + (S1- + S2-) b'].

hbar = 1 throughout.  The Zeeman term omega0 (S1z + S2z) is absorbed by
the interaction frame and never appears in V; omega0 is carried in the
parameter set for bookkeeping only.
"""
import math
from dataclasses import dataclass

import numpy as np

from .concurrence import Populations
from .errors import InvalidParameters, NotNormalized
from .special import poisson_weight


def default_n_max(nbar):
    """Truncation rule: generous Poisson-tail headroom above nbar."""
    return math.ceil(nbar + 10.0 * math.sqrt(nbar) + 10.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the two-atom cavity model (hbar = 1).

    omega0:  Zeeman frequency of the atoms (bookkeeping only, see module doc)
    Omega:   atom-atom exchange coupling
    omega_f: field mode frequency
    g0:      coupling amplitude; position enters through g0*cos(k_f*x)
    k_f:     field wavenumber
    nbar:    mean photon number of the field state
    n_max:   Fock truncation (defaults to the truncation rule)
    """

    omega0: float
    Omega: float
    omega_f: float
    g0: float
    k_f: float
    nbar: float
    n_max: int = None

    def __post_init__(self):
        if self.n_max is None:
            object.__setattr__(self, "n_max", default_n_max(self.nbar))
        for name in ("omega0", "Omega", "omega_f", "g0"):
            if getattr(self, name) < 0:
                raise InvalidParameters(f"{name} must be >= 0")
        if self.nbar <= 0:
            raise InvalidParameters("nbar must be > 0")
        if self.n_max < self.nbar + 10.0 * math.sqrt(self.nbar):
            raise InvalidParameters(
                f"n_max={self.n_max} below the truncation rule "
                f"nbar + 10*sqrt(nbar) = {self.nbar + 10 * math.sqrt(self.nbar):.1f}"
            )

    @property
    def dim(self):
        return 4 * (self.n_max + 1)


def basis_index(s1, s2, n, n_max):
    if not (0 <= n <= n_max):
        raise InvalidParameters(f"photon number {n} outside [0, {n_max}]")
    return (2 * s1 + s2) * (n_max + 1) + n


def basis_labels(n_max):
    """All (s1, s2, n) tuples in index order."""
    return [(s1, s2, n) for s1 in (0, 1) for s2 in (0, 1) for n in range(n_max + 1)]


def build_potential_parts(p):
    """Dense (static, coupling) pair with V(x) = static + cos(k_f x) * coupling.

    static holds the exchange and field terms, coupling holds the
    -g0 [(S1+ + S2+) b + h.c.] block with sqrt(n) bosonic matrix elements,
    truncated at n_max.
    """
    nph = p.n_max + 1
    dim = 4 * nph
    static = np.zeros((dim, dim), dtype=complex)
    coupling = np.zeros((dim, dim), dtype=complex)

    def idx(s1, s2, n):
        return (2 * s1 + s2) * nph + n

    for s1 in (0, 1):
        for s2 in (0, 1):
            for n in range(nph):
                static[idx(s1, s2, n), idx(s1, s2, n)] = p.omega_f * n
    for n in range(nph):
        static[idx(0, 1, n), idx(1, 0, n)] = p.Omega
        static[idx(1, 0, n), idx(0, 1, n)] = p.Omega

    # (S1+ b): |0,s2,n> -> sqrt(n) |1,s2,n-1>, plus the conjugate (S1- b')
    for s2 in (0, 1):
        for n in range(1, nph):
            el = -p.g0 * math.sqrt(n)
            coupling[idx(1, s2, n - 1), idx(0, s2, n)] += el
            coupling[idx(0, s2, n), idx(1, s2, n - 1)] += el
    for s1 in (0, 1):
        for n in range(1, nph):
            el = -p.g0 * math.sqrt(n)
            coupling[idx(s1, 1, n - 1), idx(s1, 0, n)] += el
            coupling[idx(s1, 0, n), idx(s1, 1, n - 1)] += el
    return static, coupling


def build_potential(p, x):
    """Dense generator V(x) at atom position x."""
    static, coupling = build_potential_parts(p)
    return static + math.cos(p.k_f * x) * coupling


def transition_graph(n_max):
    """Exactly the transitions the coupling allows, as a set of index pairs
    (i, j) with i < j:

        |0,0,n+1> <-> |0,1,n>      |0,0,n+1> <-> |1,0,n>
        |0,1,n>   <-> |1,1,n-1>    |1,0,n>   <-> |1,1,n-1>
        |1,0,n>   <-> |0,1,n>
    """
    pairs = set()

    def add(a, b):
        pairs.add((min(a, b), max(a, b)))

    for n in range(n_max):
        add(basis_index(0, 0, n + 1, n_max), basis_index(0, 1, n, n_max))
        add(basis_index(0, 0, n + 1, n_max), basis_index(1, 0, n, n_max))
    for n in range(1, n_max + 1):
        add(basis_index(0, 1, n, n_max), basis_index(1, 1, n - 1, n_max))
        add(basis_index(1, 0, n, n_max), basis_index(1, 1, n - 1, n_max))
    for n in range(n_max + 1):
        add(basis_index(1, 0, n, n_max), basis_index(0, 1, n, n_max))
    return pairs


def excitation_operator(n_max):
    """Dense S1z + S2z + b'b, which commutes with the full generator."""
    diag = [(s1 - 0.5) + (s2 - 0.5) + n for (s1, s2, n) in basis_labels(n_max)]
    return np.diag(np.array(diag, dtype=complex))


def coherent_field_amplitudes(nbar, n_max):
    """Real amplitudes with Poissonian populations, renormalized over the
    truncated Fock range (the truncation rule keeps the deficit < 1e-10)."""
    w = np.array([poisson_weight(n, nbar) for n in range(n_max + 1)])
    amp = np.sqrt(w)
    return amp / np.linalg.norm(amp)


def fock_field_amplitudes(n, n_max):
    if not (0 <= n <= n_max):
        raise InvalidParameters(f"Fock level {n} outside [0, {n_max}]")
    amp = np.zeros(n_max + 1)
    amp[n] = 1.0
    return amp


def initial_state(c, field):
    """Product state with atom amplitudes c = (c00, c01, c10, c11) and
    field amplitudes over photon numbers 0..n_max."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    field = np.asarray(field, dtype=complex).reshape(-1)
    if c.shape != (4,):
        raise NotNormalized(f"expected 4 atom amplitudes, got {c.shape}")
    if abs(np.linalg.norm(c) - 1.0) > 1e-9:
        raise NotNormalized("atom amplitudes are not unit-normalized")
    if abs(np.linalg.norm(field) - 1.0) > 1e-9:
        raise NotNormalized("field amplitudes are not unit-normalized")
    return np.kron(c, field)


def reduced_populations(psi):
    """Level populations W(|s1 s2>) = sum_n |psi(s1, s2, n)|^2."""
    psi = np.asarray(psi).reshape(4, -1)
    w = np.sum(np.abs(psi) ** 2, axis=1)
    return Populations(w[0], w[1], w[2], w[3])


def reduced_density(psi):
    """4x4 atom-pair density matrix with the field traced out."""
    a = np.asarray(psi).reshape(4, -1)
    return a @ a.conj().T
