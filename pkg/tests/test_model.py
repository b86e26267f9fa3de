import math

import numpy as np
import pytest

from qconcur import model
from qconcur.errors import InvalidParameters, NotNormalized
from qconcur.special import poisson_weight


def small_params(**kw):
    base = dict(omega0=1.0, Omega=0.3, omega_f=0.7, g0=0.2, k_f=1.3, nbar=0.25, n_max=6)
    base.update(kw)
    return model.ModelParams(**base)


def test_params_validation():
    with pytest.raises(InvalidParameters):
        small_params(Omega=-0.1)
    with pytest.raises(InvalidParameters):
        small_params(nbar=4.0)  # n_max=6 below the truncation rule
    with pytest.raises(InvalidParameters):
        small_params(nbar=-1.0)


def test_default_truncation_rule():
    p = model.ModelParams(omega0=1, Omega=0.05, omega_f=0.1, g0=0.1, k_f=1, nbar=4.0)
    assert p.n_max == math.ceil(4 + 10 * 2 + 10)
    assert p.n_max >= p.nbar + 10 * math.sqrt(p.nbar)
    assert p.dim == 4 * (p.n_max + 1)


def test_exchange_matrix_element():
    p = small_params()
    V = model.build_potential(p, 0.413)
    for n in range(p.n_max + 1):
        i = model.basis_index(0, 1, n, p.n_max)
        j = model.basis_index(1, 0, n, p.n_max)
        assert V[i, j] == p.Omega


def test_no_direct_double_flip():
    p = small_params()
    V = model.build_potential(p, 0.917)
    for n in range(1, p.n_max + 1):
        i = model.basis_index(0, 0, n, p.n_max)
        for m in range(p.n_max):
            j = model.basis_index(1, 1, m, p.n_max)
            assert V[i, j] == 0.0


def test_bosonic_matrix_element():
    p = small_params()
    x = 0.31
    V = model.build_potential(p, x)
    for n in range(p.n_max):
        i = model.basis_index(0, 0, n + 1, p.n_max)
        j = model.basis_index(0, 1, n, p.n_max)
        expected = -p.g0 * math.cos(p.k_f * x) * math.sqrt(n + 1)
        assert abs(V[i, j] - expected) < 1e-15


def test_potential_hermitian_random_x():
    p = small_params()
    rng = np.random.default_rng(3)
    for _ in range(25):
        V = model.build_potential(p, rng.uniform(-8, 8))
        assert np.max(np.abs(V - V.conj().T)) < 1e-12


def test_sparsity_pattern_matches_graph():
    p = small_params()
    graph = model.transition_graph(p.n_max)
    rng = np.random.default_rng(17)
    for _ in range(25):
        x = rng.uniform(-8, 8)
        if abs(math.cos(p.k_f * x)) <= 1e-12:
            continue
        V = model.build_potential(p, x)
        off = set(zip(*np.nonzero(np.triu(np.abs(V), k=1) > 1e-14)))
        assert off == graph


def test_graph_neighbors():
    n_max = 6
    graph = model.transition_graph(n_max)

    def neighbors(idx):
        return {j if i == idx else i for i, j in graph if idx in (i, j)}

    n = 2
    up = model.basis_index(0, 0, n + 1, n_max)
    assert neighbors(up) == {
        model.basis_index(0, 1, n, n_max),
        model.basis_index(1, 0, n, n_max),
    }
    dn = model.basis_index(1, 1, n - 1, n_max)
    assert neighbors(dn) == {
        model.basis_index(0, 1, n, n_max),
        model.basis_index(1, 0, n, n_max),
    }


def test_graph_boundary_indices_in_range():
    n_max = 4
    dim = 4 * (n_max + 1)
    graph = model.transition_graph(n_max)
    for i, j in graph:
        assert 0 <= i < j < dim
    # |0,0,0> would only couple to photon number -1: it must be isolated
    ground = model.basis_index(0, 0, 0, n_max)
    assert all(ground not in pair for pair in graph)


def test_excitation_operator_commutes():
    p = small_params()
    N = model.excitation_operator(p.n_max)
    for x in (0.0, 0.37, 2.9):
        V = model.build_potential(p, x)
        assert np.max(np.abs(V @ N - N @ V)) < 1e-12


def test_initial_state_examples():
    n_max = 6
    psi = model.initial_state([1, 0, 0, 0], model.fock_field_amplitudes(3, n_max))
    expect = np.zeros(4 * (n_max + 1), dtype=complex)
    expect[model.basis_index(0, 0, 3, n_max)] = 1.0
    assert np.array_equal(psi, expect)

    s = 1 / math.sqrt(2)
    field = model.coherent_field_amplitudes(4.0, 44)
    psi = model.initial_state([0, s, s, 0], field)
    for n in (0, 4, 9):
        idx = model.basis_index(0, 1, n, 44)
        assert abs(psi[idx] - field[n] * s) < 1e-15
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12


def test_initial_state_validation():
    with pytest.raises(NotNormalized):
        model.initial_state([1, 1, 0, 0], model.fock_field_amplitudes(0, 3))
    bad_field = np.ones(4)
    with pytest.raises(NotNormalized):
        model.initial_state([1, 0, 0, 0], bad_field)


def test_coherent_amplitudes_truncation():
    n_max = model.default_n_max(4.0)
    total = sum(poisson_weight(n, 4.0) for n in range(n_max + 1))
    assert total >= 1 - 1e-10
    amp = model.coherent_field_amplitudes(4.0, n_max)
    assert abs(np.linalg.norm(amp) - 1.0) < 1e-12


def test_reduced_populations_examples():
    n_max = 8
    s = 1 / math.sqrt(2)
    psi = model.initial_state([0, s, s, 0], model.coherent_field_amplitudes(0.3, n_max))
    w = model.reduced_populations(psi)
    assert abs(w.w01 - 0.5) < 1e-12 and abs(w.w10 - 0.5) < 1e-12
    assert w.w00 < 1e-15 and w.w11 < 1e-15

    basis = model.initial_state([0, 0, 0, 1], model.fock_field_amplitudes(5, n_max))
    w = model.reduced_populations(basis)
    assert (w.w00, w.w01, w.w10, w.w11) == (0.0, 0.0, 0.0, 1.0)


def test_reduced_populations_phase_invariance():
    rng = np.random.default_rng(29)
    n_max = 5
    psi = rng.standard_normal(4 * (n_max + 1)) + 1j * rng.standard_normal(4 * (n_max + 1))
    psi /= np.linalg.norm(psi)
    w = model.reduced_populations(psi)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, n_max + 1))
    rotated = (psi.reshape(4, -1) * phases).reshape(-1)
    w2 = model.reduced_populations(rotated)
    assert np.allclose(w.as_array(), w2.as_array(), atol=1e-14)


def test_reduced_density_against_kraus_oracle():
    # independent partial-trace oracle: sum_n (I4 (x) <n|) rho (I4 (x) |n>)
    rng = np.random.default_rng(53)
    n_max = 4
    nph = n_max + 1
    psi = rng.standard_normal(4 * nph) + 1j * rng.standard_normal(4 * nph)
    psi /= np.linalg.norm(psi)
    rho_full = np.outer(psi, psi.conj())
    expected = np.zeros((4, 4), dtype=complex)
    for n in range(nph):
        ket = np.zeros((nph, 1))
        ket[n] = 1.0
        k = np.kron(np.eye(4), ket)
        expected += k.conj().T @ rho_full @ k
    got = model.reduced_density(psi)
    assert np.allclose(got, expected, atol=1e-13)
    assert abs(np.trace(got).real - 1.0) < 1e-12
    w = model.reduced_populations(psi)
    assert np.allclose(np.diag(got).real, w.as_array(), atol=1e-14)
