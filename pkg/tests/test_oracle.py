import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wsladder.model import LatticeSpec, PulseSchedule, build_hamiltonian
from wsladder.oracle import charpoly_eigenvalue_count, expm_propagate, jacobi_eigen, jacobi_eigen_batch
from wsladder.spectrum import sturm_count


def test_diagonal_input_is_its_own_decomposition():
    m = np.diag([0.5, 3.0, -1.0])
    dec = jacobi_eigen(m)
    assert dec.eigenvalues.tolist() == [3.0, 0.5, -1.0]
    assert np.array_equal(np.abs(dec.eigenvectors), np.eye(3)[:, [1, 0, 2]])


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_two_by_two_closed_form(a, b, c):
    dec = jacobi_eigen(np.array([[a, c], [c, b]]))
    r = math.sqrt((a - b) ** 2 / 4 + c * c)
    assert dec.eigenvalues == pytest.approx([(a + b) / 2 + r, (a + b) / 2 - r], abs=1e-12)


def test_early_time_matrix():
    dec = jacobi_eigen(build_hamiltonian(LatticeSpec(8, 1.0), 0.0, 1.0))
    s5 = math.sqrt(5)
    expected = sorted([3.5, 2 + s5 / 2, 2 - s5 / 2, s5 / 2, -s5 / 2, -2 + s5 / 2, -2 - s5 / 2, -3.5], reverse=True)
    assert np.allclose(dec.eigenvalues, expected, rtol=0, atol=1e-12)


def test_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        jacobi_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


@given(st.integers(2, 16), st.integers(0, 2**31))
def test_orthogonal_eigenvectors(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    a = a + a.T
    dec = jacobi_eigen(a)
    assert np.max(np.abs(dec.eigenvectors.T @ dec.eigenvectors - np.eye(n))) <= 1e-10
    assert np.allclose(a @ dec.eigenvectors, dec.eigenvectors * dec.eigenvalues, atol=1e-10 * np.abs(a).sum())


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    stack = rng.normal(size=(5, 6, 6))
    stack = stack + np.swapaxes(stack, 1, 2)
    values, _ = jacobi_eigen_batch(stack)
    for k in range(5):
        assert np.allclose(values[k], jacobi_eigen(stack[k]).eigenvalues, atol=1e-12)


def test_expm_diagonal_phases():
    spec = LatticeSpec(4, 1.0)
    c0 = np.array([0.5, 0.5j, -0.5, 0.5], dtype=complex)
    res = expm_propagate(spec, PulseSchedule.constant(0.0, 0.0), 0.0, 2.0, 0.1, c0)
    expected = c0 * np.exp(-1j * spec.diagonal() * 2.0)
    assert np.allclose(res.final_state, expected, atol=1e-13)


def test_expm_norm_preserved():
    spec = LatticeSpec(6, 2.0)
    res = expm_propagate(spec, PulseSchedule.sigmoid(3.0, 0.5), -6.0, 6.0, 0.01)
    assert res.norm_drift <= 1e-12


class TestCharpolyCount:
    H = build_hamiltonian(LatticeSpec(8, 1.0), 0.0, 1.0)

    def test_gershgorin_ends(self):
        assert charpoly_eigenvalue_count(self.H, -3.5 - 2.0 - 1e-9) == 0
        assert charpoly_eigenvalue_count(self.H, 3.5 + 2.0 + 1e-9) == 8

    def test_four_negative(self):
        assert charpoly_eigenvalue_count(self.H, 0.0) == 4

    def test_agrees_with_fast_count_at_random_shifts(self):
        rng = np.random.default_rng(11)
        H = build_hamiltonian(LatticeSpec(12, 0.9), 0.6, 1.4)
        lo, hi = -8.0, 8.0
        shifts = rng.uniform(lo, hi, 100)
        fast = sturm_count(H.diag, H.offdiag, shifts)
        slow = [charpoly_eigenvalue_count(H, x) for x in shifts]
        assert fast.tolist() == slow
        ev = np.linalg.eigvalsh(H.to_dense())
        assert slow == [int(np.sum(ev < x)) for x in shifts]
