import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from wsladder.model import LatticeSpec, PulseSchedule, TridiagonalHamiltonian, build_hamiltonian, hamiltonian_at
from wsladder.oracle import charpoly_eigenvalue_count, jacobi_eigen
from wsladder.spectrum import (
    asymptotic_spectrum_early,
    asymptotic_spectrum_late,
    classify_ratio,
    eigen_decompose,
    initial_rank,
    interval_bounds,
    late_eigenvector,
    mixing_angle,
    predict_transport,
    quantum_number,
    sturm_count,
)

S5 = math.sqrt(5.0)


def sorted_values(pairs):
    return np.sort([v for v, _ in pairs])[::-1]


def check_decomposition(H, dec):
    norm = H.norm()
    dense = H.to_dense()
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    residual = dense @ dec.eigenvectors - dec.eigenvectors * dec.eigenvalues
    assert np.max(np.linalg.norm(residual, axis=0)) <= 1e-9 * norm
    gram = dec.eigenvectors.T @ dec.eigenvectors
    assert np.max(np.abs(gram - np.eye(H.size))) <= 1e-10


class TestEigenDecompose:
    def test_diagonal(self):
        H = build_hamiltonian(LatticeSpec(8, 1.0), 0.0, 0.0)
        dec = eigen_decompose(H)
        assert dec.eigenvalues.tolist() == [3.5, 2.5, 1.5, 0.5, -0.5, -1.5, -2.5, -3.5]
        assert np.array_equal(dec.eigenvectors, np.eye(8))

    def test_early_closed_form(self):
        dec = eigen_decompose(build_hamiltonian(LatticeSpec(8, 1.0), 0.0, 1.0))
        expected = sorted([3.5, 2 + S5 / 2, 2 - S5 / 2, S5 / 2, -S5 / 2, -2 + S5 / 2, -2 - S5 / 2, -3.5], reverse=True)
        assert np.allclose(dec.eigenvalues, expected, rtol=0, atol=1e-12)

    def test_late_closed_form(self):
        dec = eigen_decompose(build_hamiltonian(LatticeSpec(8, 1.0), 1.0, 0.0))
        expected = sorted([(c + s * S5) / 2 for c in (6, 2, -2, -6) for s in (1, -1)], reverse=True)
        assert np.allclose(dec.eigenvalues, expected, rtol=0, atol=1e-12)

    def test_two_by_two(self):
        H = TridiagonalHamiltonian([2.0, -1.0], [0.5])
        dec = eigen_decompose(H)
        half = math.sqrt(1.5**2 + 0.25)
        assert np.allclose(dec.eigenvalues, [0.5 + half, 0.5 - half], atol=1e-14)
        check_decomposition(H, dec)

    def test_wilkinson_like_close_pairs(self):
        # W21+ has pairs of eigenvalues agreeing to ~1e-14
        d = np.abs(np.arange(-10, 11)).astype(float)
        H = TridiagonalHamiltonian(d, np.ones(20))
        dec = eigen_decompose(H)
        ref = np.linalg.eigvalsh(H.to_dense())[::-1]
        assert np.max(np.abs(dec.eigenvalues - ref)) <= 1e-12 * H.norm()
        check_decomposition(H, dec)

    def test_one_site(self):
        dec = eigen_decompose(TridiagonalHamiltonian([0.3], []))
        assert dec.eigenvalues.tolist() == [0.3]
        assert dec.min_gap() == math.inf

    @given(
        st.integers(1, 8).map(lambda k: 2 * k),
        st.floats(0.0, 5.0),
        st.floats(0.0, 5.0),
        st.floats(0.01, 5.0),
    )
    def test_invariants(self, n, a, b, delta):
        H = build_hamiltonian(LatticeSpec(n, delta), a, b)
        dec = eigen_decompose(H)
        check_decomposition(H, dec)
        ref = np.linalg.eigvalsh(H.to_dense())[::-1]
        assert np.max(np.abs(dec.eigenvalues - ref)) <= 1e-9 * max(H.norm(), 1e-300)

    @given(st.integers(2, 8).map(lambda k: 2 * k), st.floats(0.05, 5.0), st.floats(0.05, 5.0), st.floats(0.0, 5.0))
    def test_simple_spectrum(self, n, a, b, delta):
        dec = eigen_decompose(build_hamiltonian(LatticeSpec(n, delta), a, b))
        assert dec.min_gap() > 0

    @given(st.floats(0.01, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(-12.0, 12.0))
    def test_sturm_count_matches_charpoly(self, delta, a, b, x):
        H = build_hamiltonian(LatticeSpec(10, delta), a, b)
        ev = np.linalg.eigvalsh(H.to_dense())
        assume(np.min(np.abs(ev - x)) > 1e-9)
        assert sturm_count(H.diag, H.offdiag, x)[0] == charpoly_eigenvalue_count(H, x)


class TestAsymptoticSpectra:
    def test_early_n8_labels(self):
        pairs = asymptotic_spectrum_early(LatticeSpec(8, 1.0), 1.0)
        assert pairs[0][0] == 3.5
        assert pairs[1][0] == pytest.approx(2 + S5 / 2, abs=1e-14)  # 3.1180
        theta = math.atan(2.0) / 2.0
        assert np.allclose(pairs[1][1][1:3], [math.cos(theta), math.sin(theta)], atol=1e-15)
        # the published label order is not the descending order at gamma = delta
        assert pairs[2][0] < pairs[3][0]

    def test_early_eigenvectors_are_eigenvectors(self):
        spec = LatticeSpec(8, 1.0)
        H = build_hamiltonian(spec, 0.0, 1.0).to_dense()
        for value, vec in asymptotic_spectrum_early(spec, 1.0):
            assert np.linalg.norm(H @ vec - value * vec) <= 1e-14

    def test_late_eigenvectors_are_eigenvectors(self):
        spec = LatticeSpec(8, 1.0)
        H = build_hamiltonian(spec, 1.0, 0.0).to_dense()
        pairs = asymptotic_spectrum_late(spec, 1.0)
        assert pairs[0][0] == pytest.approx((6 + S5) / 2, abs=1e-14)  # 4.1180
        assert pairs[0][0] == max(v for v, _ in pairs)
        for value, vec in pairs:
            assert np.linalg.norm(H @ vec - value * vec) <= 1e-14

    @pytest.mark.parametrize("which", [asymptotic_spectrum_early, asymptotic_spectrum_late])
    def test_decoupled_limit(self, which):
        spec = LatticeSpec(8, 1.0)
        assert np.array_equal(sorted_values(which(spec, 0.0)), spec.diagonal())

    def test_early_n12_matches_solver(self):
        spec = LatticeSpec(12, 1.0)
        num = eigen_decompose(build_hamiltonian(spec, 0.0, 2.0)).eigenvalues
        assert np.max(np.abs(sorted_values(asymptotic_spectrum_early(spec, 2.0)) - num)) <= 1e-10

    def test_late_n8_matches_solver(self):
        spec = LatticeSpec(8, 1.0)
        num = eigen_decompose(build_hamiltonian(spec, 3.0, 0.0)).eigenvalues
        assert np.max(np.abs(sorted_values(asymptotic_spectrum_late(spec, 3.0)) - num)) <= 1e-10

    @given(st.integers(1, 10).map(lambda k: 2 * k), st.floats(0.05, 20.0), st.floats(0.0, 30.0))
    def test_closed_forms_match_solver(self, n, delta, g):
        spec = LatticeSpec(n, delta)
        early = eigen_decompose(build_hamiltonian(spec, 0.0, g)).eigenvalues
        late = eigen_decompose(build_hamiltonian(spec, g, 0.0)).eigenvalues
        assert np.allclose(sorted_values(asymptotic_spectrum_early(spec, g)), early, rtol=0, atol=1e-10 * max(1, delta, g))
        assert np.allclose(sorted_values(asymptotic_spectrum_late(spec, g)), late, rtol=0, atol=1e-10 * max(1, delta, g))


class TestMixingAngle:
    def test_values(self):
        assert mixing_angle(0.0, 1.0) == 0.0
        assert mixing_angle(1.0, 1.0) == pytest.approx(0.5535743588970452, abs=1e-15)
        assert mixing_angle(1e12, 1.0) == pytest.approx(math.pi / 4, abs=1e-11)

    def test_diagonalises_block(self):
        g, d = 0.8, 1.3
        theta = mixing_angle(g, d)
        block = np.array([[d / 2, g], [g, -d / 2]])
        v = np.array([math.cos(theta), math.sin(theta)])
        lam = 0.5 * math.hypot(d, 2 * g)
        assert np.allclose(block @ v, lam * v, atol=1e-15)

    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
    def test_range(self, g, d):
        assert 0.0 < mixing_angle(g, d) < math.pi / 4 + 1e-15


class TestQuantumNumber:
    @pytest.mark.parametrize("ratio,n", [(1, 1), (2, 2), (4, 3), (6, 4)])
    def test_eight_site_rule(self, ratio, n):
        assert quantum_number(ratio, 8) == n

    def test_general_rule(self):
        assert quantum_number(8.0, 10) == 5
        assert quantum_number(8.0, 12) == 5

    def test_cap(self):
        # independent: rank of 3.5 among the numerically sorted early spectrum of N=8
        ev = np.linalg.eigvalsh(build_hamiltonian(LatticeSpec(8, 1.0), 0.0, 8.0).to_dense())[::-1]
        rank = 1 + int(np.sum(ev > 3.5 + 1e-9))
        assert rank == 4
        assert quantum_number(8.0, 8) == rank

    def test_boundary_goes_low_and_is_flagged(self):
        assert classify_ratio(math.sqrt(2), 8) == (1, True)
        assert classify_ratio(math.sqrt(30), 8) == (3, True)
        assert classify_ratio(math.sqrt(2) * (1 + 1e-6), 8) == (2, False)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            quantum_number(-1.0, 8)

    def test_interval_bounds(self):
        assert interval_bounds(1) == (0.0, math.sqrt(2))
        assert interval_bounds(2) == (math.sqrt(2), 2 * math.sqrt(3))
        lo, hi = interval_bounds(5)
        assert (lo, hi) == pytest.approx((7.4833147735, 9.4868329805), abs=1e-9)

    def test_interval_length_corrected_asymptotics(self):
        # the expansion of the interval length is 2 + 1/(16 k^2) + O(k^-3)
        for k in range(2, 51):
            lo, hi = interval_bounds(k)
            assert abs(hi - lo - 2 - 1 / (16 * k * k)) <= 1 / k**3

    @pytest.mark.parametrize("n_sites,gamma,rank", [(8, 1.0, 1), (8, 2.0, 2), (10, 6.0, 4)])
    def test_initial_rank(self, n_sites, gamma, rank):
        spec = LatticeSpec(n_sites, 1.0)
        ev = np.linalg.eigvalsh(build_hamiltonian(spec, 0.0, gamma).to_dense())
        assert 1 + int(np.sum(ev > spec.diagonal()[0] + 1e-9)) == rank
        assert initial_rank(spec, gamma) == rank

    @given(st.sampled_from([8, 10, 16]), st.floats(1e-3, 12.0))
    def test_rank_equals_quantum_number(self, n, ratio):
        for k in range(1, 10):
            assume(abs(ratio - math.sqrt((2 * k - 1) * 2 * k)) > 1e-6)
        spec = LatticeSpec(n, 1.0)
        assert initial_rank(spec, ratio) == quantum_number(ratio, n)


class TestPrediction:
    def test_first_branch(self):
        p = predict_transport(LatticeSpec(8, 1.0), 1.0)
        assert (p.quantum_number, p.target_cell) == (1, 0)
        theta = math.atan(2.0) / 2
        assert np.allclose(p.target_state, [math.cos(theta), math.sin(theta), 0, 0, 0, 0, 0, 0], atol=1e-15)
        assert not p.on_boundary

    def test_third_branch(self):
        p = predict_transport(LatticeSpec(8, 1.0), 4.0)
        assert p.quantum_number == 3 and p.target_cell == 2
        assert np.flatnonzero(p.target_state).tolist() == [4, 5]

    def test_decoupled_limit(self):
        p = predict_transport(LatticeSpec(8, 1e9), 1.0)
        assert p.quantum_number == 1 and p.theta < 1e-8
        assert p.target_state[0] == pytest.approx(1.0)

    def test_target_is_late_eigenvector_of_rank_n(self):
        for n_sites, gamma in [(8, 1.0), (8, 2.5), (10, 6.5), (16, 9.0)]:
            spec = LatticeSpec(n_sites, 1.0)
            p = predict_transport(spec, gamma)
            v = late_eigenvector(spec, gamma, p.quantum_number)
            assert abs(v @ p.target_state) == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(1, 10).map(lambda k: 2 * k), st.floats(0.01, 10), st.floats(0.01, 100))
    def test_invariants(self, n, delta, g):
        p = predict_transport(LatticeSpec(n, delta), g)
        assert 0 < p.theta < math.pi / 4
        assert 1 <= p.quantum_number <= n // 2
        assert p.target_cell == p.quantum_number - 1
        assert np.linalg.norm(p.target_state) == pytest.approx(1.0, abs=1e-15)


def test_adiabatic_states_along_schedule():
    spec = LatticeSpec(8, 10.0)
    s = PulseSchedule.sigmoid(20.0, 1.0)
    for t in np.linspace(-25, 25, 11):
        H = hamiltonian_at(spec, s, float(t))
        check_decomposition(H, eigen_decompose(H))
        ref = jacobi_eigen(H).eigenvalues
        assert np.max(np.abs(eigen_decompose(H).eigenvalues - ref)) <= 1e-9 * H.norm()
