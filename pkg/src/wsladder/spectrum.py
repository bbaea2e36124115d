"""Instantaneous spectra, asymptotic eigensystems and the transport rule.

The numerical solver is Sturm-sequence bisection for eigenvalues followed
by inverse iteration for eigenvectors. The matrix is first split into
independent blocks wherever an off-diagonal entry vanishes (to working
precision), which is the situation at the asymptotic times of a pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import LatticeSpec, TridiagonalHamiltonian, build_hamiltonian

_EPS = np.finfo(float).eps
# relative distance from an interval edge that counts as "on the boundary"
BOUNDARY_RTOL = 1e-9


class EigenSolverError(RuntimeError):
    """Inverse iteration failed to converge; fall back to a dense solver."""


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def min_gap(self) -> float:
        if self.eigenvalues.size < 2:
            return math.inf
        return float(np.min(-np.diff(self.eigenvalues)))


@dataclass(frozen=True, eq=False)
class TransportPrediction:
    quantum_number: int
    target_cell: int
    theta: float
    target_state: np.ndarray
    interval: tuple[float, float]
    on_boundary: bool = False


def sturm_count(diag, offdiag, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift.

    Counts negative pivots of the LDL^T factorisation of ``T - x I``
    (equivalently, sign changes of the leading principal minors).
    """
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(offdiag, dtype=float) ** 2
    x = np.atleast_1d(np.asarray(shifts, dtype=float))
    scale = max(float(np.max(np.abs(d), initial=0.0)), float(np.sqrt(np.max(e2, initial=0.0))), 1.0)
    pivmin = _EPS**2 * scale
    count = np.zeros(x.shape, dtype=np.int64)
    q = d[0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count += q < 0
    for i in range(1, d.size):
        q = (d[i] - x) - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def _gershgorin(d: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    r = np.zeros_like(d)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    return float(np.min(d - r)), float(np.max(d + r))


def _bisect_block(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """All eigenvalues of an unreduced block, ascending."""
    n = d.size
    if n == 1:
        return d.copy()
    lo0, hi0 = _gershgorin(d, e)
    width = max(hi0 - lo0, _EPS)
    lo = np.full(n, lo0 - _EPS * width)
    hi = np.full(n, hi0 + _EPS * width)
    index = np.arange(n)
    tol_abs = 1e-300
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = sturm_count(d, e, mid)
        upper = below > index
        hi = np.where(upper, mid, hi)
        lo = np.where(upper, lo, mid)
        tol = 2.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + tol_abs
        if np.all(hi - lo <= tol):
            break
    return 0.5 * (lo + hi)


def _solve_shifted(d, e, shift, rhs, pivmin):
    """Solve ``(T - shift I) x = rhs`` by Gaussian elimination with partial pivoting."""
    n = len(d)
    # rows after elimination: a[i] x_i + b[i] x_{i+1} + c[i] x_{i+2}
    a = [d[i] - shift for i in range(n)]
    b = list(e) + [0.0]
    c = [0.0] * n
    sub = list(e)
    y = list(rhs)
    for i in range(n - 1):
        if abs(sub[i]) > abs(a[i]):
            # swap rows i and i+1
            a_i, b_i, c_i, y_i = a[i], b[i], c[i], y[i]
            a[i], b[i], c[i], y[i] = sub[i], a[i + 1], b[i + 1], y[i + 1]
            f = a_i / a[i]
            a[i + 1] = b_i - f * b[i]
            b[i + 1] = c_i - f * c[i]
            y[i + 1] = y_i - f * y[i]
        else:
            if abs(a[i]) < pivmin:
                a[i] = pivmin
            f = sub[i] / a[i]
            a[i + 1] -= f * b[i]
            b[i + 1] -= f * c[i]
            y[i + 1] -= f * y[i]
    if abs(a[n - 1]) < pivmin:
        a[n - 1] = pivmin
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        if i + 1 < n:
            s -= b[i] * x[i + 1]
        if i + 2 < n:
            s -= c[i] * x[i + 2]
        x[i] = s / a[i]
    return np.array(x)


def _inverse_iteration(d: np.ndarray, e: np.ndarray, values: np.ndarray, max_iter: int = 8) -> np.ndarray:
    n = d.size
    vectors = np.zeros((n, n))
    if n == 1:
        vectors[0, 0] = 1.0
        return vectors
    norm = max(float(np.max(np.abs(d))) + 2.0 * float(np.max(np.abs(e))), _EPS)
    pivmin = _EPS * norm
    cluster_gap = 1e-3 * norm
    rng = np.random.default_rng(12345)
    start = rng.uniform(-1.0, 1.0, size=n)
    dl, el = d.tolist(), e.tolist()
    cluster_start = 0
    for j, lam in enumerate(values):
        if j > 0 and lam - values[j - 1] > cluster_gap:
            cluster_start = j
        x = start.copy()
        converged = False
        for _ in range(max_iter):
            y = _solve_shifted(dl, el, float(lam), x.tolist(), pivmin)
            if not np.all(np.isfinite(y)):
                y = _solve_shifted(dl, el, float(lam), (x * 1e-280).tolist(), pivmin)
            x = y
            for k in range(cluster_start, j):
                x -= (vectors[:, k] @ x) * vectors[:, k]
            nx = np.linalg.norm(x)
            if not np.isfinite(nx) or nx == 0.0:
                break
            x /= nx
            r = d * x - lam * x
            r[:-1] += e * x[1:]
            r[1:] += e * x[:-1]
            if np.linalg.norm(r) <= 1e-11 * norm:
                converged = True
                break
        if not converged:
            raise EigenSolverError(f"inverse iteration stalled at eigenvalue {lam!r}")
        i = int(np.argmax(np.abs(x)))
        vectors[:, j] = x if x[i] > 0 else -x
    return vectors


def eigen_decompose(H: TridiagonalHamiltonian) -> SpectralDecomposition:
    """Full eigensystem of a real symmetric tridiagonal matrix, eigenvalues descending."""
    d, e = H.diag, H.offdiag
    n = d.size
    values = np.empty(n)
    vectors = np.zeros((n, n))
    # couplings below eps*||T|| move no eigenvalue by more than rounding does
    split = np.abs(e) <= _EPS * H.norm()
    cuts = [0] + [i + 1 for i in np.flatnonzero(split)] + [n]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        bd, be = d[lo:hi], e[lo : hi - 1]
        vals = _bisect_block(bd, be)
        values[lo:hi] = vals
        vectors[lo:hi, lo:hi] = _inverse_iteration(bd, be, vals)
    order = np.argsort(-values, kind="stable")
    return SpectralDecomposition(values[order], vectors[:, order])


def mixing_angle(gamma: float, delta: float) -> float:
    """Rotation angle of a two-site block with splitting ``delta`` and coupling ``gamma``.

    The block ``[[m + delta/2, gamma], [gamma, m - delta/2]]`` has upper
    eigenvector ``(cos t, sin t)`` with ``tan 2t = 2 gamma / delta``.
    """
    if delta <= 0 or gamma < 0:
        raise ValueError("need delta > 0 and gamma >= 0")
    return 0.5 * math.atan2(2.0 * gamma, delta)


def _pair(spec: LatticeSpec, gamma: float, a: int, out: list):
    n = spec.n_sites
    diag = spec.diagonal()
    mean = 0.5 * (diag[a] + diag[a + 1])
    half = 0.5 * math.hypot(spec.delta, 2.0 * gamma)
    theta = mixing_angle(gamma, spec.delta)
    c, s = math.cos(theta), math.sin(theta)
    up = np.zeros(n)
    up[a], up[a + 1] = c, s
    down = np.zeros(n)
    down[a], down[a + 1] = -s, c
    out.append((mean + half, up))
    out.append((mean - half, down))


def _site(spec: LatticeSpec, j: int, out: list):
    v = np.zeros(spec.n_sites)
    v[j] = 1.0
    out.append((float(spec.diagonal()[j]), v))


def asymptotic_spectrum_early(spec: LatticeSpec, gamma: float) -> list[tuple[float, np.ndarray]]:
    """Closed-form eigenpairs for ``alpha = 0, beta = gamma``.

    Site 1 and site N decouple; sites (2,3), (4,5), ... form two-level
    blocks. Pairs come in site order, upper branch first, so the first
    entry is the isolated initial state ``|1>``.
    """
    out: list = []
    _site(spec, 0, out)
    for a in range(1, spec.n_sites - 1, 2):
        _pair(spec, gamma, a, out)
    if spec.n_sites > 1:
        _site(spec, spec.n_sites - 1, out)
    return out


def asymptotic_spectrum_late(spec: LatticeSpec, gamma: float) -> list[tuple[float, np.ndarray]]:
    """Closed-form eigenpairs for ``alpha = gamma, beta = 0``: one block per cell."""
    out: list = []
    for a in range(0, spec.n_sites, 2):
        _pair(spec, gamma, a, out)
    return out


def interval_bounds(k: int) -> tuple[float, float]:
    """Range of ``gamma/delta`` on which the quantum number equals ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.sqrt((2 * k - 3) * (2 * k - 2)), math.sqrt((2 * k - 1) * 2 * k)


def classify_ratio(gamma_over_delta: float, n_sites: int) -> tuple[int, bool]:
    """Quantum number and whether the ratio sits on an interval edge.

    Interior points are classified by exact rational comparison of the
    squared ratio with ``(2k-1)*2k``. Ratios within ``BOUNDARY_RTOL`` of an
    edge go to the lower interval and are flagged.
    """
    if not math.isfinite(gamma_over_delta) or gamma_over_delta < 0:
        raise ValueError(f"gamma/delta must be finite and >= 0, got {gamma_over_delta}")
    if n_sites < 2 or n_sites % 2:
        raise ValueError("n_sites must be even and >= 2")
    r2 = Fraction(gamma_over_delta) ** 2
    for k in range(1, n_sites // 2):
        bound = (2 * k - 1) * 2 * k
        if abs(gamma_over_delta - math.sqrt(bound)) <= BOUNDARY_RTOL * math.sqrt(bound):
            return k, True
        if r2 < bound:
            return k, False
    return n_sites // 2, False


def quantum_number(gamma_over_delta: float, n_sites: int) -> int:
    return classify_ratio(gamma_over_delta, n_sites)[0]


def predict_transport(spec: LatticeSpec, gamma: float) -> TransportPrediction:
    """Target cell and final state reached from ``|1>`` by the adiabatic pulse pair."""
    if not spec.delta > 0 or not gamma > 0:
        raise ValueError("prediction needs delta > 0 and gamma > 0")
    n, edge = classify_ratio(gamma / spec.delta, spec.n_sites)
    theta = mixing_angle(gamma, spec.delta)
    state = np.zeros(spec.n_sites)
    state[2 * n - 2] = math.cos(theta)
    state[2 * n - 1] = math.sin(theta)
    return TransportPrediction(n, n - 1, theta, state, interval_bounds(n), edge)


def initial_rank(spec: LatticeSpec, gamma: float) -> int:
    """Descending rank of the ``|1>`` eigenvalue in the early-time spectrum.

    Ties count in favour of ``|1>`` (lower interval convention).
    """
    if not spec.delta > 0:
        raise ValueError("delta must be > 0")
    pairs = asymptotic_spectrum_early(spec, gamma)
    top = pairs[0][0]
    return 1 + sum(1 for value, _ in pairs[1:] if value > top)


def late_eigenvector(spec: LatticeSpec, gamma: float, rank: int) -> np.ndarray:
    """Eigenvector of rank ``rank`` (1 = largest) at ``alpha = gamma, beta = 0``."""
    return eigen_decompose(build_hamiltonian(spec, gamma, 0.0)).eigenvectors[:, rank - 1]
