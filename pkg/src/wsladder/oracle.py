"""Brute-force reference solvers used to cross-check the fast paths.

Nothing here shares code with :mod:`wsladder.spectrum` or
:mod:`wsladder.dynamics`: the eigensolver is cyclic Jacobi on dense
matrices and the propagator exponentiates each step Hamiltonian through
that eigensolver. Both are O(N^3) per matrix and meant for N <= 16.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .dynamics import EvolutionResult, default_time_window, initial_state
from .model import LatticeSpec, PulseSchedule, TridiagonalHamiltonian, alpha_at, beta_at
from .spectrum import SpectralDecomposition


def jacobi_eigen_batch(a: np.ndarray, rtol: float = 1e-13, max_sweeps: int = 50):
    """Cyclic Jacobi on a stack of symmetric matrices ``(..., n, n)``.

    Returns ``(values, vectors)`` with eigenvalues descending along the last
    axis and eigenvectors in the columns of ``vectors``.
    """
    a = np.array(a, dtype=float)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError("matrices must be square")
    if not np.allclose(a, np.swapaxes(a, -1, -2), rtol=0.0, atol=1e-14 * max(np.abs(a).max(initial=0.0), 1.0)):
        raise ValueError("jacobi_eigen needs a symmetric matrix")
    batch_shape, n = a.shape[:-2], a.shape[-1]
    a = a.reshape((-1, n, n))
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.sqrt(np.sum(a**2, axis=(1, 2)))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[:, off_mask] ** 2, axis=1))
        if np.all(off <= rtol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                app, aqq = a[:, p, p], a[:, q, q]
                safe = np.where(active, apq, 1.0)
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate columns p, q then rows p, q:  A <- J^T A J
                ap = a[:, :, p].copy()
                aq = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * ap - s[:, None] * aq
                a[:, :, q] = s[:, None] * ap + c[:, None] * aq
                ap = a[:, p, :].copy()
                aq = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * ap - s[:, None] * aq
                a[:, q, :] = s[:, None] * ap + c[:, None] * aq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c[:, None] * vp - s[:, None] * vq
                v[:, :, q] = s[:, None] * vp + c[:, None] * vq
    else:
        raise RuntimeError("Jacobi sweeps did not converge")
    values = np.diagonal(a, axis1=1, axis2=2)
    order = np.argsort(-values, axis=1, kind="stable")
    values = np.take_along_axis(values, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return values.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def jacobi_eigen(m) -> SpectralDecomposition:
    if isinstance(m, TridiagonalHamiltonian):
        m = m.to_dense()
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a single matrix")
    values, vectors = jacobi_eigen_batch(m)
    return SpectralDecomposition(values, vectors)


def _dense_stack(spec: LatticeSpec, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    n = spec.n_sites
    h = np.zeros((alpha.size, n, n))
    idx = np.arange(n)
    h[:, idx, idx] = spec.diagonal()
    for j in range(n - 1):
        hop = alpha if j % 2 == 0 else beta
        h[:, j, j + 1] = hop
        h[:, j + 1, j] = hop
    return h


def expm_propagate(
    spec: LatticeSpec,
    schedule: PulseSchedule,
    t_start: Optional[float] = None,
    t_end: Optional[float] = None,
    dt: float = 1e-3,
    initial: Optional[np.ndarray] = None,
    chunk: int = 4096,
) -> EvolutionResult:
    """Apply ``exp(-i dt H(t + dt/2))`` step by step, exact for piecewise-constant H.

    Uses the same equal-step grid as :func:`wsladder.dynamics.propagate`.
    """
    if t_start is None or t_end is None:
        w0, w1 = default_time_window(schedule)
        t_start = w0 if t_start is None else t_start
        t_end = w1 if t_end is None else t_end
    n_steps = max(1, math.ceil((t_end - t_start) / dt - 1e-9))
    h = (t_end - t_start) / n_steps
    c = initial_state(spec) if initial is None else np.array(initial, dtype=complex)
    drift = 0.0
    for start in range(0, n_steps, chunk):
        stop = min(start + chunk, n_steps)
        t_mid = t_start + (np.arange(start, stop) + 0.5) * h
        stack = _dense_stack(spec, np.asarray(alpha_at(schedule, t_mid)), np.asarray(beta_at(schedule, t_mid)))
        values, vectors = jacobi_eigen_batch(stack)
        phases = np.exp(-1j * h * values)
        for k in range(stop - start):
            vk = vectors[k]
            c = vk @ (phases[k] * (vk.T @ c))
            drift = max(drift, abs(float(np.linalg.norm(c)) - 1.0))
    return EvolutionResult(c, np.array([t_start, t_end]), drift, h, n_steps)


def charpoly_eigenvalue_count(H: TridiagonalHamiltonian, x: float) -> int:
    """Eigenvalues below ``x`` from sign changes of ``det(T_k - x I)``, k = 0..n.

    The three-term recurrence is rescaled every step to avoid overflow; a
    zero minor takes the sign opposite to its predecessor.
    """
    d, e = H.diag, H.offdiag
    p_prev, p = 1.0, d[0] - x
    changes = 0
    sign_prev = 1.0

    def sign_of(value, previous):
        if value > 0:
            return 1.0
        if value < 0:
            return -1.0
        return -previous

    s = sign_of(p, sign_prev)
    changes += s != sign_prev
    sign_prev = s
    for k in range(1, d.size):
        p_next = (d[k] - x) * p - e[k - 1] ** 2 * p_prev
        big = max(abs(p_next), abs(p))
        if big > 1e100 or (0 < big < 1e-100):
            p_next, p = p_next / big, p / big
        p_prev, p = p, p_next
        s = sign_of(p, sign_prev)
        changes += s != sign_prev
        sign_prev = s
    return int(changes)
