"""Lattice geometry, pulse schedules and the instantaneous Hamiltonian.

Sites are numbered 1..N in docstrings and 0..N-1 in arrays. Cell ``k``
holds the (1-based) sites ``2k+1`` and ``2k+2``. Energies are in units of
the gradient ``delta`` by default and times in ``1/delta`` (hbar = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np


class PulseKind(str, Enum):
    SIGMOID = "sigmoid"
    TRUNCATED = "truncated"
    CONSTANT = "constant"


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    delta: float = 1.0

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise ValueError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 2 or self.n_sites % 2:
            raise ValueError(f"n_sites must be even and >= 2, got {self.n_sites}")
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ValueError(f"delta must be finite and >= 0, got {self.delta}")

    @property
    def n_cells(self) -> int:
        return self.n_sites // 2

    def diagonal(self) -> np.ndarray:
        """On-site energies ``(M/2 - j) * delta`` for ``j = 0..M``, ``M = N - 1``."""
        m = self.n_sites - 1
        # 2*diag is an odd integer multiple of delta; halving keeps it exact
        return (m - 2 * np.arange(self.n_sites)) * self.delta / 2.0


@dataclass(frozen=True)
class PulseSchedule:
    """Time dependence of the intra-cell (alpha) and inter-cell (beta) hoppings.

    ``SIGMOID``: alpha rises from 0 to gamma and beta falls from gamma to 0
    with ``alpha**2 + beta**2 == gamma**2``. ``TRUNCATED`` is the same pair
    switched off outside ``|t| <= window/2``. ``CONSTANT`` holds fixed
    ``alpha_const``/``beta_const`` and exists for analytic test fixtures.
    """

    kind: PulseKind = PulseKind.SIGMOID
    gamma: float = 1.0
    tau: float = 1.0
    window: Optional[float] = None
    alpha_const: float = 0.0
    beta_const: float = 0.0
    time_reversed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseKind(self.kind))
        if self.kind is PulseKind.CONSTANT:
            if self.alpha_const < 0 or self.beta_const < 0:
                raise ValueError("constant hoppings must be >= 0")
            return
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.kind is PulseKind.TRUNCATED:
            if self.window is None or not self.window > 0:
                raise ValueError("truncated schedule needs window > 0")

    @classmethod
    def sigmoid(cls, gamma: float, tau: float = 1.0) -> "PulseSchedule":
        return cls(PulseKind.SIGMOID, gamma=gamma, tau=tau)

    @classmethod
    def truncated(cls, gamma: float, tau: float, window: float) -> "PulseSchedule":
        return cls(PulseKind.TRUNCATED, gamma=gamma, tau=tau, window=window)

    @classmethod
    def constant(cls, alpha: float, beta: float) -> "PulseSchedule":
        return cls(PulseKind.CONSTANT, gamma=max(alpha, beta), alpha_const=alpha, beta_const=beta)

    def with_gamma(self, gamma: float) -> "PulseSchedule":
        return PulseSchedule(
            self.kind, gamma, self.tau, self.window, self.alpha_const, self.beta_const, self.time_reversed
        )

    def reversed(self) -> "PulseSchedule":
        """The same pulse played backwards: hoppings at ``t`` are those of ``-t``."""
        return PulseSchedule(
            self.kind, self.gamma, self.tau, self.window, self.alpha_const, self.beta_const, not self.time_reversed
        )

    @property
    def peak(self) -> float:
        """Largest hopping amplitude the schedule ever produces."""
        if self.kind is PulseKind.CONSTANT:
            return max(self.alpha_const, self.beta_const)
        return self.gamma


def _rise(x):
    # 1/sqrt(1 + exp(-x)) written so that exp never overflows
    if isinstance(x, np.ndarray):
        out = np.empty_like(x, dtype=float)
        pos = x >= 0
        out[pos] = 1.0 / np.sqrt(1.0 + np.exp(-x[pos]))
        e = np.exp(x[~pos])
        out[~pos] = np.sqrt(e / (1.0 + e))
        return out
    if x >= 0:
        return 1.0 / math.sqrt(1.0 + math.exp(-x))
    e = math.exp(x)
    return math.sqrt(e / (1.0 + e))


def _box(schedule: PulseSchedule, t):
    half = schedule.window / 2.0
    if isinstance(t, np.ndarray):
        return (np.abs(t) <= half).astype(float)
    return 1.0 if abs(t) <= half else 0.0


def alpha_at(schedule: PulseSchedule, t):
    """Intra-cell hopping at time ``t`` (scalar or array)."""
    if schedule.kind is PulseKind.CONSTANT:
        return schedule.alpha_const if np.ndim(t) == 0 else np.full(np.shape(t), schedule.alpha_const)
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    if schedule.time_reversed:
        t = -t
    value = schedule.gamma * _rise(t / schedule.tau)
    if schedule.kind is PulseKind.TRUNCATED:
        value = value * _box(schedule, t)
    return value


def beta_at(schedule: PulseSchedule, t):
    """Inter-cell hopping at time ``t``; the mirror image ``alpha(-t)``."""
    if schedule.kind is PulseKind.CONSTANT:
        return schedule.beta_const if np.ndim(t) == 0 else np.full(np.shape(t), schedule.beta_const)
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    if schedule.time_reversed:
        t = -t
    value = schedule.gamma * _rise(-t / schedule.tau)
    if schedule.kind is PulseKind.TRUNCATED:
        value = value * _box(schedule, t)
    return value


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
            raise ValueError("offdiag must have exactly len(diag) - 1 entries")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def norm(self) -> float:
        """Infinity norm (max absolute row sum); an upper bound on the spectral radius."""
        rows = np.abs(self.diag).copy()
        rows[:-1] += np.abs(self.offdiag)
        rows[1:] += np.abs(self.offdiag)
        return float(rows.max()) if rows.size else 0.0

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def build_hamiltonian(spec: LatticeSpec, alpha: float, beta: float) -> TridiagonalHamiltonian:
    """Superlattice Wannier-Stark Hamiltonian for fixed hoppings.

    The (1,2) bond carries ``alpha``, the (2,3) bond ``beta`` and so on
    alternately; the diagonal is the equally spaced ladder of ``spec``.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("hopping amplitudes must be >= 0")
    offdiag = np.empty(spec.n_sites - 1)
    offdiag[0::2] = alpha
    offdiag[1::2] = beta
    return TridiagonalHamiltonian(spec.diagonal(), offdiag)


def hamiltonian_at(spec: LatticeSpec, schedule: PulseSchedule, t: float) -> TridiagonalHamiltonian:
    return build_hamiltonian(spec, alpha_at(schedule, t), beta_at(schedule, t))
