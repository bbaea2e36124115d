"""Time-dependent Schroedinger equation in the site basis.

The propagator is the Crank-Nicolson (Cayley) step

    (1 + i dt/2 H(t + dt/2)) c(t + dt) = (1 - i dt/2 H(t + dt/2)) c(t)

solved with a complex Thomas sweep. The kernel advances a batch of runs
that share the lattice and time grid but differ in their pulse schedules;
every arithmetic operation is elementwise along the batch axis, so a run
gives bitwise the same result whether it is propagated alone or inside a
batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import LatticeSpec, PulseKind, PulseSchedule, alpha_at, beta_at

# hoppings are evaluated in blocks of this many steps
_BLOCK = 2048
# per-step phase bound dt * E_max above which propagate refuses to run
MAX_STEP_PHASE = 0.5
MAX_TRAJECTORY_SAMPLES = 2000


class PropagationError(RuntimeError):
    pass


class StepSizeError(PropagationError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    final_state: np.ndarray
    t_grid: np.ndarray  # sample times of ``trajectory`` (start and end always included)
    norm_drift: float
    dt: float  # step actually used (the window is split into equal steps)
    n_steps: int
    trajectory: Optional[np.ndarray] = None  # (samples, n_sites) site probabilities
    norms: Optional[np.ndarray] = None


def initial_state(spec: LatticeSpec) -> np.ndarray:
    """Particle localised on site 1."""
    c = np.zeros(spec.n_sites, dtype=complex)
    c[0] = 1.0
    return c


def default_time_window(schedule: PulseSchedule) -> tuple[float, float]:
    if schedule.kind is PulseKind.SIGMOID:
        return -25.0 * schedule.tau, 25.0 * schedule.tau
    if schedule.kind is PulseKind.TRUNCATED:
        return -schedule.window / 2.0, schedule.window / 2.0
    raise ValueError("constant schedules have no natural time window; pass t_start/t_end")


def max_energy(spec: LatticeSpec, schedule: PulseSchedule) -> float:
    """Gershgorin bound on |E| over the whole schedule."""
    return (spec.n_sites - 1) * spec.delta / 2.0 + 2.0 * schedule.peak


def default_dt(spec: LatticeSpec, schedule: PulseSchedule) -> float:
    bound = 0.05 / max(max_energy(spec, schedule), 1e-300)
    if schedule.kind is PulseKind.CONSTANT:
        return bound
    return min(0.01 * schedule.tau, bound)


def _step_grid(t_start: float, t_end: float, dt: float) -> tuple[int, float]:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    n = max(1, math.ceil((t_end - t_start) / dt - 1e-9))
    return n, (t_end - t_start) / n


def _hoppings(schedules: Sequence[PulseSchedule], t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.empty((t.size, len(schedules)))
    b = np.empty_like(a)
    for k, s in enumerate(schedules):
        a[:, k] = alpha_at(s, t)
        b[:, k] = beta_at(s, t)
    return a, b


def _evolve(
    spec: LatticeSpec,
    schedules: Sequence[PulseSchedule],
    t_start: float,
    n_steps: int,
    h: float,
    c0: np.ndarray,
    sample_every: int = 0,
):
    """Advance ``c0`` (shape ``(n_sites, batch)``) by ``n_steps`` CN steps of size ``h``.

    Returns the final states, the per-run maximum norm deviation and, when
    ``sample_every`` > 0, norms and probabilities at every ``sample_every``-th
    step plus the final one.
    """
    n = spec.n_sites
    c = np.array(c0, dtype=complex)
    x = np.empty_like(c)
    cp = np.empty_like(c)
    ihd = 0.5j * h * spec.diagonal()
    lhs_diag = 1.0 + ihd
    rhs_diag = 1.0 - ihd
    drift = np.zeros(c.shape[1])
    samples, sample_norms, sample_steps = [], [], []
    if sample_every:
        samples.append(np.abs(c.T) ** 2)
        sample_norms.append(np.sqrt(np.sum(np.abs(c) ** 2, axis=0)))
        sample_steps.append(0)
    step = 0
    while step < n_steps:
        m = min(_BLOCK, n_steps - step)
        t_mid = t_start + (np.arange(step, step + m) + 0.5) * h
        alpha, beta = _hoppings(schedules, t_mid)
        alpha = 0.5j * h * alpha
        beta = 0.5j * h * beta
        for s in range(m):
            off = [alpha[s] if j % 2 == 0 else beta[s] for j in range(n - 1)]
            # r = (1 - i h/2 H) c
            r = rhs_diag[:, None] * c
            for j in range(n - 1):
                r[j] -= off[j] * c[j + 1]
                r[j + 1] -= off[j] * c[j]
            # Thomas sweep on (1 + i h/2 H) x = r
            piv = lhs_diag[0]
            cp[0] = off[0] / piv
            x[0] = r[0] / piv
            for j in range(1, n):
                piv = lhs_diag[j] - off[j - 1] * cp[j - 1]
                if j < n - 1:
                    cp[j] = off[j] / piv
                x[j] = (r[j] - off[j - 1] * x[j - 1]) / piv
            for j in range(n - 2, -1, -1):
                x[j] -= cp[j] * x[j + 1]
            c, x = x, c
            norm = np.sqrt(np.sum(c.real**2 + c.imag**2, axis=0))
            np.maximum(drift, np.abs(norm - 1.0), out=drift)
            done = step + s + 1
            if sample_every and (done % sample_every == 0 or done == n_steps):
                samples.append(np.abs(c.T) ** 2)
                sample_norms.append(norm)
                sample_steps.append(done)
        if not np.all(np.isfinite(c)):
            raise PropagationError(f"non-finite amplitudes after step {step + m}")
        step += m
    return c, drift, samples, sample_norms, sample_steps


def _check_step(spec: LatticeSpec, schedules: Sequence[PulseSchedule], h: float):
    e_max = max(max_energy(spec, s) for s in schedules)
    if h * e_max > MAX_STEP_PHASE:
        raise StepSizeError(
            f"dt={h:g} gives per-step phase {h * e_max:.3g} rad > {MAX_STEP_PHASE}; reduce dt"
        )


def propagate(
    spec: LatticeSpec,
    schedule: PulseSchedule,
    t_start: Optional[float] = None,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    initial: Optional[np.ndarray] = None,
    record: bool = False,
    max_samples: int = MAX_TRAJECTORY_SAMPLES,
) -> EvolutionResult:
    """Integrate from ``t_start`` to ``t_end``.

    Missing window and step default to :func:`default_time_window` and
    :func:`default_dt`. The window is divided into ``ceil(span/dt)`` equal
    steps, so the step used may be slightly below ``dt``. With ``record``
    the site probabilities are sampled at most ``max_samples`` times.
    """
    if t_start is None or t_end is None:
        w0, w1 = default_time_window(schedule)
        t_start = w0 if t_start is None else t_start
        t_end = w1 if t_end is None else t_end
    if dt is None:
        dt = default_dt(spec, schedule)
    c0 = initial_state(spec) if initial is None else np.asarray(initial, dtype=complex)
    if c0.shape != (spec.n_sites,):
        raise ValueError(f"initial state must have {spec.n_sites} amplitudes")
    if abs(np.linalg.norm(c0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalised")
    n_steps, h = _step_grid(t_start, t_end, dt)
    _check_step(spec, [schedule], h)
    every = 0
    if record:
        every = max(1, math.ceil(n_steps / max(max_samples - 1, 1)))
    c, drift, samples, norms, steps = _evolve(spec, [schedule], t_start, n_steps, h, c0[:, None], every)
    if record:
        t_grid = t_start + np.asarray(steps) * h
        t_grid[-1] = t_end
        traj = np.array([p[0] for p in samples])
        norm_arr = np.array([nm[0] for nm in norms])
    else:
        t_grid, traj, norm_arr = np.array([t_start, t_end]), None, None
    return EvolutionResult(c[:, 0].copy(), t_grid, float(drift[0]), h, n_steps, traj, norm_arr)


def propagate_many(
    spec: LatticeSpec,
    schedules: Sequence[PulseSchedule],
    t_start: float,
    t_end: float,
    dt: float,
    initial: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate one initial state under several schedules on a shared grid.

    Returns ``(final_states, norm_drifts)`` with ``final_states`` of shape
    ``(len(schedules), n_sites)``. Row ``k`` equals
    ``propagate(spec, schedules[k], t_start, t_end, dt).final_state`` bit for bit.
    """
    if not schedules:
        return np.empty((0, spec.n_sites), dtype=complex), np.empty(0)
    c0 = initial_state(spec) if initial is None else np.asarray(initial, dtype=complex)
    n_steps, h = _step_grid(t_start, t_end, dt)
    _check_step(spec, schedules, h)
    batch = np.repeat(c0[:, None], len(schedules), axis=1)
    c, drift, *_ = _evolve(spec, schedules, t_start, n_steps, h, batch)
    return c.T.copy(), drift


def convergence_check(
    spec: LatticeSpec,
    schedule: PulseSchedule,
    dt: float,
    t_start: Optional[float] = None,
    t_end: Optional[float] = None,
) -> float:
    """``||c(dt) - c(dt/2)||`` at the end of the window; shrinks ~4x per halving."""
    coarse = propagate(spec, schedule, t_start, t_end, dt).final_state
    fine = propagate(spec, schedule, t_start, t_end, dt / 2.0).final_state
    return float(np.linalg.norm(coarse - fine))
