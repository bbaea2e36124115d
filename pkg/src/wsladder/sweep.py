"""Coupling sweeps: final cell occupation as a function of the peak hopping.

Each gamma is an independent run; runs are batched through the vectorised
propagator and, optionally, spread over worker processes. Rows are always
returned in ascending gamma and do not depend on batching or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import PropagationError, default_dt, default_time_window, propagate_many
from .model import LatticeSpec, PulseSchedule, hamiltonian_at
from .observables import cell_variance, mean_cell, prediction_fidelity
from .spectrum import eigen_decompose, interval_bounds, predict_transport

CHUNK = 64


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    gamma_over_delta: float
    mean_cell: float
    variance: float
    predicted_n: int
    predicted_cell: int
    fidelity: float
    norm_drift: float
    error: Optional[str] = None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _row(spec: LatticeSpec, gamma: float, state: np.ndarray, drift: float) -> SweepRow:
    pred = predict_transport(spec, gamma)
    return SweepRow(
        gamma=float(gamma),
        gamma_over_delta=float(gamma / spec.delta),
        mean_cell=mean_cell(state),
        variance=cell_variance(state),
        predicted_n=pred.quantum_number,
        predicted_cell=pred.target_cell,
        fidelity=prediction_fidelity(state, pred),
        norm_drift=float(drift),
    )


def _failed_row(spec: LatticeSpec, gamma: float, message: str) -> SweepRow:
    pred = predict_transport(spec, gamma)
    nan = math.nan
    return SweepRow(float(gamma), float(gamma / spec.delta), nan, nan, pred.quantum_number, pred.target_cell, nan, nan, message)


def _run_chunk(args) -> list[SweepRow]:
    spec, template, gammas, t0, t1, dt = args
    schedules = [template.with_gamma(g) for g in gammas]
    try:
        states, drifts = propagate_many(spec, schedules, t0, t1, dt)
    except PropagationError:
        if len(gammas) == 1:
            raise
        # isolate the offending gamma(s)
        rows = []
        for g in gammas:
            try:
                rows.extend(_run_chunk((spec, template, [g], t0, t1, dt)))
            except PropagationError as exc:
                rows.append(_failed_row(spec, g, str(exc)))
        return rows
    return [_row(spec, g, s, d) for g, s, d in zip(gammas, states, drifts)]


def run_sweep(
    spec: LatticeSpec,
    schedule_template: PulseSchedule,
    gammas: Sequence[float],
    dt: Optional[float] = None,
    window: Optional[tuple[float, float]] = None,
    workers: int = 1,
) -> SweepResult:
    """Propagate ``|1>`` through the pulse for every gamma and record the final occupations.

    All runs share one time grid; when ``dt`` is omitted it is the default
    step of the largest gamma.
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("empty gamma list")
    if any(g <= 0 for g in gammas) or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gammas must be positive and strictly ascending")
    t0, t1 = window if window is not None else default_time_window(schedule_template)
    if dt is None:
        dt = default_dt(spec, schedule_template.with_gamma(gammas[-1]))
    jobs = [(spec, schedule_template, gammas[i : i + CHUNK], t0, t1, dt) for i in range(0, len(gammas), CHUNK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    rows = [row for part in parts for row in part]
    meta = {
        "n_sites": spec.n_sites,
        "delta": spec.delta,
        "pulse": schedule_template.kind.value,
        "tau": schedule_template.tau,
        "window": schedule_template.window,
        "dt": dt,
        "t_start": t0,
        "t_end": t1,
    }
    return SweepResult(rows, meta)


def detect_transitions(result: SweepResult) -> list[tuple[int, float]]:
    """Gamma at which the mean cell first rises through ``k - 1/2``, by linear interpolation."""
    g = result.column("gamma")
    m = result.column("mean_cell")
    n_cells = int(result.metadata.get("n_sites", 2 * (int(np.nanmax(m)) + 2))) // 2
    found = []
    for k in range(1, n_cells):
        level = k - 0.5
        for i in range(len(g) - 1):
            if m[i] < level <= m[i + 1]:
                frac = (level - m[i]) / (m[i + 1] - m[i])
                found.append((k, float(g[i] + frac * (g[i + 1] - g[i]))))
                break
    return found


def boundary_gamma(k: int, delta: float) -> float:
    """Gamma at which the target cell steps from ``k - 1`` to ``k``."""
    return delta * interval_bounds(k)[1]


def plateau_intervals(delta: float, n_cells: int, g_min: float, g_max: float) -> list[tuple[int, float, float]]:
    """``(cell, lo, hi)`` for every predicted plateau that overlaps ``[g_min, g_max]``."""
    out = []
    for n in range(1, n_cells + 1):
        lo, hi = interval_bounds(n)
        lo *= delta
        hi = math.inf if n == n_cells else hi * delta
        lo, hi = max(lo, g_min), min(hi, g_max)
        if lo < hi:
            out.append((n - 1, lo, hi))
    return out


def plateau_deviation(result: SweepResult, margin: float) -> dict[int, float]:
    """Spread (max - min) of the mean cell on each plateau, ``margin`` away from its edges."""
    g = result.column("gamma")
    m = result.column("mean_cell")
    meta = result.metadata
    out = {}
    for cell, lo, hi in plateau_intervals(meta["delta"], meta["n_sites"] // 2, g[0], g[-1]):
        lo_m = lo + margin if lo > g[0] else lo
        hi_m = hi - margin if hi < g[-1] else hi
        sel = (g >= lo_m) & (g <= hi_m)
        if np.any(sel):
            out[cell] = float(np.max(m[sel]) - np.min(m[sel]))
    return out


def plateau_midpoints(result: SweepResult) -> list[tuple[int, SweepRow]]:
    """Sampled row nearest to the centre of each predicted plateau."""
    g = result.column("gamma")
    meta = result.metadata
    out = []
    for cell, lo, hi in plateau_intervals(meta["delta"], meta["n_sites"] // 2, g[0], g[-1]):
        i = int(np.argmin(np.abs(g - 0.5 * (lo + hi))))
        out.append((cell, result.rows[i]))
    return out


def variance_peaks(result: SweepResult) -> list[tuple[int, float, float]]:
    """``(k, gamma, variance)`` of the largest variance around each boundary in range.

    The neighbourhood of boundary ``k`` runs between the centres of the two
    plateaus it separates.
    """
    g = result.column("gamma")
    v = result.column("variance")
    meta = result.metadata
    plateaus = plateau_intervals(meta["delta"], meta["n_sites"] // 2, g[0], g[-1])
    out = []
    for (c0, lo0, hi0), (c1, lo1, hi1) in zip(plateaus, plateaus[1:]):
        sel = (g >= 0.5 * (lo0 + hi0)) & (g <= 0.5 * (lo1 + hi1))
        if not np.any(sel):
            continue
        i = np.flatnonzero(sel)[int(np.argmax(v[sel]))]
        out.append((c1, float(g[i]), float(v[i])))
    return out


def gap_profile(spec: LatticeSpec, schedule: PulseSchedule, t_grid) -> np.ndarray:
    return np.array([eigen_decompose(hamiltonian_at(spec, schedule, float(t))).min_gap() for t in t_grid])


def gap_scan(spec: LatticeSpec, schedule: PulseSchedule, t_grid) -> float:
    """Smallest adjacent-level spacing of the instantaneous spectrum over ``t_grid``."""
    return float(np.min(gap_profile(spec, schedule, t_grid)))


def rows_as_dicts(result: SweepResult) -> list[dict]:
    return [asdict(r) for r in result.rows]
