"""Site and cell occupations of a single-particle state."""

from __future__ import annotations

import numpy as np

from .spectrum import TransportPrediction


def site_probabilities(state) -> np.ndarray:
    c = np.asarray(state)
    return c.real**2 + c.imag**2 if np.iscomplexobj(c) else c**2


def cell_distribution(state) -> np.ndarray:
    """Probability of each cell ``k``: ``p[2k+1] + p[2k+2]`` in 1-based sites."""
    p = site_probabilities(state)
    if p.shape[-1] % 2:
        raise ValueError("state must cover an even number of sites")
    return p.reshape(p.shape[:-1] + (-1, 2)).sum(axis=-1)


def mean_cell(state) -> float:
    """First moment of the cell distribution (the average final cell coordinate)."""
    cells = cell_distribution(state)
    return float(cells @ np.arange(cells.shape[-1]))


def cell_variance(state) -> float:
    cells = cell_distribution(state)
    k = np.arange(cells.shape[-1])
    mean = cells @ k
    # central form avoids cancellation in <k^2> - <k>^2
    return float(max(cells @ (k - mean) ** 2, 0.0))


def prediction_fidelity(state, prediction: TransportPrediction) -> float:
    overlap = np.vdot(prediction.target_state, np.asarray(state))
    return float(min(abs(overlap) ** 2, 1.0))
