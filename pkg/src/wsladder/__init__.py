"""Quantized adiabatic transport in a finite superlattice Wannier-Stark ladder."""

from .dynamics import EvolutionResult, PropagationError, convergence_check, initial_state, propagate
from .model import (
    LatticeSpec,
    PulseKind,
    PulseSchedule,
    TridiagonalHamiltonian,
    alpha_at,
    beta_at,
    build_hamiltonian,
    hamiltonian_at,
)
from .observables import cell_distribution, cell_variance, mean_cell, prediction_fidelity, site_probabilities
from .spectrum import (
    EigenSolverError,
    SpectralDecomposition,
    TransportPrediction,
    eigen_decompose,
    initial_rank,
    interval_bounds,
    mixing_angle,
    predict_transport,
    quantum_number,
)
from .sweep import SweepResult, SweepRow, detect_transitions, gap_scan, run_sweep

__version__ = "0.1.0"
