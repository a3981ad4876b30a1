"""Dissipative-entanglement simulator for two driven qubits sharing a lossy bosonic mode.

The package computes steady states of the driven qubit-qubit-boson Lindblad
model, the adiabatically eliminated two-qubit dynamics, Wootters concurrence,
quantum-jump photon correlations g2(tau), and anti-bunching timescale maps.
All rates and energies are expressed in units of the boson decay rate, which
is fixed to 1 internally; conversion to absolute time uses the configured
decay rate in Hz.
"""

from .operators import (
    SpaceLayout,
    DensityMatrix,
    kron,
    embed,
    boson_destroy,
    partial_trace,
    hermitize,
    is_hermitian,
    qubit_pair_boson_layout,
    SIGMA_PLUS,
    SIGMA_MINUS,
    SIGMA_Z,
)
from .liouvillian import (
    JumpTerm,
    Liouvillian,
    EvolveResult,
    DegenerateSteadyStateError,
    NumericalError,
    build_liouvillian,
    apply_liouvillian,
    evolve,
    steady_state,
    truncation_check,
)
from .models import (
    FullModelParams,
    EffectiveParams,
    DickeParams,
    build_full_model,
    adiabatic_eliminate,
    build_effective_model,
    dicke_transform,
    dicke_hamiltonian,
    analytic_populations,
    closed_form_inputs,
    dicke_basis_vectors,
    dicke_populations,
    rabi_frequency,
    ground_state,
)
from .observables import (
    ConcurrenceResult,
    CorrelationTrace,
    TimescaleResult,
    DarkEmitterError,
    FlatSpectrumError,
    concurrence,
    post_jump_state,
    g2_trace,
    g2_zero,
    extract_timescale,
    default_tau_max,
)
from .sweep import (
    GridSpec,
    SweepResult,
    run_sweep,
    correlation_stats,
)

__version__ = "0.1.0"

__all__ = [
    "SpaceLayout",
    "DensityMatrix",
    "kron",
    "embed",
    "boson_destroy",
    "partial_trace",
    "hermitize",
    "is_hermitian",
    "qubit_pair_boson_layout",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "SIGMA_Z",
    "JumpTerm",
    "Liouvillian",
    "EvolveResult",
    "DegenerateSteadyStateError",
    "NumericalError",
    "build_liouvillian",
    "apply_liouvillian",
    "evolve",
    "steady_state",
    "truncation_check",
    "FullModelParams",
    "EffectiveParams",
    "DickeParams",
    "build_full_model",
    "adiabatic_eliminate",
    "build_effective_model",
    "dicke_transform",
    "dicke_hamiltonian",
    "analytic_populations",
    "closed_form_inputs",
    "dicke_basis_vectors",
    "dicke_populations",
    "rabi_frequency",
    "ground_state",
    "ConcurrenceResult",
    "CorrelationTrace",
    "TimescaleResult",
    "DarkEmitterError",
    "FlatSpectrumError",
    "concurrence",
    "post_jump_state",
    "g2_trace",
    "g2_zero",
    "extract_timescale",
    "default_tau_max",
    "GridSpec",
    "SweepResult",
    "run_sweep",
    "correlation_stats",
    "__version__",
]
