"""Dressed-basis spin-boson simulator and verification toolkit.

Simulates qubits coupled anisotropically to truncated bosonic modes,
builds the displacement-type dressing transformation that embeds the
interaction into the computational basis, propagates system-bath states
exactly, and benchmarks the resulting fidelities.
"""

from .linops import (
    Operator,
    SpaceLayout,
    commutator_norm,
    expm_hermitian,
    kron,
    partial_trace,
)
from .hilbert import (
    TruncationPolicy,
    annihilation,
    choose_truncation,
    displacement_generator,
    pauli,
)
from .model import (
    EXACT_DRESSED,
    LITERAL_FIRST_ORDER,
    ControlSegment,
    ModelParams,
    build_bath_hamiltonian,
    build_dressing,
    build_full_hamiltonian,
    build_system_hamiltonian,
    decoupling_residual,
)
from .dynamics import (
    DensityState,
    PureQubitState,
    dressed_initial_state,
    fidelity,
    haar_random_qubit_state,
    ideal_evolution,
    propagate,
    reduced_system_state,
    thermal_state,
)
from .experiments import (
    SweepSpec,
    convergence_study,
    run_circuit,
    run_sweep,
    verify_invariants,
)

__all__ = [
    "Operator",
    "SpaceLayout",
    "commutator_norm",
    "expm_hermitian",
    "kron",
    "partial_trace",
    "TruncationPolicy",
    "annihilation",
    "choose_truncation",
    "displacement_generator",
    "pauli",
    "EXACT_DRESSED",
    "LITERAL_FIRST_ORDER",
    "ControlSegment",
    "ModelParams",
    "build_bath_hamiltonian",
    "build_dressing",
    "build_full_hamiltonian",
    "build_system_hamiltonian",
    "decoupling_residual",
    "DensityState",
    "PureQubitState",
    "dressed_initial_state",
    "fidelity",
    "haar_random_qubit_state",
    "ideal_evolution",
    "propagate",
    "reduced_system_state",
    "thermal_state",
    "SweepSpec",
    "convergence_study",
    "run_circuit",
    "run_sweep",
    "verify_invariants",
]

__version__ = "0.1.0"
