"""State preparation, exact propagation, reduced states and fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import (
    DimensionMismatch,
    Operator,
    SpaceLayout,
    eigh_cached,
    partial_trace,
)
from .model import ControlSegment, ModelParams, system_hamiltonian_matrix
from .linops import expm_hermitian

# Dimension below which density-state construction also verifies positive
# semidefiniteness.  Large full-space states are produced only by unitary
# conjugation of already-valid states, so the eigenvalue check is skipped
# there to keep propagation from being dominated by validation.
PSD_CHECK_MAX_DIM = 256


@dataclass
class DensityState:
    """Density matrix tagged with its layout; validated on construction."""

    data: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        d = self.layout.dim
        if self.data.shape != (d, d):
            raise DimensionMismatch("density matrix does not match layout")
        if np.abs(self.data - self.data.conj().T).max() > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        tr = self.data.trace()
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {tr} != 1")
        if d <= PSD_CHECK_MAX_DIM:
            if np.linalg.eigvalsh(self.data).min() < -1e-9:
                raise ValueError("density matrix has a significantly negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))


@dataclass
class PureQubitState:
    """Unit-norm amplitude vector for N qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        n = self.amplitudes.shape[0]
        if self.amplitudes.ndim != 1 or n & (n - 1):
            raise ValueError("amplitudes must be a 2^N vector")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-12:
            raise ValueError("state is not normalised")

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.amplitudes.shape[0]))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def thermal_state(h_bath: Operator, beta: float) -> DensityState:
    """Gibbs state exp(-beta H_B)/Z for a Fock-diagonal bath Hamiltonian."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    m = h_bath.data
    offdiag = m - np.diag(np.diag(m))
    if np.abs(offdiag).max() > 1e-12:
        raise ValueError("thermal_state expects a Fock-diagonal bath Hamiltonian")
    energies = np.diag(m).real
    weights = np.exp(-beta * (energies - energies.min()))
    rho = np.diag(weights / weights.sum()).astype(complex)
    return DensityState(rho, h_bath.layout)


def haar_random_qubit_state(seed: int, n_qubits: int) -> PureQubitState:
    """Haar-distributed pure state from a normalised complex Gaussian vector.

    PRNG is numpy's default_rng (PCG64) seeded explicitly, so results are
    bit-reproducible per seed.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return PureQubitState(v / np.linalg.norm(v))


def dressed_initial_state(
    psi: PureQubitState, rho_bath: DensityState, v: Operator
) -> DensityState:
    """rho(0) = V (|psi><psi| x rho_B) V^dag on the full layout."""
    full_dim = psi.amplitudes.shape[0] * rho_bath.dim
    if v.dim != full_dim:
        raise DimensionMismatch(
            f"dressing acts on dimension {v.dim}, state product has {full_dim}"
        )
    product = np.kron(psi.projector(), rho_bath.data)
    rho = v.data @ product @ v.data.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityState(rho, v.layout)


def propagate(h: Operator, rho0: DensityState, t: float) -> DensityState:
    """Unitary conjugation exp(-iHt) rho exp(+iHt), exact in the truncated space.

    Reuses the eigendecomposition cached on the Hamiltonian operator, so a
    time series costs one decomposition.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if rho0.dim != h.dim:
        raise DimensionMismatch("state and Hamiltonian dimensions differ")
    if t == 0:
        return rho0
    w, u = eigh_cached(h)
    u_t = (u * np.exp(-1j * w * t)) @ u.conj().T
    rho = u_t @ rho0.data @ u_t.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityState(rho, rho0.layout)


BARE = "bare"
DRESSED = "dressed"


def reduced_system_state(
    rho: DensityState, readout: str = BARE, v: Operator | None = None
) -> DensityState:
    """Qubit marginal, either directly (bare) or after undoing V (dressed)."""
    if readout == DRESSED:
        if v is None:
            raise ValueError("dressed readout requires the dressing operator")
        m = v.data.conj().T @ rho.data @ v.data
        rho = DensityState(0.5 * (m + m.conj().T), rho.layout)
    elif readout != BARE:
        raise ValueError(f"unknown readout {readout!r}")
    full = Operator(rho.data, rho.layout)
    reduced = partial_trace(full, rho.layout.qubit_indices)
    m = 0.5 * (reduced.data + reduced.data.conj().T)
    return DensityState(m, reduced.layout)


def fidelity(psi_ideal: PureQubitState, rho_s: DensityState) -> float:
    """F = sqrt(|<psi| rho |psi>|), in [0, 1] up to rounding slack."""
    amp = psi_ideal.amplitudes
    if rho_s.dim != amp.shape[0]:
        raise DimensionMismatch("state dimensions differ in fidelity")
    val = amp.conj() @ rho_s.data @ amp
    return float(np.sqrt(abs(val)))


def ideal_evolution(
    psi0: PureQubitState,
    segments: list[ControlSegment],
    params: ModelParams,
) -> PureQubitState:
    """System-only evolution: exact per-segment propagators applied in order."""
    layout = params.system_layout()
    amp = psi0.amplitudes
    for seg in segments:
        h = system_hamiltonian_matrix(params, seg, layout)
        amp = expm_hermitian(h, -1j * seg.duration) @ amp
    amp = amp / np.linalg.norm(amp)
    return PureQubitState(amp)


def free_evolution_segment(t: float) -> ControlSegment:
    """A control-free segment of duration t (pure Z-drift precession)."""
    return ControlSegment(duration=t)
