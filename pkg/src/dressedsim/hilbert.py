"""Factories for qubit and truncated bosonic-mode operators.

All operators come back embedded in a full composite layout (identities on
the untouched factors), so callers never hand-assemble Kronecker chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import (
    MODE,
    QUBIT,
    BadSubsystemIndex,
    Operator,
    SpaceLayout,
    kron_all,
)

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_HARD_CAP = 2048


class NotAQubit(TypeError):
    """Index points at a mode where a qubit is required."""


class NotAMode(TypeError):
    """Index points at a qubit where a mode is required."""


class PolicyUnsatisfiable(ValueError):
    """Adaptive truncation would exceed the configured hard cap."""


def embed(local: dict[int, np.ndarray], layout: SpaceLayout) -> np.ndarray:
    """Kronecker-embed per-subsystem matrices, identity elsewhere."""
    factors = []
    for i, d in enumerate(layout.dims):
        if i in local:
            m = np.asarray(local[i], dtype=complex)
            if m.shape != (d, d):
                raise BadSubsystemIndex(
                    f"local operator at subsystem {i} has shape {m.shape}, expected {(d, d)}"
                )
            factors.append(m)
        else:
            factors.append(np.eye(d, dtype=complex))
    return kron_all(factors)


def _check_index(layout: SpaceLayout, index: int, role: str):
    if index < 0 or index >= len(layout.dims):
        raise BadSubsystemIndex(f"subsystem index {index} out of range")
    if layout.roles[index] != role:
        if role == QUBIT:
            raise NotAQubit(f"subsystem {index} is not a qubit")
        raise NotAMode(f"subsystem {index} is not a mode")


def pauli(axis: str, qubit: int, layout: SpaceLayout) -> Operator:
    """Pauli X/Y/Z on one qubit, embedded in the layout."""
    _check_index(layout, qubit, QUBIT)
    return Operator(embed({qubit: PAULI[axis]}, layout), layout)


def annihilation_matrix(dim: int) -> np.ndarray:
    """Truncated ladder matrix b on ``dim`` Fock levels (sqrt(n) superdiagonal)."""
    a = np.zeros((dim, dim), dtype=complex)
    for m in range(dim - 1):
        a[m, m + 1] = math.sqrt(m + 1)
    return a


def annihilation(mode: int, layout: SpaceLayout) -> Operator:
    """Truncated annihilation operator for one mode, embedded in the layout."""
    _check_index(layout, mode, MODE)
    return Operator(embed({mode: annihilation_matrix(layout.dims[mode])}, layout), layout)


def displacement_generator(
    alpha: complex, qubit: int, mode: int, layout: SpaceLayout
) -> Operator:
    """Anti-Hermitian generator (1/2) Y_qubit (alpha b^dag - alpha* b).

    Exponentiating this displaces the mode by +-alpha/2 on the Y
    eigenbranches.  Rounding residue is symmetrised away so G^dag == -G
    holds exactly.
    """
    _check_index(layout, qubit, QUBIT)
    _check_index(layout, mode, MODE)
    a = annihilation_matrix(layout.dims[mode])
    local = 0.5 * (alpha * a.conj().T - np.conj(alpha) * a)
    g = embed({qubit: PAULI["Y"], mode: local}, layout)
    g = 0.5 * (g - g.conj().T)
    return Operator(g, layout)


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock-cutoff policy: fixed n_max, or adaptive from thermal occupation.

    The adaptive rule keeps the thermal tail weight below ``tail_epsilon``
    and leaves ``headroom`` standard deviations above the mean occupation
    plus room for the dressing displacement.
    """

    kind: str  # "fixed" | "adaptive"
    n_max: int | None = None
    tail_epsilon: float = 1e-4
    headroom: int = 8
    hard_cap: int = DEFAULT_HARD_CAP

    def __post_init__(self):
        if self.kind == "fixed":
            if self.n_max is None or self.n_max < 2:
                raise ValueError("fixed truncation requires n_max >= 2")
        elif self.kind == "adaptive":
            if not (0.0 < self.tail_epsilon <= 1e-4):
                raise ValueError("adaptive tail_epsilon must lie in (0, 1e-4]")
            if self.headroom < 4:
                raise ValueError("adaptive headroom must be >= 4")
        else:
            raise ValueError(f"unknown truncation kind {self.kind!r}")

    @classmethod
    def fixed(cls, n_max: int) -> "TruncationPolicy":
        return cls(kind="fixed", n_max=int(n_max))

    @classmethod
    def adaptive(
        cls, tail_epsilon: float = 1e-4, headroom: int = 8, hard_cap: int = DEFAULT_HARD_CAP
    ) -> "TruncationPolicy":
        return cls(
            kind="adaptive",
            tail_epsilon=float(tail_epsilon),
            headroom=int(headroom),
            hard_cap=int(hard_cap),
        )


def thermal_tail_weight(beta: float, omega: float, n_max: int) -> float:
    """Weight of the infinite-bath thermal distribution above n_max."""
    return math.exp(-beta * omega * (n_max + 1))


def choose_truncation(
    policy: TruncationPolicy, beta: float, omega: float, alpha_abs: float
) -> int:
    """Resolve a policy to a concrete n_max for one mode."""
    if policy.kind == "fixed":
        return int(policy.n_max)
    if omega <= 0 or beta <= 0:
        raise ValueError("adaptive truncation needs beta > 0 and omega > 0")
    nbar = 1.0 / math.expm1(beta * omega)
    # (i) thermal tail below tail_epsilon
    n_tail = max(0, math.ceil(math.log(1.0 / policy.tail_epsilon) / (beta * omega) - 1.0))
    while thermal_tail_weight(beta, omega, n_tail) >= policy.tail_epsilon:
        n_tail += 1
    # (ii) occupation + headroom + displacement room
    n_occ = math.ceil(
        nbar + policy.headroom * math.sqrt(nbar + 1.0) + math.ceil(4.0 * alpha_abs**2)
    )
    n = max(n_tail, n_occ, 2)
    if n > policy.hard_cap:
        raise PolicyUnsatisfiable(
            f"adaptive truncation needs n_max={n} > hard cap {policy.hard_cap} "
            f"(beta={beta}, omega={omega})"
        )
    return n
