"""Dense complex-matrix primitives on composite qubit/mode Hilbert spaces.

Everything downstream (Hamiltonian builders, propagation, readout) goes
through the small set of operations here: Kronecker embedding, Hermitian
matrix exponentials via eigendecomposition, partial traces and norm checks.
Dense storage only; the desk-scale dimensions (a few thousand) make that
the simplest thing that is fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# Relative tolerance for "is this matrix Hermitian" checks.  A violation
# signals a model-construction bug upstream, not a numerical accident.
HERMITICITY_RTOL = 1e-10

QUBIT = "qubit"
MODE = "mode"


class DimensionMismatch(ValueError):
    """Operands act on incompatible spaces."""


class BadSubsystemIndex(IndexError):
    """Subsystem index outside the layout."""


class NonHermitianInput(ValueError):
    """A matrix that must be Hermitian is not (beyond tolerance)."""


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered subsystem dimensions: qubits first, then bosonic modes.

    The fixed qubits-then-modes ordering makes tracing out "the bath" a
    suffix trace and removes a whole class of embedding bugs.
    """

    dims: tuple[int, ...]
    roles: tuple[str, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise ValueError("layout needs at least one subsystem")
        if len(self.dims) != len(self.roles):
            raise ValueError("dims and roles length mismatch")
        if any(d < 2 for d in self.dims):
            raise ValueError("all subsystem dimensions must be >= 2")
        for role, d in zip(self.roles, self.dims):
            if role not in (QUBIT, MODE):
                raise ValueError(f"unknown subsystem role {role!r}")
            if role == QUBIT and d != 2:
                raise ValueError("qubit subsystems must have dimension 2")
        seen_mode = False
        for role in self.roles:
            if role == MODE:
                seen_mode = True
            elif seen_mode:
                raise ValueError("qubit subsystems must precede mode subsystems")

    @classmethod
    def qubits_and_modes(cls, n_qubits: int, mode_dims: Sequence[int]) -> "SpaceLayout":
        dims = (2,) * n_qubits + tuple(int(d) for d in mode_dims)
        roles = (QUBIT,) * n_qubits + (MODE,) * len(mode_dims)
        return cls(dims, roles)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_qubits(self) -> int:
        return sum(1 for r in self.roles if r == QUBIT)

    @property
    def qubit_indices(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == QUBIT)

    @property
    def mode_indices(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == MODE)

    def subsystem(self, indices: Iterable[int]) -> "SpaceLayout":
        idx = tuple(indices)
        return SpaceLayout(
            tuple(self.dims[i] for i in idx), tuple(self.roles[i] for i in idx)
        )


@dataclass
class Operator:
    """A dense complex square matrix tagged with the layout it acts on.

    ``eig`` optionally caches a Hermitian eigendecomposition ``(w, u)``
    so repeated propagation from the same Hamiltonian costs a single
    decomposition.  Operators are treated as immutable after construction.
    """

    data: np.ndarray
    layout: SpaceLayout
    eig: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise DimensionMismatch("operator matrix must be square")
        if self.data.shape[0] != self.layout.dim:
            raise DimensionMismatch(
                f"matrix dimension {self.data.shape[0]} != layout dimension {self.layout.dim}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("operator contains non-finite entries")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.data.conj().T, self.layout)


def asmatrix(x) -> np.ndarray:
    """Accept an Operator or a plain array; return the underlying matrix."""
    if isinstance(x, Operator):
        return x.data
    return np.asarray(x, dtype=complex)


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square matrices (or Operators)."""
    ma, mb = asmatrix(a), asmatrix(b)
    if ma.shape[0] != ma.shape[1] or mb.shape[0] != mb.shape[1]:
        raise DimensionMismatch("kron expects square factors")
    return np.kron(ma, mb)


def kron_all(factors: Sequence) -> np.ndarray:
    """Left-associated Kronecker product of several factors."""
    return reduce(kron, factors)


def max_abs(a) -> float:
    m = asmatrix(a)
    return float(np.abs(m).max()) if m.size else 0.0


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(asmatrix(a)))


def hermiticity_defect(a) -> float:
    """Max-abs of h - h^dag, normalised by max(1, max|h|)."""
    m = asmatrix(a)
    scale = max(1.0, max_abs(m))
    return max_abs(m - m.conj().T) / scale


def require_hermitian(a, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    m = asmatrix(a)
    defect = hermiticity_defect(m)
    if defect > rtol:
        raise NonHermitianInput(
            f"matrix is not Hermitian (relative defect {defect:.3e} > {rtol:.0e})"
        )
    return m


def expm_hermitian(h, s: complex) -> np.ndarray:
    """exp(s*h) for Hermitian h, via full eigendecomposition.

    For purely imaginary s the result is unitary; for real negative s and
    PSD h it is PSD.  Raises NonHermitianInput when h fails the
    hermiticity tolerance.
    """
    m = require_hermitian(h)
    w, u = np.linalg.eigh(m)
    return (u * np.exp(s * w)) @ u.conj().T


def eigh_cached(op: Operator) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition of an Operator, cached on the instance."""
    if op.eig is None:
        m = require_hermitian(op.data)
        op.eig = np.linalg.eigh(m)
    return op.eig


def partial_trace(op: Operator, keep: Iterable[int]) -> Operator:
    """Trace out every subsystem not in ``keep``; kept order is preserved.

    Tr(result) equals Tr(op) (the trace over the discarded factors is a
    plain sum, no renormalisation).
    """
    dims = op.layout.dims
    n = len(dims)
    keep_idx = sorted(set(int(k) for k in keep))
    if not keep_idx:
        raise BadSubsystemIndex("keep must be a non-empty set of subsystem indices")
    if keep_idx[0] < 0 or keep_idx[-1] >= n:
        raise BadSubsystemIndex(f"subsystem index out of range for {n} subsystems")

    tensor = op.data.reshape(dims + dims)
    # einsum: traced subsystems share a letter between row and column slot
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems for einsum-based partial trace")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep_idx:
            col[i] = row[i]
    out = "".join(row[i] for i in keep_idx) + "".join(
        letters[n + i] for i in keep_idx
    )
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    kept_layout = op.layout.subsystem(keep_idx)
    d = kept_layout.dim
    return Operator(reduced.reshape(d, d), kept_layout)


def commutator_norm(a, b) -> float:
    """Frobenius norm of [a, b].  Frobenius: cheap and basis-independent
    enough for pass/fail thresholds."""
    ma, mb = asmatrix(a), asmatrix(b)
    if isinstance(a, Operator) and isinstance(b, Operator):
        if a.layout != b.layout:
            raise DimensionMismatch("commutator operands on different layouts")
    if ma.shape != mb.shape:
        raise DimensionMismatch("commutator operands differ in dimension")
    return float(np.linalg.norm(ma @ mb - mb @ ma))
