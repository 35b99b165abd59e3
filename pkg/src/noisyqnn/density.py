"""Dense density-matrix state and qubit-targeted operations.

Qubit 0 is the most significant bit of a computational-basis index, so the
basis state ``|q0 q1 ... q(n-1)>`` has index ``sum(q_k * 2**(n-1-k))``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .channels import KrausSet

MAX_QUBITS = 12
ATOL = 1e-10

__all__ = [
    "DensityMatrix",
    "init_zero_state",
    "apply_single_qubit_gate",
    "apply_two_qubit_gate",
    "apply_channel",
    "expectation_all_z",
    "parity_signs",
]


class DensityMatrix:
    """A ``2**n x 2**n`` complex density operator.

    Operations in this module never mutate their input; they return a new
    ``DensityMatrix``.
    """

    __slots__ = ("n_qubits", "matrix")

    def __init__(self, matrix, n_qubits: int | None = None):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {matrix.shape}")
        dim = matrix.shape[0]
        if n_qubits is None:
            n_qubits = dim.bit_length() - 1
        if dim != 2**n_qubits:
            raise ValueError(f"dimension {dim} is not 2**{n_qubits}")
        _check_n_qubits(n_qubits)
        self.n_qubits = n_qubits
        self.matrix = matrix

    @classmethod
    def from_statevector(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("zero state vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        _check_n_qubits(n_qubits)
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=np.complex128) / dim, n_qubits)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        # Tr(rho^2) for Hermitian rho is the squared Frobenius norm.
        return float(np.vdot(self.matrix, self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def is_valid(self, atol: float = ATOL, check_psd: bool = False) -> bool:
        if abs(self.trace() - 1.0) > atol or self.hermiticity_error() > atol:
            return False
        if check_psd and self.min_eigenvalue() < -1e-9:
            return False
        return True

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.copy(), self.n_qubits)

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


def _check_n_qubits(n_qubits: int) -> None:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}")


def _check_target(rho: DensityMatrix, target: int) -> None:
    if not isinstance(target, (int, np.integer)):
        raise TypeError(f"qubit index must be an integer, got {target!r}")
    if not 0 <= target < rho.n_qubits:
        raise IndexError(f"qubit {target} out of range for {rho.n_qubits}-qubit state")


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if err > ATOL:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")
    return u


def _apply_local(rho: np.ndarray, n: int, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Return ``A rho A^dag`` for ``op`` = A acting on ``targets`` only."""
    k = len(targets)
    tensor = rho.reshape((2,) * (2 * n))
    op_t = op.reshape((2,) * (2 * k))
    row_axes = list(targets)
    col_axes = [n + t for t in targets]
    # Left multiply on row indices.
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), row_axes))
    out = np.moveaxis(out, list(range(k)), row_axes)
    # Right multiply by A^dag on column indices.
    out = np.tensordot(out, op_t.conj(), axes=(col_axes, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(2 * n - k, 2 * n)), col_axes)
    return out.reshape(rho.shape)


def init_zero_state(n_qubits: int) -> DensityMatrix:
    """``|0...0><0...0|`` on ``n_qubits`` qubits."""
    _check_n_qubits(n_qubits)
    dim = 2**n_qubits
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    matrix[0, 0] = 1.0
    return DensityMatrix(matrix, n_qubits)


def apply_single_qubit_gate(rho: DensityMatrix, u, target: int) -> DensityMatrix:
    _check_target(rho, target)
    u = _check_unitary(u, 2)
    return DensityMatrix(_apply_local(rho.matrix, rho.n_qubits, u, [target]), rho.n_qubits)


def apply_two_qubit_gate(rho: DensityMatrix, u, targets: tuple[int, int]) -> DensityMatrix:
    """Apply a 4x4 unitary; ``targets[0]`` is the more significant index of ``u``."""
    a, b = targets
    if a == b:
        raise ValueError(f"two-qubit gate needs distinct targets, got ({a}, {b})")
    _check_target(rho, a)
    _check_target(rho, b)
    u = _check_unitary(u, 4)
    return DensityMatrix(_apply_local(rho.matrix, rho.n_qubits, u, [a, b]), rho.n_qubits)


def apply_channel(rho: DensityMatrix, kraus: "KrausSet | Sequence[np.ndarray]", target: int) -> DensityMatrix:
    """Apply ``sum_k E_k rho E_k^dag`` with every ``E_k`` acting on ``target``."""
    _check_target(rho, target)
    operators = getattr(kraus, "operators", kraus)
    operators = [np.asarray(e, dtype=np.complex128) for e in operators]
    if not operators:
        raise ValueError("empty Kraus set")
    completeness = sum(e.conj().T @ e for e in operators)
    err = np.max(np.abs(completeness - np.eye(2)))
    if err > ATOL:
        raise ValueError(f"Kraus set is not trace preserving (max |sum E^dag E - I| = {err:.3e})")
    out = np.zeros_like(rho.matrix)
    for e in operators:
        if not np.any(e):
            continue
        out += _apply_local(rho.matrix, rho.n_qubits, e, [target])
    return DensityMatrix(out, rho.n_qubits)


def parity_signs(n_qubits: int) -> np.ndarray:
    """``(-1)**popcount(i)`` for every basis index ``i``, i.e. the diagonal of Z^n."""
    signs = np.ones(1)
    for _ in range(n_qubits):
        signs = np.concatenate([signs, -signs])
    return signs


def expectation_all_z(rho: DensityMatrix) -> float:
    """``Tr(rho Z^{(x)n})``, the parity expectation over all qubits."""
    value = np.dot(parity_signs(rho.n_qubits), np.diag(rho.matrix))
    if abs(value.imag) > ATOL:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}; state is not Hermitian")
    return float(value.real)
