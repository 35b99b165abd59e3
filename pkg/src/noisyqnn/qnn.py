"""Layered re-uploading ansatz with per-gate noise, forward passes and shift-rule gradients.

Two execution routes are provided:

* :func:`forward` / :func:`parameter_shift_gradient` drive the generic
  density-matrix operations one sample at a time. They are simple and serve
  as the reference.
* :class:`BatchedCircuit` fuses each gate with the noise that follows it
  into a local superoperator and runs many samples at once. Its gradient
  evaluates the same shifted circuits as the reference, but re-uses the
  cached circuit prefix (forward states) and suffix (back-propagated
  observable) around the shifted gate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .channels import NoiseSpec
from .density import (
    apply_channel,
    apply_single_qubit_gate,
    apply_two_qubit_gate,
    expectation_all_z,
    init_zero_state,
)
from .gates import I2, X, Y, Z, rx, rxx, ry

__all__ = [
    "GateKind",
    "GateSpec",
    "QnnModel",
    "build_ansatz",
    "forward",
    "parameter_shift_gradient",
    "BatchedCircuit",
    "SHIFT",
]

SHIFT = np.pi / 2
ENCODING_QUBITS = (0, 2)


class GateKind(str, enum.Enum):
    ENCODE_RX = "encode_rx"
    TRAIN_RY = "train_ry"
    TRAIN_RXX = "train_rxx"


@dataclass(frozen=True)
class GateSpec:
    kind: GateKind
    targets: tuple
    index: int  # feature index for encoding gates, parameter index otherwise

    @property
    def trainable(self) -> bool:
        return self.kind is not GateKind.ENCODE_RX


@dataclass
class QnnModel:
    n_qubits: int
    n_layers: int
    gates: tuple
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    noise_after_encoding: bool = True
    params: np.ndarray | None = None

    @property
    def n_params(self) -> int:
        return 2 * self.n_qubits * self.n_layers

    def noise_on(self, gate: GateSpec) -> bool:
        if not self.noise.active:
            return False
        return gate.trainable or self.noise_after_encoding

    @property
    def n_noise_insertions(self) -> int:
        return sum(len(g.targets) for g in self.gates if self.noise_on(g))

    def with_noise(self, noise: NoiseSpec) -> "QnnModel":
        return replace(self, noise=noise)

    def check_params(self, params) -> np.ndarray:
        if params is None:
            params = self.params if self.params is not None else np.zeros(self.n_params)
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        if not np.all(np.isfinite(params)):
            raise ValueError("parameters must be finite")
        return params


def build_ansatz(
    n_layers: int,
    noise: NoiseSpec | None = None,
    n_qubits: int = 4,
    noise_after_encoding: bool = True,
) -> QnnModel:
    """Alternate an encoding layer (RX on qubits 0 and 2) with a trainable layer.

    The trainable layer is one RY per qubit followed by a ring of RXX gates
    ``(0,1), (1,2), ..., (n-1,0)``. Parameters are numbered layer by layer,
    RY angles first.
    """
    if not isinstance(n_layers, (int, np.integer)) or n_layers < 1:
        raise ValueError(f"n_layers must be a positive integer, got {n_layers!r}")
    if n_qubits < 4 or n_qubits % 2:
        raise ValueError(f"n_qubits must be an even number >= 4, got {n_qubits!r}")
    noise = noise if noise is not None else NoiseSpec()
    gates = []
    p = 0
    for _ in range(n_layers):
        for feature, qubit in enumerate(ENCODING_QUBITS):
            gates.append(GateSpec(GateKind.ENCODE_RX, (qubit,), feature))
        for q in range(n_qubits):
            gates.append(GateSpec(GateKind.TRAIN_RY, (q,), p))
            p += 1
        for q in range(n_qubits):
            gates.append(GateSpec(GateKind.TRAIN_RXX, (q, (q + 1) % n_qubits), p))
            p += 1
    return QnnModel(n_qubits, int(n_layers), tuple(gates), noise, noise_after_encoding)


def _check_features(features) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.shape[-1:] != (2,):
        raise ValueError(f"expected 2 features per sample, got shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features must be finite")
    return features


def forward(model: QnnModel, features, params=None) -> float:
    """Prediction ``<Z...Z>`` for one sample, via the generic density-matrix operations."""
    features = _check_features(features)
    params = model.check_params(params)
    kraus = model.noise.kraus()
    rho = init_zero_state(model.n_qubits)
    for gate in model.gates:
        if gate.kind is GateKind.ENCODE_RX:
            rho = apply_single_qubit_gate(rho, rx(features[gate.index]), gate.targets[0])
        elif gate.kind is GateKind.TRAIN_RY:
            rho = apply_single_qubit_gate(rho, ry(params[gate.index]), gate.targets[0])
        else:
            rho = apply_two_qubit_gate(rho, rxx(params[gate.index]), gate.targets)
        if model.noise_on(gate):
            for q in gate.targets:
                rho = apply_channel(rho, kraus, q)
    return expectation_all_z(rho)


def parameter_shift_gradient(model: QnnModel, features, params=None) -> np.ndarray:
    """``[f(theta_j + pi/2) - f(theta_j - pi/2)] / 2`` for every parameter, one circuit each."""
    params = model.check_params(params)
    grad = np.empty_like(params)
    for j in range(params.size):
        plus, minus = params.copy(), params.copy()
        plus[j] += SHIFT
        minus[j] -= SHIFT
        grad[j] = 0.5 * (forward(model, features, plus) - forward(model, features, minus))
    return grad


# --- batched Pauli-transfer engine --------------------------------------------------

_PAULI_BASIS = (I2, X, Y, Z)


def pauli_transfer(kraus_ops) -> np.ndarray:
    """Real matrix ``T[i, j] = Tr(P_i E(P_j)) / d`` of the map ``E(rho) = sum_k E_k rho E_k^dag``.

    ``kraus_ops`` are ``d x d`` with ``d = 2`` or ``4``; Paulis are ordered
    I, X, Y, Z per qubit with the first qubit most significant.
    """
    d = kraus_ops[0].shape[0]
    basis = _PAULI_BASIS if d == 2 else tuple(np.kron(p, q) for p in _PAULI_BASIS for q in _PAULI_BASIS)
    m = len(basis)
    out = np.zeros((m, m))
    for j, pj in enumerate(basis):
        image = sum(e @ pj @ e.conj().T for e in kraus_ops)
        for i, pi in enumerate(basis):
            out[i, j] = np.trace(pi @ image).real / d
    return out


def _ry_ptm(theta) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    # X -> c X - s Z, Z -> c Z + s X
    return np.array([[1, 0, 0, 0], [0, c, 0, s], [0, 0, 1, 0], [0, -s, 0, c]], dtype=float)


def _rx_ptm_batch(angles: np.ndarray) -> np.ndarray:
    c, s = np.cos(angles), np.sin(angles)
    out = np.zeros(angles.shape + (4, 4))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    # Y -> c Y + s Z, Z -> c Z - s Y
    out[..., 2, 2] = c
    out[..., 2, 3] = -s
    out[..., 3, 2] = s
    out[..., 3, 3] = c
    return out


def _rxx_components():
    """``T(theta) = A + cos(theta) B + sin(theta) C`` for the transfer matrix of RXX(theta)."""
    t0 = pauli_transfer([rxx(0.0)])
    t_half = pauli_transfer([rxx(np.pi / 2)])
    t_pi = pauli_transfer([rxx(np.pi)])
    a = 0.5 * (t0 + t_pi)
    b = 0.5 * (t0 - t_pi)
    c = t_half - a
    return tuple(np.where(np.abs(m) < 1e-12, 0.0, np.round(m, 12)) for m in (a, b, c))


def _rotation_pairs(c_part: np.ndarray):
    """Pairs ``(k1, k2)`` and signs with ``C[k1, k2] = sign = -C[k2, k1]``."""
    pairs, signs = [], []
    for k1, k2 in zip(*np.nonzero(c_part)):
        if k1 < k2:
            if c_part[k2, k1] != -c_part[k1, k2]:
                raise AssertionError("RXX transfer matrix is not a pairwise rotation")
            pairs.append((k1, k2))
            signs.append(c_part[k1, k2])
    return np.array(pairs, dtype=np.int64), np.array(signs)


_RXX_A, _RXX_B, _RXX_C = _rxx_components()
# Commuting Pauli pairs are fixed (A), anticommuting ones rotate in pairs (B on the diagonal, C off it).
_RXX_PAIRS, _RXX_SIGNS = _rotation_pairs(_RXX_C)


class BatchedCircuit:
    """Vectorized evaluation of a :class:`QnnModel` over many samples.

    States are Pauli-transfer vectors ``r_P = Tr(P rho)`` of shape
    ``(batch, 4**n)``; every gate and channel is a real local matrix, and the
    prediction ``<Z...Z>`` is the single component ``r_{Z...Z}``. Each
    single-qubit gate is fused with the noise that follows it.
    """

    def __init__(self, model: QnnModel):
        self.model = model
        self.n = n = model.n_qubits
        self.size = 4**n
        kraus = model.noise.kraus()
        self._noise = None if kraus is None else pauli_transfer(kraus.operators)
        self._noise_m = None if kraus is None else self._noise[None]
        self._noise_t = None if kraus is None else np.ascontiguousarray(self._noise.T)[None]
        self._z_index = sum(3 * 4 ** (n - 1 - q) for q in range(n))
        self._plan = []  # (gate, Pauli-digit strides of the targets, noisy)
        for gate in model.gates:
            strides = tuple(4 ** (n - 1 - t) for t in gate.targets)
            self._plan.append((gate, strides, model.noise_on(gate) and kraus is not None))

    def _single_ptm(self, gate: GateSpec, noisy: bool, angle) -> np.ndarray:
        if gate.kind is GateKind.ENCODE_RX:
            t = _rx_ptm_batch(np.asarray(angle, float))
        else:
            t = _ry_ptm(angle)[None]
        if noisy:
            t = self._noise @ t
        return np.ascontiguousarray(t)

    @staticmethod
    def _rotate_xx(state, theta, strides, transpose=False):
        s = np.sin(theta)
        _kernels.rotate_pairs(state, _RXX_PAIRS, _RXX_SIGNS, np.cos(theta), -s if transpose else s, *strides)

    @staticmethod
    def _angle(gate: GateSpec, features, params):
        return features[:, gate.index] if gate.kind is GateKind.ENCODE_RX else params[gate.index]

    def _step(self, state, entry, features, params):
        gate, strides, noisy = entry
        angle = self._angle(gate, features, params)
        if gate.kind is GateKind.TRAIN_RXX:
            self._rotate_xx(state, angle, strides)
            if noisy:
                for st in strides:
                    _kernels.apply_1q(state, self._noise_m, st)
        else:
            _kernels.apply_1q(state, self._single_ptm(gate, noisy, angle), strides[0])

    def _initial_state(self, batch: int) -> np.ndarray:
        # |0..0><0..0| has r_P = 1 for P in {I, Z}^n and 0 otherwise.
        digits = np.indices((4,) * self.n).reshape(self.n, -1)
        row = np.all((digits == 0) | (digits == 3), axis=0).astype(float)
        return np.tile(row, (batch, 1))

    def _prepare(self, features, params):
        features = np.atleast_2d(_check_features(features))
        return features, self.model.check_params(params)

    def transfer_vectors(self, features, params=None) -> np.ndarray:
        """Final Pauli-transfer vectors ``(batch, 4**n)``."""
        features, params = self._prepare(features, params)
        state = self._initial_state(features.shape[0])
        for entry in self._plan:
            self._step(state, entry, features, params)
        return state

    def final_states(self, features, params=None) -> np.ndarray:
        """Density matrices ``(batch, 2**n, 2**n)`` after the full circuit."""
        r = self.transfer_vectors(features, params)
        basis = np.ones((1, 1, 1), dtype=np.complex128)
        for _ in range(self.n):
            basis = np.einsum("aij,pkl->apikjl", basis, np.array(_PAULI_BASIS))
            basis = basis.reshape(basis.shape[0] * 4, basis.shape[2] * 2, -1)
        return np.einsum("bp,pij->bij", r, basis) / 2**self.n

    def predict(self, features, params=None) -> np.ndarray:
        return self.transfer_vectors(features, params)[:, self._z_index].copy()

    def value_and_gradient(self, features, params=None):
        """Predictions ``(batch,)`` and shift-rule gradients ``(batch, n_params)``.

        For trainable gate ``j`` with cached input state ``r_j`` and
        back-propagated observable ``w_j``, the shifted circuit value is
        ``w_j . T_j(theta_j +- pi/2) r_j``.
        """
        features, params = self._prepare(features, params)
        batch = features.shape[0]
        states = [self._initial_state(batch)]
        for entry in self._plan:
            nxt = states[-1].copy()
            self._step(nxt, entry, features, params)
            states.append(nxt)
        values = states[-1][:, self._z_index].copy()

        grads = np.zeros((batch, params.size))
        w = np.zeros((batch, self.size))
        w[:, self._z_index] = 1.0
        for i in range(len(self._plan) - 1, -1, -1):
            gate, strides, noisy = self._plan[i]
            angle = self._angle(gate, features, params)
            if gate.kind is GateKind.TRAIN_RXX:
                if noisy:
                    for st in strides:
                        _kernels.apply_1q(w, self._noise_t, st)
                env = _kernels.env_2q(w, states[i], *strides)
                # w . T(t) r = sum(A*env) + cos(t) sum(B*env) + sin(t) sum(C*env)
                cb = np.einsum("ok,bok->b", _RXX_B, env)
                cc = np.einsum("ok,bok->b", _RXX_C, env)
                f_plus = np.cos(angle + SHIFT) * cb + np.sin(angle + SHIFT) * cc
                f_minus = np.cos(angle - SHIFT) * cb + np.sin(angle - SHIFT) * cc
                grads[:, gate.index] = 0.5 * (f_plus - f_minus)
                if i:
                    self._rotate_xx(w, angle, strides, transpose=True)
                continue
            if gate.trainable:
                env = _kernels.env_1q(w, states[i], strides[0])
                diff = self._single_ptm(gate, noisy, angle + SHIFT) - self._single_ptm(gate, noisy, angle - SHIFT)
                grads[:, gate.index] = 0.5 * np.einsum("ok,bok->b", diff[0], env)
            if i:
                t = self._single_ptm(gate, noisy, angle)
                _kernels.apply_1q(w, np.ascontiguousarray(np.swapaxes(t, 1, 2)), strides[0])
        return values, grads
