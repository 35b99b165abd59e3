"""Single-qubit noise channels, coherence-time calibration and Pauli sampling."""

from __future__ import annotations

import enum
import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

from .density import DensityMatrix, _apply_local, _check_target
from .gates import I2, PAULIS, X, Y, Z

__all__ = [
    "ChannelKind",
    "KrausSet",
    "NoiseSpec",
    "HardwareCoherence",
    "amplitude_damping",
    "phase_damping",
    "depolarizing",
    "kraus_set",
    "gamma_from_t1",
    "gamma_from_t2",
    "parse_duration",
    "sample_depolarizing_pauli",
    "emulate_depolarizing",
]


class ChannelKind(str, enum.Enum):
    AMPLITUDE_DAMPING = "ad"
    PHASE_DAMPING = "pd"
    DEPOLARIZING = "dp"

    @classmethod
    def parse(cls, value) -> "ChannelKind | None":
        if value is None or isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("none", ""):
            return None
        aliases = {
            "amplitude_damping": "ad",
            "amplitudedamping": "ad",
            "phase_damping": "pd",
            "phasedamping": "pd",
            "depolarizing": "dp",
        }
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown channel {value!r}; expected one of ad, pd, dp, none") from None


def _check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma!r}")
    return gamma


@dataclass(frozen=True)
class KrausSet:
    kind: ChannelKind
    gamma: float
    operators: tuple

    def completeness_error(self) -> float:
        total = sum(e.conj().T @ e for e in self.operators)
        return float(np.max(np.abs(total - I2)))

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


@dataclass(frozen=True)
class NoiseSpec:
    """Channel kind and strength. ``kind=None`` disables noise entirely."""

    kind: ChannelKind | None = None
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind.parse(self.kind))
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))

    @property
    def active(self) -> bool:
        return self.kind is not None

    def kraus(self) -> KrausSet | None:
        return None if self.kind is None else kraus_set(self.kind, self.gamma)

    @property
    def label(self) -> str:
        return "none" if self.kind is None else self.kind.value


def amplitude_damping(gamma: float) -> KrausSet:
    gamma = _check_gamma(gamma)
    e0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=np.complex128)
    e1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=np.complex128)
    return KrausSet(ChannelKind.AMPLITUDE_DAMPING, gamma, (e0, e1))


def phase_damping(gamma: float) -> KrausSet:
    gamma = _check_gamma(gamma)
    e0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=np.complex128)
    e1 = np.array([[0, 0], [0, math.sqrt(gamma)]], dtype=np.complex128)
    return KrausSet(ChannelKind.PHASE_DAMPING, gamma, (e0, e1))


def depolarizing(gamma: float) -> KrausSet:
    """Identity with weight ``1 - gamma``; phase, bit and phase-bit flips share ``gamma``."""
    gamma = _check_gamma(gamma)
    flip = math.sqrt(gamma / 3)
    ops = (math.sqrt(1 - gamma) * I2, flip * Z, flip * X, flip * Y)
    return KrausSet(ChannelKind.DEPOLARIZING, gamma, ops)


_CONSTRUCTORS = {
    ChannelKind.AMPLITUDE_DAMPING: amplitude_damping,
    ChannelKind.PHASE_DAMPING: phase_damping,
    ChannelKind.DEPOLARIZING: depolarizing,
}


def kraus_set(kind, gamma: float) -> KrausSet:
    kind = ChannelKind.parse(kind)
    if kind is None:
        raise ValueError("no Kraus set for channel 'none'")
    return _CONSTRUCTORS[kind](gamma)


@dataclass(frozen=True)
class HardwareCoherence:
    """Vendor coherence figures, all in seconds."""

    t1: float
    t2: float
    t_gate: float

    def __post_init__(self):
        for name in ("t1", "t2", "t_gate"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive duration in seconds, got {value!r}")
        if self.t2 > 2 * self.t1:
            warnings.warn(
                f"T2={self.t2:g}s exceeds 2*T1={2 * self.t1:g}s, which is unphysical",
                stacklevel=3,
            )


def gamma_from_t1(hw: HardwareCoherence) -> float:
    """Amplitude-damping strength accumulated over one gate time."""
    return -math.expm1(-hw.t_gate / hw.t1)


def gamma_from_t2(hw: HardwareCoherence) -> float:
    """Phase-damping strength accumulated over one gate time."""
    return -math.expm1(-hw.t_gate / hw.t2)


_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}
_DURATION = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(s|ms|us|µs|ns)\s*$")


def parse_duration(text: str) -> float:
    """Parse ``'25us'``, ``'240 ns'``, ``'10s'`` into seconds."""
    match = _DURATION.match(str(text))
    if match is None:
        raise ValueError(f"cannot parse duration {text!r}; use a number with suffix s, ms, us or ns")
    value = float(match.group(1)) * _UNITS[match.group(2)]
    if value <= 0:
        raise ValueError(f"duration must be positive, got {text!r}")
    return value


_PAULI_LABELS = ("I", "X", "Y", "Z")


def sample_depolarizing_pauli(gamma: float, rng: np.random.Generator, size: int | None = None):
    """Draw ``I`` with probability ``1 - gamma`` and each of X, Y, Z with ``gamma / 3``.

    Returns a label, or an array of labels when ``size`` is given.
    """
    gamma = _check_gamma(gamma)
    probs = [1 - gamma, gamma / 3, gamma / 3, gamma / 3]
    idx = rng.choice(4, size=size, p=probs)
    if size is None:
        return _PAULI_LABELS[int(idx)]
    return np.asarray(_PAULI_LABELS)[idx]


def emulate_depolarizing(
    rho: DensityMatrix, gamma: float, target: int, n_samples: int, rng: np.random.Generator
) -> DensityMatrix:
    """Average of ``n_samples`` trajectories, each applying one sampled Pauli to ``target``.

    Converges to the depolarizing channel as ``n_samples`` grows.
    """
    _check_target(rho, target)
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    labels = sample_depolarizing_pauli(gamma, rng, size=n_samples)
    out = np.zeros_like(rho.matrix)
    for label in _PAULI_LABELS:
        count = int(np.count_nonzero(labels == label))
        if count:
            out += count * _apply_local(rho.matrix, rho.n_qubits, PAULIS[label], [target])
    return DensityMatrix(out / n_samples, rho.n_qubits)
