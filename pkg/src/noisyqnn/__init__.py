"""Density-matrix QNN simulator with tunable hardware-style noise as a regularizer."""

__version__ = "0.1.0"

from .channels import (
    ChannelKind,
    HardwareCoherence,
    KrausSet,
    NoiseSpec,
    amplitude_damping,
    depolarizing,
    gamma_from_t1,
    gamma_from_t2,
    phase_damping,
    sample_depolarizing_pauli,
)
from .data import PreparedDataset, load_diabetes, prepare
from .density import (
    DensityMatrix,
    apply_channel,
    apply_single_qubit_gate,
    apply_two_qubit_gate,
    expectation_all_z,
    init_zero_state,
)
from .qnn import BatchedCircuit, QnnModel, build_ansatz, forward, parameter_shift_gradient
from .training import AdamState, TrainConfig, TrainingRecord, adam_step, mse, train
from .estimator import QNNRegressor

__all__ = [
    "AdamState",
    "BatchedCircuit",
    "ChannelKind",
    "DensityMatrix",
    "HardwareCoherence",
    "KrausSet",
    "NoiseSpec",
    "PreparedDataset",
    "QNNRegressor",
    "QnnModel",
    "TrainConfig",
    "TrainingRecord",
    "adam_step",
    "amplitude_damping",
    "apply_channel",
    "apply_single_qubit_gate",
    "apply_two_qubit_gate",
    "build_ansatz",
    "depolarizing",
    "expectation_all_z",
    "forward",
    "gamma_from_t1",
    "gamma_from_t2",
    "init_zero_state",
    "load_diabetes",
    "mse",
    "parameter_shift_gradient",
    "phase_damping",
    "prepare",
    "sample_depolarizing_pauli",
    "train",
]
