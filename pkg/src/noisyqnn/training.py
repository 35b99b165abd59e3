"""MSE loss, Adam, and the mini-batch training loop."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import NoiseSpec
from .qnn import BatchedCircuit, QnnModel

__all__ = [
    "mse",
    "AdamState",
    "adam_step",
    "TrainConfig",
    "TrainingRecord",
    "train",
    "init_params",
    "EPOCHAL_HEADER",
]

EPOCHAL_HEADER = ["channel", "gamma", "seed", "epoch", "train_mse", "val_mse"]


def mse(prediction, target):
    """Squared error; averages when given arrays."""
    diff = np.asarray(prediction, dtype=float) - np.asarray(target, dtype=float)
    if diff.ndim == 0:
        return float(diff * diff)
    return float(np.mean(diff * diff))


@dataclass
class AdamState:
    n_params: int
    learning_rate: float = 0.03
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    m: np.ndarray = None
    v: np.ndarray = None

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.n_params)
        if self.v is None:
            self.v = np.zeros(self.n_params)


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update. Returns ``(new_params, state)``; ``state`` is updated in place."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    if state.weight_decay:
        grads = grads + state.weight_decay * params
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads * grads
    m_hat = state.m / (1 - state.beta1**state.step)
    v_hat = state.v / (1 - state.beta2**state.step)
    return params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon), state


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 20
    learning_rate: float = 0.03
    seed: int = 0
    # "post_epoch": evaluate full sets after each epoch.
    # "running": mean of per-batch training losses seen during the epoch.
    epoch_metric: str = "post_epoch"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epoch_metric not in ("post_epoch", "running"):
            raise ValueError(f"unknown epoch_metric {self.epoch_metric!r}")


@dataclass
class TrainingRecord:
    noise: NoiseSpec
    seed: int
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    initial_params: np.ndarray | None = None
    final_params: np.ndarray | None = None

    @property
    def final_train_mse(self) -> float:
        return self.train_mse[-1]

    @property
    def final_val_mse(self) -> float:
        return self.val_mse[-1]

    def rows(self):
        for epoch, (tr, va) in enumerate(zip(self.train_mse, self.val_mse), start=1):
            yield [self.noise.label, repr(self.noise.gamma), self.seed, epoch, repr(tr), repr(va)]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(EPOCHAL_HEADER)
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "channel": self.noise.label,
            "gamma": self.noise.gamma,
            "seed": self.seed,
            "train_mse": list(self.train_mse),
            "val_mse": list(self.val_mse),
            "initial_params": None if self.initial_params is None else self.initial_params.tolist(),
            "final_params": None if self.final_params is None else self.final_params.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingRecord":
        return cls(
            noise=NoiseSpec(d["channel"], d["gamma"]),
            seed=d["seed"],
            train_mse=list(d["train_mse"]),
            val_mse=list(d["val_mse"]),
            initial_params=None if d.get("initial_params") is None else np.asarray(d["initial_params"]),
            final_params=None if d.get("final_params") is None else np.asarray(d["final_params"]),
        )


def _rngs(seed: int):
    init_ss, shuffle_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(shuffle_ss)


def init_params(n_params: int, seed: int) -> np.ndarray:
    """Uniform angles on ``[0, 2*pi)`` drawn from the run's initialization stream."""
    init_rng, _ = _rngs(seed)
    return init_rng.uniform(0.0, 2 * np.pi, size=n_params)


def _batch_loss_gradient(circuit: BatchedCircuit, x, y, params):
    pred, jac = circuit.value_and_gradient(x, params)
    resid = pred - y
    # d/dtheta mean((pred - y)^2); fixed-order reduction keeps runs bit-reproducible.
    grad = (2.0 / len(y)) * (resid @ jac)
    return float(np.mean(resid * resid)), grad


def train(model: QnnModel, data, config: TrainConfig, params=None) -> TrainingRecord:
    """Train ``model`` on ``data.x_train``/``data.y_train``.

    Each epoch shuffles the training set, takes one Adam step per batch on
    the batch-mean MSE gradient, and then records train and validation MSE.
    The result depends only on ``(model, data, config)``.
    """
    x_train, y_train = np.asarray(data.x_train, float), np.asarray(data.y_train, float)
    x_val, y_val = np.asarray(data.x_val, float), np.asarray(data.y_val, float)
    n_train = len(y_train)
    if n_train == 0:
        raise ValueError("empty training set")
    if len(y_val) == 0:
        raise ValueError("empty validation set")
    if config.batch_size > n_train:
        raise ValueError(f"batch_size {config.batch_size} exceeds training-set size {n_train}")

    init_rng, shuffle_rng = _rngs(config.seed)
    if params is None:
        params = init_rng.uniform(0.0, 2 * np.pi, size=model.n_params)
    params = model.check_params(params).copy()
    record = TrainingRecord(noise=model.noise, seed=config.seed, initial_params=params.copy())

    circuit = BatchedCircuit(model)
    adam = AdamState(model.n_params, learning_rate=config.learning_rate)
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(n_train)
        batch_losses = []
        for start in range(0, n_train, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grad = _batch_loss_gradient(circuit, x_train[idx], y_train[idx], params)
            batch_losses.append(loss * len(idx))
            params, adam = adam_step(adam, params, grad)
        if config.epoch_metric == "running":
            train_loss = math.fsum(batch_losses) / n_train
        else:
            train_loss = mse(circuit.predict(x_train, params), y_train)
        record.train_mse.append(train_loss)
        record.val_mse.append(mse(circuit.predict(x_val, params), y_val))

    record.final_params = params
    return record
