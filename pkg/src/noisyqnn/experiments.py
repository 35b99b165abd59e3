"""Noise sweeps, train/feed-forward noise maps, depth studies and their result files."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channels import ChannelKind, NoiseSpec
from .qnn import BatchedCircuit, build_ansatz
from .training import EPOCHAL_HEADER, TrainConfig, TrainingRecord, mse, train

__all__ = [
    "GammaGrid",
    "SweepResult",
    "NoiseMapResult",
    "DepthStudyResult",
    "Optimum",
    "derive_seed",
    "naive_baseline_losses",
    "run_noise_sweep",
    "find_optimum",
    "run_noise_map",
    "run_depth_study",
    "write_csv",
    "write_manifest",
    "SUMMARY_HEADER",
    "NOISEMAP_HEADER",
    "DEPTH_HEADER",
]

log = logging.getLogger(__name__)

SUMMARY_HEADER = ["channel", "gamma", "mean_final_train_mse", "mean_final_val_mse", "stderr_val"]
NOISEMAP_HEADER = ["channel", "gamma_train", "gamma_eval", "mean_val_mse"]
DEPTH_HEADER = ["channel", "layers", "gamma_opt", "mean_final_val_mse_at_opt", "val_mse_noiseless"]
DEFAULT_LAYER_SET = (3, 4, 5, 6, 8, 10)


@dataclass(frozen=True)
class GammaGrid:
    """``gamma = 10**p`` for ``p`` from ``min_exp`` to ``max_exp`` in steps of ``step``."""

    min_exp: float = -5.0
    max_exp: float = 0.0
    step: float = 0.25
    include_zero: bool = True
    values: tuple | None = None  # explicit gammas override the exponent range

    def __post_init__(self):
        if self.values is None and (self.step <= 0 or self.max_exp < self.min_exp):
            raise ValueError("grid needs step > 0 and max_exp >= min_exp")
        if self.values is None and self.max_exp > 0:
            raise ValueError("max_exp must be <= 0 so that gamma <= 1")
        for g in self.gammas:
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"grid value {g!r} outside [0, 1]")

    @classmethod
    def from_values(cls, values) -> "GammaGrid":
        return cls(values=tuple(sorted(float(v) for v in values)), include_zero=False)

    @property
    def exponents(self) -> tuple:
        if self.values is not None:
            return tuple(math.log10(v) for v in self.values if v > 0)
        n = int(round((self.max_exp - self.min_exp) / self.step))
        return tuple(round(self.min_exp + i * self.step, 10) for i in range(n + 1))

    @property
    def gammas(self) -> tuple:
        if self.values is not None:
            return self.values
        gammas = [10.0**p for p in self.exponents]
        return tuple(([0.0] if self.include_zero else []) + gammas)

    def __len__(self) -> int:
        return len(self.gammas)

    def to_dict(self) -> dict:
        return {
            "min_exp": self.min_exp,
            "max_exp": self.max_exp,
            "step": self.step,
            "include_zero": self.include_zero,
            "gammas": list(self.gammas),
        }


def derive_seed(master_seed: int, channel: str, replica: int) -> int:
    """Stable per-replica seed. Noise strength is excluded so replicas pair across gammas."""
    digest = hashlib.sha256(f"{master_seed}:{channel}:{replica}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def naive_baseline_losses(data) -> tuple[float, float]:
    """Validation MSE of the constant predictors 0 and 1."""
    y = np.asarray(data.y_val, dtype=float)
    if y.size == 0:
        raise ValueError("empty validation set")
    return mse(np.zeros_like(y), y), mse(np.ones_like(y), y)


# --- sweeps --------------------------------------------------------------------------


@dataclass
class SummaryRow:
    gamma: float
    mean_final_train_mse: float
    mean_final_val_mse: float
    stderr_val: float


@dataclass
class SweepResult:
    channel: str
    layers: int
    gammas: tuple
    seeds: tuple
    config: TrainConfig
    noise_after_encoding: bool = True
    records: dict = field(default_factory=dict)  # (gamma, seed) -> TrainingRecord

    @property
    def summary(self) -> list:
        rows = []
        for g in self.gammas:
            recs = [self.records[(g, s)] for s in self.seeds]
            finals_val = np.array([r.final_val_mse for r in recs])
            finals_train = np.array([r.final_train_mse for r in recs])
            stderr = float(np.std(finals_val, ddof=1) / np.sqrt(len(recs))) if len(recs) > 1 else 0.0
            rows.append(SummaryRow(g, float(np.mean(finals_train)), float(np.mean(finals_val)), stderr))
        return rows

    def epochal_rows(self):
        for g in self.gammas:
            for s in self.seeds:
                yield from self.records[(g, s)].rows()

    def summary_rows(self):
        for row in self.summary:
            yield [
                self.channel,
                repr(row.gamma),
                repr(row.mean_final_train_mse),
                repr(row.mean_final_val_mse),
                repr(row.stderr_val),
            ]

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "layers": self.layers,
            "gammas": list(self.gammas),
            "seeds": list(self.seeds),
            "noise_after_encoding": self.noise_after_encoding,
            "config": vars(self.config),
            "records": [self.records[(g, s)].to_dict() for g in self.gammas for s in self.seeds],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        result = cls(
            channel=d["channel"],
            layers=d["layers"],
            gammas=tuple(d["gammas"]),
            seeds=tuple(d["seeds"]),
            config=TrainConfig(**d["config"]),
            noise_after_encoding=d.get("noise_after_encoding", True),
        )
        for rd in d["records"]:
            rec = TrainingRecord.from_dict(rd)
            result.records[(rec.noise.gamma, rec.seed)] = rec
        return result


def _noise(channel: str, gamma: float) -> NoiseSpec:
    return NoiseSpec(ChannelKind.parse(channel), gamma)


def _train_task(task):
    channel, gamma, seed, layers, noise_after_encoding, config, data = task
    model = build_ansatz(layers, _noise(channel, gamma), noise_after_encoding=noise_after_encoding)
    try:
        return train(model, data, replace(config, seed=seed))
    except Exception as exc:
        raise RuntimeError(f"training failed for channel={channel} gamma={gamma!r} seed={seed}: {exc}") from exc


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_noise_sweep(
    channel,
    grid: GammaGrid,
    data,
    config: TrainConfig | None = None,
    n_seeds: int = 16,
    layers: int = 5,
    master_seed: int = 0,
    noise_after_encoding: bool = True,
    workers: int = 1,
) -> SweepResult:
    """Train ``n_seeds`` models at every grid strength; replica ``k`` starts from the same point at every gamma."""
    config = config or TrainConfig()
    channel = ChannelKind.parse(channel)
    label = "none" if channel is None else channel.value
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    gammas = tuple(grid.gammas) if channel is not None else (0.0,)
    seeds = tuple(derive_seed(master_seed, label, k) for k in range(n_seeds))
    tasks = [(label, g, s, layers, noise_after_encoding, config, data) for g in gammas for s in seeds]
    log.info("sweep %s: %d gammas x %d seeds, L=%d", label, len(gammas), n_seeds, layers)
    records = _run_tasks(_train_task, tasks, workers)
    result = SweepResult(label, layers, gammas, seeds, config, noise_after_encoding)
    for (_, g, s, *_), rec in zip(tasks, records):
        result.records[(g, s)] = rec
    return result


@dataclass(frozen=True)
class Optimum:
    channel: str
    gamma: float
    loss: float
    baseline_loss: float

    @property
    def improvement(self) -> float:
        """Fractional reduction of the validation loss relative to gamma = 0."""
        return 1.0 - self.loss / self.baseline_loss


def find_optimum(sweep: SweepResult) -> Optimum:
    """Grid point with the lowest mean final validation MSE; ties go to the smaller gamma."""
    summary = sorted(sweep.summary, key=lambda r: r.gamma)
    baseline = [r for r in summary if r.gamma == 0.0]
    if not baseline:
        raise ValueError("sweep has no gamma = 0 baseline")
    best = summary[0]
    for row in summary[1:]:
        if row.mean_final_val_mse < best.mean_final_val_mse:
            best = row
    return Optimum(sweep.channel, best.gamma, best.mean_final_val_mse, baseline[0].mean_final_val_mse)


# --- feed-forward noise map ----------------------------------------------------------


@dataclass
class NoiseMapResult:
    channel: str
    gammas_train: tuple
    gammas_eval: tuple
    mean_val_mse: np.ndarray  # (len(gammas_train), len(gammas_eval))

    @property
    def best_train_gamma(self) -> tuple:
        """For every evaluation strength, the training strength with the lowest loss (ties: smaller)."""
        idx = np.argmin(self.mean_val_mse, axis=0)  # first occurrence = smallest gamma
        return tuple(self.gammas_train[i] for i in idx)

    def rows(self):
        for i, gt in enumerate(self.gammas_train):
            for j, gf in enumerate(self.gammas_eval):
                yield [self.channel, repr(gt), repr(gf), repr(float(self.mean_val_mse[i, j]))]


def _eval_task(task):
    channel, gamma_eval, layers, noise_after_encoding, param_sets, x_val, y_val = task
    model = build_ansatz(layers, _noise(channel, gamma_eval), noise_after_encoding=noise_after_encoding)
    circuit = BatchedCircuit(model)
    return [mse(circuit.predict(x_val, p), y_val) for p in param_sets]


def run_noise_map(sweep: SweepResult, data, grid: GammaGrid | None = None, workers: int = 1) -> NoiseMapResult:
    """Evaluate every trained model of ``sweep`` on the validation set at every grid strength."""
    if sweep.channel == "none":
        raise ValueError("noise map needs a noisy channel")
    gammas_eval = tuple(grid.gammas) if grid is not None else tuple(sweep.gammas)
    if grid is not None and set(gammas_eval) != set(sweep.gammas):
        raise ValueError("evaluation grid does not match the sweep grid")
    x_val, y_val = np.asarray(data.x_val, float), np.asarray(data.y_val, float)
    tasks = []
    for gt in sweep.gammas:
        params = [sweep.records[(gt, s)].final_params for s in sweep.seeds]
        for gf in gammas_eval:
            tasks.append((sweep.channel, gf, sweep.layers, sweep.noise_after_encoding, params, x_val, y_val))
    losses = _run_tasks(_eval_task, tasks, workers)
    table = np.array([np.mean(l) for l in losses]).reshape(len(sweep.gammas), len(gammas_eval))
    return NoiseMapResult(sweep.channel, tuple(sweep.gammas), gammas_eval, table)


# --- depth study ---------------------------------------------------------------------


@dataclass
class DepthStudyResult:
    layer_set: tuple
    channels: tuple
    sweeps: dict = field(default_factory=dict)  # (channel, layers) -> SweepResult
    optima: dict = field(default_factory=dict)  # (channel, layers) -> Optimum

    def rows(self):
        for ch in self.channels:
            for L in self.layer_set:
                opt = self.optima[(ch, L)]
                yield [ch, L, repr(opt.gamma), repr(opt.loss), repr(opt.baseline_loss)]

    def aggregate(self) -> dict:
        """Arithmetic and geometric means of the optimum strengths across depths.

        The geometric mean only covers nonzero optima.
        """
        out = {}
        for ch in self.channels:
            g = np.array([self.optima[(ch, L)].gamma for L in self.layer_set])
            nz = g[g > 0]
            out[ch] = {
                "arithmetic_mean": float(np.mean(g)),
                "geometric_mean": float(np.exp(np.mean(np.log(nz)))) if nz.size else 0.0,
            }
        return out


def run_depth_study(
    channels,
    data,
    layer_set=DEFAULT_LAYER_SET,
    grid: GammaGrid | None = None,
    config: TrainConfig | None = None,
    n_seeds: int = 16,
    master_seed: int = 0,
    noise_after_encoding: bool = True,
    workers: int = 1,
) -> DepthStudyResult:
    grid = grid or GammaGrid()
    labels = tuple(ChannelKind.parse(c).value for c in channels)
    result = DepthStudyResult(tuple(layer_set), labels)
    for ch in labels:
        for L in layer_set:
            sweep = run_noise_sweep(ch, grid, data, config, n_seeds, L, master_seed, noise_after_encoding, workers)
            result.sweeps[(ch, L)] = sweep
            result.optima[(ch, L)] = find_optimum(sweep)
    return result


# --- output files --------------------------------------------------------------------


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_manifest(path, command: str, params: dict, outputs, data_digest: str | None = None) -> Path:
    """JSON description sufficient to replay a run; written before any result file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "tool_version": __version__,
        "parameters": params,
        "data_sha256": data_digest,
        "outputs": [str(o) for o in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


__all__ += ["EPOCHAL_HEADER", "SummaryRow", "DEFAULT_LAYER_SET"]
