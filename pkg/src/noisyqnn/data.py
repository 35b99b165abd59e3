"""Diabetes table loading, train/validation split and leakage-free min-max scaling."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "COLUMNS",
    "FEATURE_COLUMNS",
    "DataFormatError",
    "RawDataset",
    "ScalerParams",
    "PreparedDataset",
    "default_data_path",
    "load_diabetes",
    "prepare",
    "file_digest",
]

COLUMNS = ("AGE", "SEX", "BMI", "BP", "S1", "S2", "S3", "S4", "S5", "S6", "Y")
# Conventional short names used in the literature for this table.
FEATURE_COLUMNS = {"age": "AGE", "sex": "SEX", "bmi": "BMI", "bp": "BP", "ltg": "S5", "glu": "S6"}
TARGET = "Y"
FEATURE_RANGE = (-np.pi, np.pi)
TARGET_RANGE = (-1.0, 1.0)


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RawDataset:
    columns: tuple
    values: np.ndarray  # (n_rows, n_columns)
    source: str = ""

    def __len__(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        key = FEATURE_COLUMNS.get(name.lower(), name.upper())
        try:
            return self.values[:, self.columns.index(key)]
        except ValueError:
            raise KeyError(f"unknown column {name!r}") from None


def default_data_path() -> Path:
    return Path(str(resources.files("noisyqnn").joinpath("datasets/diabetes.tab")))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_diabetes(path=None) -> RawDataset:
    """Read the tab- (or comma-) separated diabetes table with an ``AGE ... Y`` header."""
    path = Path(path) if path is not None else default_data_path()
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip().upper() for h in next(reader)]
    if tuple(header) != COLUMNS:
        raise DataFormatError(f"{path}:1: unexpected header {header}; expected {list(COLUMNS)}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(COLUMNS):
            raise DataFormatError(f"{path}:{lineno}: expected {len(COLUMNS)} fields, got {len(row)}")
        parsed = []
        for name, cell in zip(COLUMNS, row):
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in column {name}"
                ) from None
            if not np.isfinite(value):
                raise DataFormatError(f"{path}:{lineno}: non-finite value in column {name}")
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return RawDataset(COLUMNS, np.asarray(rows), str(path))


def _minmax(x, data_min, data_max, out_range):
    lo, hi = out_range
    # Written so that data_min and data_max land exactly on lo and hi.
    return (x - data_min) / (data_max - data_min) * (hi - lo) + lo


@dataclass(frozen=True)
class ScalerParams:
    feature_names: tuple
    feature_min: tuple
    feature_max: tuple
    target_min: float
    target_max: float
    feature_range: tuple = FEATURE_RANGE
    target_range: tuple = TARGET_RANGE

    def transform_features(self, x) -> np.ndarray:
        return _minmax(np.asarray(x, float), np.asarray(self.feature_min), np.asarray(self.feature_max), self.feature_range)

    def transform_target(self, y) -> np.ndarray:
        return _minmax(np.asarray(y, float), self.target_min, self.target_max, self.target_range)

    def inverse_transform_target(self, y_scaled) -> np.ndarray:
        lo, hi = self.target_range
        unit = (np.asarray(y_scaled, float) - lo) / (hi - lo)
        return unit * (self.target_max - self.target_min) + self.target_min

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "feature_min": list(self.feature_min),
            "feature_max": list(self.feature_max),
            "target_min": self.target_min,
            "target_max": self.target_max,
            "feature_range": list(self.feature_range),
            "target_range": list(self.target_range),
        }


@dataclass(frozen=True)
class PreparedDataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    indices_train: np.ndarray
    indices_val: np.ndarray
    scaler: ScalerParams
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "indices_train": self.indices_train.tolist(),
            "indices_val": self.indices_val.tolist(),
            "scaler": self.scaler.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def prepare(
    raw: RawDataset,
    seed: int,
    n_train: int = 40,
    n_val: int = 400,
    features=("bmi", "ltg"),
) -> PreparedDataset:
    """Sample disjoint train/validation rows and min-max scale with training statistics only.

    Features go to ``[-pi, pi]`` and the target to ``[-1, 1]``. Validation rows
    are transformed with the training fit and are not clipped.
    """
    if n_train < 2 or n_val < 1:
        raise ValueError("need at least 2 training rows and 1 validation row")
    if n_train + n_val > len(raw):
        raise ValueError(f"cannot draw {n_train}+{n_val} rows from {len(raw)}")
    rng = np.random.default_rng(seed)
    idx_train = rng.choice(len(raw), size=n_train, replace=False)
    remaining = np.setdiff1d(np.arange(len(raw)), idx_train)
    idx_val = rng.choice(remaining, size=n_val, replace=False)

    x = np.column_stack([raw.column(f) for f in features])
    y = raw.column(TARGET)
    x_min, x_max = x[idx_train].min(axis=0), x[idx_train].max(axis=0)
    y_min, y_max = y[idx_train].min(), y[idx_train].max()
    if np.any(x_max <= x_min) or y_max <= y_min:
        raise ValueError("a selected column is constant on the training rows")

    params = ScalerParams(
        feature_names=tuple(features),
        feature_min=tuple(float(v) for v in x_min),
        feature_max=tuple(float(v) for v in x_max),
        target_min=float(y_min),
        target_max=float(y_max),
    )
    return PreparedDataset(
        x_train=params.transform_features(x[idx_train]),
        y_train=params.transform_target(y[idx_train]),
        x_val=params.transform_features(x[idx_val]),
        y_val=params.transform_target(y[idx_val]),
        indices_train=idx_train,
        indices_val=idx_val,
        scaler=params,
        seed=seed,
    )
