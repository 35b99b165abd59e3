import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noisyqnn.data import load_diabetes, prepare  # noqa: E402

# Split seed and master seed used for the reference experiments.
SPLIT_SEED = 21
MASTER_SEED = 0

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def raw():
    return load_diabetes()


@pytest.fixture(scope="session")
def data(raw):
    return prepare(raw, SPLIT_SEED)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def full_sweeps(data):
    """Three 16-replica sweeps on the default grid; shared by the slow checks."""
    from noisyqnn.experiments import GammaGrid, run_noise_sweep
    from noisyqnn.training import TrainConfig

    return {
        ch: run_noise_sweep(ch, GammaGrid(), data, TrainConfig(), n_seeds=16, layers=5, master_seed=MASTER_SEED)
        for ch in ("ad", "pd", "dp")
    }


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
