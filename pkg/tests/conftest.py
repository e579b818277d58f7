from pathlib import Path

import numpy as np
import pytest

from coulomb_equilibrium.dataset import load_idx

MNIST_DIR = Path(__file__).resolve().parents[1] / "data" / "mnist"

_ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    _ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mnist_paths():
    return {
        "train_images": str(MNIST_DIR / "train-images-idx3-ubyte.gz"),
        "train_labels": str(MNIST_DIR / "train-labels-idx1-ubyte.gz"),
        "test_images": str(MNIST_DIR / "t10k-images-idx3-ubyte.gz"),
        "test_labels": str(MNIST_DIR / "t10k-labels-idx1-ubyte.gz"),
    }


@pytest.fixture(scope="session")
def mnist_train(mnist_paths):
    return load_idx(mnist_paths["train_images"], mnist_paths["train_labels"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
