import sys
from pathlib import Path

import numpy as np
import pytest

SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def random_density(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def symmetric_stochastic_tensor(rng, N):
    """A valid classical step tensor: symmetric in (i, j), stochastic over k."""
    p = np.zeros((N, N, N))
    for i in range(N):
        for j in range(i, N):
            row = rng.random(N) + 0.2
            row /= row.sum()
            p[i, j] = row
            p[j, i] = row
    return p
