import numpy as np
import pytest

from nce import Config, NoiseSpec, inject_noise, make_blob_split
from nce.bench import BLOB_STD


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, n, C, sparse=0.0):
    """n random distributions over C classes; ``sparse`` zeroes that share of entries."""
    p = rng.gamma(0.5, size=(n, C))
    if sparse:
        p *= rng.random((n, C)) >= sparse
        empty = p.sum(axis=1) == 0
        p[empty, rng.integers(0, C, empty.sum())] = 1.0
    return p / p.sum(axis=1, keepdims=True)


@pytest.fixture(scope="session")
def blobs_sym50():
    """Standard 4-class benchmark split with 50% symmetric noise (seed 0)."""
    train, test = make_blob_split(4, 500, 250, 16, BLOB_STD, seed=0)
    noisy, _ = inject_noise(train, NoiseSpec.symmetric(0.5), seed=7)
    return noisy, test


@pytest.fixture
def small_config():
    return Config(T_wu=3, T_tr=6, hidden_dim=16, B=32, B_prime=16, K=5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
