import numpy as np
import pytest

from model_core import Hypergraph, PinSource, PmfSource


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _random_pin(rng, m, max_edges=6, max_mult=2):
    n_edges = int(rng.integers(1, max_edges + 1))
    edges = [(int(rng.integers(1, 1 << m)), int(rng.integers(1, max_mult + 1))) for _ in range(n_edges)]
    return PinSource(Hypergraph(m, tuple(edges)))


def _random_pmf(rng, m, max_alphabet=3):
    shape = tuple(int(a) for a in rng.integers(2, max_alphabet + 1, size=m))
    probs = rng.dirichlet(np.ones(int(np.prod(shape))))
    return PmfSource.from_table(probs.reshape(shape))


@pytest.fixture
def random_pin():
    return _random_pin


@pytest.fixture
def random_pmf():
    return _random_pmf
