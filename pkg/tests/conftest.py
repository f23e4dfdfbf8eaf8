import numpy as np
import pytest

from csecg.sensing import ThetaOperator, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_theta(m: int, n: int = 256, levels: int = 5, seed: int = 0) -> ThetaOperator:
    return ThetaOperator(generate("dense_bernoulli", m, n, seed=seed), levels)
