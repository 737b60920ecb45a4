import numpy as np
import pytest

from fdagodec.radar import RadarConfig


@pytest.fixture
def cfg():
    return RadarConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rel_err(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)
