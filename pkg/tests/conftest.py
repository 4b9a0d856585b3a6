# ========================================================= #
import numpy as np
import pytest

from svmcoreset.data import WeightedDataset, embed_bias
from svmcoreset.datagen import gen_blobs, gen_pathological

# ========================================================= #


@pytest.fixture
def blobs():
    return gen_blobs(200, d=2, separation=4.0, seed=3)


@pytest.fixture
def pathological():
    return gen_pathological(200, seed=5)


@pytest.fixture
def tiny():
    raw = np.array([[0.0, 1.0], [1.0, 2.0], [2.0, 0.5], [-1.0, -1.0], [-2.0, 0.0], [-0.5, -2.0]])
    return WeightedDataset(embed_bias(raw), [1, 1, 1, -1, -1, -1], [1.0, 2.0, 0.5, 1.0, 1.5, 3.0])


def random_instance(seed: int, n: int, d: int = 2) -> WeightedDataset:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, d))
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    labels[0], labels[1] = 1, -1
    return WeightedDataset(embed_bias(raw), labels, rng.uniform(0.5, 2.0, n))


@pytest.fixture
def make_instance():
    return random_instance


# ========================================================= #
