import numpy as np
import pytest

from sympath.paths import coefficient_path, random_coefficient_generator


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_path(rng, n=1, scale=1.3, tau=1.0, samples=257):
    gen = random_coefficient_generator(n, rng, tau=tau, scale=scale)
    return coefficient_path(gen, samples=samples)
