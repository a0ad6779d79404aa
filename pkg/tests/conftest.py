import numpy as np
import pytest

from nrp.core import build_dataset
from nrp.datagen import GenMode, GenSpec, generate


def random_dataset(rng, n, d, norm_exponent=2.0):
    """Small random dataset with rows shrunk inside the unit p-norm ball."""
    x = rng.standard_normal((n, d))
    x /= np.linalg.norm(x, ord=norm_exponent, axis=1)[:, None]
    x *= rng.uniform(0.3, 0.95, size=n)[:, None]
    y = rng.choice([-1.0, 1.0], size=n)
    return build_dataset(x, y, norm_exponent=norm_exponent)


def exact_margin_dataset(n, d, gamma, seed):
    return generate(GenSpec(n=n, d=d, gamma=gamma,
                            mode=GenMode.EXACT_MARGIN, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
