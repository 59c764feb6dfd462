import os
import warnings

import numpy as np
import pytest

from annealdyn.model import MixtureSpec

# numba's optional TBB layer warns on import in some environments
warnings.filterwarnings("ignore", message=".*TBB.*")

os.environ.setdefault("PYTHONHASHSEED", "0")


@pytest.fixture
def p3():
    return MixtureSpec.pure(3)


@pytest.fixture
def mixed():
    return MixtureSpec.from_pairs([[3, 1.0], [14, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
