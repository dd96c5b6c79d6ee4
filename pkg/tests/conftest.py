import numpy as np
import pytest

from toric_control import artifact_io as aio
from toric_control.toric_patch import PatchSpec, tensor_patch


@pytest.fixture(scope="session")
def grid4():
    return tensor_patch(3, 3)


@pytest.fixture(scope="session")
def bicubic():
    return aio.load_spec(aio.data_path("bicubic_patch"))


@pytest.fixture(scope="session")
def bicubic_lifting():
    lam, _ = aio.load_lifting(aio.data_path("bicubic_lifting"))
    return lam


@pytest.fixture(scope="session")
def pinwheel():
    return aio.load_decomposition(aio.data_path("pinwheel"))


@pytest.fixture(scope="session")
def cubic():
    return aio.load_experiment(aio.data_path("cubic_0120"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spec(config, rng, n=3):
    w = rng.uniform(0.5, 3.0, len(config))
    B = rng.normal(size=(len(config), n))
    return PatchSpec(config, w, B)
