import numpy as np
import pytest

from deepscan import imaging


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT-compile the numba kernels once so timed tests measure steady state.
    imaging.warmup_kernels()


@pytest.fixture(params=["numba", "numpy"])
def kernel_backend(request):
    prev = imaging.active_backend()
    imaging.set_backend(request.param)
    yield request.param
    imaging.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(13)
