import numpy as np
import pytest

from levelcross import kernels


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    impl = kernels.numba_impl if request.param == "numba" else kernels.numpy_impl
    if impl is None:
        pytest.skip("numba not importable")
    monkeypatch.setattr(kernels, "_impl", impl)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
