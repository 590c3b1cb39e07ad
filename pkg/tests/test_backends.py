import numpy as np
import pytest

from diracsim.backends.numpy_backend import NumpyFFTBackend
from diracsim.backends.router import BackendRouter
from diracsim.backends.scipy_backend import ScipyFFTBackend
from diracsim.errors import BackendUnavailable


def test_backends_agree(rng):
    values = rng.normal(size=(8, 6, 2)) + 1j * rng.normal(size=(8, 6, 2))
    numpy_spectrum = NumpyFFTBackend().forward(values, (0, 1))
    scipy_spectrum = ScipyFFTBackend(workers=2).forward(values, (0, 1))
    np.testing.assert_allclose(numpy_spectrum, scipy_spectrum, atol=1e-12)
    np.testing.assert_allclose(ScipyFFTBackend().inverse(scipy_spectrum, (0, 1)), values, atol=1e-13)


def test_router_follows_settings(monkeypatch):
    monkeypatch.setenv("DIRAC_FFT_BACKEND", "numpy")
    router = BackendRouter()
    assert isinstance(router.get_backend(), NumpyFFTBackend)
    assert isinstance(router.get_backend("scipy"), ScipyFFTBackend)
    assert router.get_backend("scipy") is router.get_backend("SCIPY")


def test_router_rejects_unknown_backend():
    with pytest.raises(BackendUnavailable):
        BackendRouter().get_backend("fftw")
