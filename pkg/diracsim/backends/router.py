import threading

from diracsim.backends.base import FFTBackend
from diracsim.backends.numpy_backend import NumpyFFTBackend
from diracsim.backends.scipy_backend import ScipyFFTBackend
from diracsim.errors import BackendUnavailable
from diracsim.settings import get_settings


class BackendRouter:
    def __init__(self, workers: int | None = None):
        self.workers = workers
        self.backends: dict[str, FFTBackend | None] = {
            "numpy": NumpyFFTBackend(),
            "scipy": None,  # built on first use so the worker count follows settings
        }
        self._lock = threading.Lock()

    def get_backend(self, name: str | None = None) -> FFTBackend:
        """
        Strategy:
        - explicit name wins
        - otherwise DIRAC_FFT_BACKEND from settings
        """
        settings = get_settings()
        name = (name or settings.fft_backend).lower()
        if name not in self.backends:
            raise BackendUnavailable(f"unknown FFT backend {name!r}")

        backend = self.backends[name]
        if backend is None:
            with self._lock:
                backend = self.backends[name]
                if backend is None:
                    backend = ScipyFFTBackend(workers=self.workers or settings.threads)
                    self.backends[name] = backend
        return backend


default_router = BackendRouter()
