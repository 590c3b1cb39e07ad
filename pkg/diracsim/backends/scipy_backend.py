import numpy as np
import scipy.fft

from diracsim.backends.base import FFTBackend


class ScipyFFTBackend(FFTBackend):
    name = "scipy"

    def __init__(self, workers: int = 1):
        self.workers = workers

    def forward(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        return scipy.fft.fftn(values, axes=axes, workers=self.workers)

    def inverse(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        return scipy.fft.ifftn(values, axes=axes, workers=self.workers)
