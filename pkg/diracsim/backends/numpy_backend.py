import numpy as np

from diracsim.backends.base import FFTBackend


class NumpyFFTBackend(FFTBackend):
    name = "numpy"

    def forward(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        return np.fft.fftn(values, axes=axes)

    def inverse(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        return np.fft.ifftn(values, axes=axes)
