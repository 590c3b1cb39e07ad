from abc import ABC, abstractmethod

import numpy as np


class FFTBackend(ABC):
    """Multidimensional FFT over selected axes.

    ``forward`` is unnormalized; ``inverse`` carries the 1/M factor per axis.
    """

    name: str = "base"

    @abstractmethod
    def forward(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        pass

    @abstractmethod
    def inverse(self, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        pass
