from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from diracsim.backends.router import default_router
from diracsim.errors import GridError


@dataclass(frozen=True)
class Axis:
    a: float
    b: float
    M: int

    def __post_init__(self):
        if not self.b > self.a:
            raise GridError(f"empty interval ({self.a}, {self.b})")
        if int(self.M) != self.M or self.M < 4 or self.M % 2:
            raise GridError(f"M must be even and at least 4, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    def points(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.M)

    def modes(self) -> np.ndarray:
        """Angular frequencies 2πl/(b-a) in transform storage order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.h)


@dataclass(frozen=True)
class PeriodicGrid:
    axes: tuple[Axis, ...]
    backend: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 3:
            raise GridError(f"dimension must be 1, 2 or 3, got {len(self.axes)}")

    @classmethod
    def uniform(cls, dimension: int, a: float, b: float, M: int, backend: str | None = None) -> "PeriodicGrid":
        return cls(tuple(Axis(a, b, M) for _ in range(dimension)), backend=backend)

    @classmethod
    def from_spacing(cls, dimension: int, a: float, b: float, h: float, backend: str | None = None) -> "PeriodicGrid":
        M = round((b - a) / h)
        if not np.isclose(M * h, b - a, rtol=1e-12, atol=0.0):
            raise GridError(f"spacing {h} does not divide ({a}, {b})")
        return cls.uniform(dimension, a, b, M, backend=backend)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(axis.M for axis in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(axis.h for axis in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.d:
            raise GridError(f"axis {axis} out of range for a {self.d}D grid")

    def fourier_modes(self, axis: int) -> np.ndarray:
        self._check_axis(axis)
        return self.axes[axis].modes()

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Point coordinates broadcast to the full grid shape (``ij`` indexing)."""
        return tuple(np.meshgrid(*(axis.points() for axis in self.axes), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(axis.modes() for axis in self.axes), indexing="ij"))

    def _check_values(self, values: np.ndarray):
        if values.shape[: self.d] != self.shape:
            raise GridError(f"field shape {values.shape} does not match grid shape {self.shape}")

    def forward(self, values: np.ndarray) -> np.ndarray:
        self._check_values(values)
        return default_router.get_backend(self.backend).forward(values, self.spatial_axes)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        self._check_values(values)
        return default_router.get_backend(self.backend).inverse(values, self.spatial_axes)

    def spectral_derivative(self, values: np.ndarray, axis: int) -> np.ndarray:
        """∂_axis of a lattice function; trailing (component) axes are carried along."""
        self._check_axis(axis)
        values = np.asarray(values, dtype=np.complex128)
        self._check_values(values)
        multiplier = 1j * self.wavenumbers[axis]
        multiplier = multiplier.reshape(multiplier.shape + (1,) * (values.ndim - self.d))
        return self.inverse(multiplier * self.forward(values))


def fourier_modes(grid: PeriodicGrid, axis: int) -> np.ndarray:
    return grid.fourier_modes(axis)


def spectral_derivative(grid: PeriodicGrid, values: np.ndarray, axis: int) -> np.ndarray:
    return grid.spectral_derivative(values, axis)
