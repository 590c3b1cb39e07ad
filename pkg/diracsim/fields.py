from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from diracsim.algebra import clifford_basis
from diracsim.errors import FieldError
from diracsim.grid import PeriodicGrid

HERMITIAN_TOLERANCE = 1e-13


@dataclass
class SpinorField:
    """Multi-component complex lattice function; ``data`` has shape ``grid.shape + (ncomp,)``."""

    grid: PeriodicGrid
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != self.grid.d + 1 or self.data.shape[:-1] != self.grid.shape:
            raise FieldError(f"data shape {self.data.shape} does not match grid shape {self.grid.shape}")
        if self.data.shape[-1] not in (2, 4):
            raise FieldError(f"component count must be 2 or 4, got {self.data.shape[-1]}")

    @classmethod
    def zeros(cls, grid: PeriodicGrid, ncomp: int = 2) -> "SpinorField":
        return cls(grid, np.zeros(grid.shape + (ncomp,), dtype=np.complex128))

    @classmethod
    def from_components(cls, grid: PeriodicGrid, components) -> "SpinorField":
        arrays = [np.broadcast_to(np.asarray(c, dtype=np.complex128), grid.shape) for c in components]
        return cls(grid, np.stack(arrays, axis=-1))

    @property
    def ncomp(self) -> int:
        return self.data.shape[-1]

    def component(self, index: int) -> np.ndarray:
        return self.data[..., index]

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.data.copy())

    def with_data(self, data: np.ndarray) -> "SpinorField":
        return SpinorField(self.grid, data)


class ErrorNorms(NamedTuple):
    phi: float
    rho: float
    j: float


def component_densities(field: SpinorField) -> np.ndarray:
    return np.abs(field.data) ** 2


def probability_density(field: SpinorField) -> np.ndarray:
    return np.sum(component_densities(field), axis=-1)


def mass(field: SpinorField) -> float:
    return float(field.grid.cell_volume * np.sum(component_densities(field)))


def current_density(field: SpinorField) -> tuple[np.ndarray, ...]:
    """J_l = Φ*M_lΦ for l = 1..d, with M_l = σ_l (two components) or α_l (four)."""
    generators, _ = clifford_basis(field.ncomp, field.grid.d)
    currents = np.einsum("...a,lab,...b->l...", field.data.conj(), generators, field.data)

    scale = max(1.0, float(np.max(probability_density(field), initial=0.0)))
    residue = float(np.max(np.abs(currents.imag), initial=0.0))
    if residue > HERMITIAN_TOLERANCE * scale:
        raise FieldError(f"current density has imaginary residue {residue:.3e}")
    return tuple(np.ascontiguousarray(c.real) for c in currents)


def _check_compatible(numeric: SpinorField, reference: SpinorField):
    if numeric.grid != reference.grid:
        raise FieldError("error norms need fields on the same grid")
    if numeric.ncomp != reference.ncomp:
        raise FieldError("error norms need fields with the same component count")


def error_norms(numeric: SpinorField, reference: SpinorField) -> ErrorNorms:
    """Discrete l² errors of the wave function, density and current.

    Every norm is sqrt(h^d Σ |·|²); in 2D this is the printed h·sqrt(ΣΣ |·|²)
    form for square cells.
    """
    _check_compatible(numeric, reference)
    weight = numeric.grid.cell_volume

    e_phi = np.sqrt(weight * np.sum(np.abs(numeric.data - reference.data) ** 2))
    e_rho = np.sqrt(weight * np.sum((probability_density(numeric) - probability_density(reference)) ** 2))

    j_num = current_density(numeric)
    j_ref = current_density(reference)
    e_j = np.sqrt(weight * sum(np.sum((a - b) ** 2) for a, b in zip(j_num, j_ref)))
    return ErrorNorms(float(e_phi), float(e_rho), float(e_j))
