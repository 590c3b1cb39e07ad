"""The factors every splitting scheme is built from.

With T = -c Σ M_j ∂_j - i mc² B and W(t) = -ie (V - Σ A_j M_j), where
(M_j, B) are (σ_j, σ3) for two components and (α_j, β) for four:

* kinetic step      e^{sT}, diagonal per Fourier mode
* potential step    e^{sW(t*)}, pointwise
* compact step      e^{sŴ(t*)}, Ŵ = W + (τ²/48)[W, [T, W]], pointwise when the
                    double commutator has no derivative terms
"""

import threading
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from diracsim.algebra import clifford_basis, exp_dirac_affine, exp_pauli_affine, sin_over
from diracsim.errors import UnsupportedCommutatorTransport
from diracsim.fields import SpinorField
from diracsim.grid import PeriodicGrid
from diracsim.metrics import COMPACT_FACTORS, KINETIC_FACTORS, POTENTIAL_FACTORS
from diracsim.potentials import PhysicalConstants, PotentialModel

PROPAGATOR_CACHE_SIZE = 8


def _coefficient(values, matrix: np.ndarray) -> np.ndarray:
    return np.asarray(values)[..., None, None] * matrix


def _matvec(matrices: np.ndarray, data: np.ndarray) -> np.ndarray:
    return (matrices @ data[..., None])[..., 0]


class KineticSymbol:
    """Γ(μ) = c Σ μ_j M_j + mc² B and δ(μ) = sqrt(m²c⁴ + c²|μ|²) on a grid's modes."""

    def __init__(self, grid: PeriodicGrid, ncomp: int, constants: PhysicalConstants):
        self.grid = grid
        self.ncomp = ncomp
        self.constants = constants
        generators, mass_matrix = clifford_basis(ncomp, grid.d)
        c = constants.c
        rest = constants.rest_energy

        mu = grid.wavenumbers
        gamma = np.broadcast_to(rest * mass_matrix, grid.shape + (ncomp, ncomp)).copy()
        for j in range(grid.d):
            gamma += _coefficient(c * mu[j], generators[j])
        self.gamma = gamma
        self.delta = np.sqrt(rest * rest + c * c * sum(m * m for m in mu))

        self._propagators: OrderedDict[float, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()

    def propagator(self, s: float) -> np.ndarray:
        """exp(-isΓ) = cos(sδ) I - i (sin(sδ)/δ) Γ per mode."""
        key = float(s)
        with self._lock:
            cached = self._propagators.get(key)
            if cached is not None:
                self._propagators.move_to_end(key)
                return cached

        phase = key * self.delta
        identity = np.eye(self.ncomp, dtype=np.complex128)
        result = _coefficient(np.cos(phase), identity) - 1j * _coefficient(key * sin_over(phase), 1.0) * self.gamma

        with self._lock:
            self._propagators[key] = result
            if len(self._propagators) > PROPAGATOR_CACHE_SIZE:
                self._propagators.popitem(last=False)
        return result


@lru_cache(maxsize=16)
def kinetic_symbol(grid: PeriodicGrid, ncomp: int, constants: PhysicalConstants) -> KineticSymbol:
    return KineticSymbol(grid, ncomp, constants)


def kinetic_step(field: SpinorField, s: float, constants: PhysicalConstants | None = None) -> SpinorField:
    KINETIC_FACTORS.inc()
    if s == 0:
        return field.copy()
    symbol = kinetic_symbol(field.grid, field.ncomp, constants or PhysicalConstants())
    spectrum = field.grid.forward(field.data)
    spectrum = _matvec(symbol.propagator(s), spectrum)
    return field.with_data(field.grid.inverse(spectrum))


def _pointwise_exponential(field: SpinorField, V, A, s: float, constants: PhysicalConstants, mass_term=None) -> np.ndarray:
    """Apply exp(s(-ie(V - A·M) - i mass_term B)) at every grid point."""
    e = constants.e
    if mass_term is None and not np.any(A):
        return field.data * np.exp(-1j * s * e * np.asarray(V))[..., None]

    A_last = np.moveaxis(np.asarray(A), 0, -1)
    pad = [(0, 0)] * (A_last.ndim - 1) + [(0, 3 - A_last.shape[-1])]
    A3 = np.pad(A_last, pad)
    mass_term = 0.0 if mass_term is None else mass_term

    if field.ncomp == 2:
        b = -e * A3
        b[..., 2] = mass_term
        exponential = exp_pauli_affine(e * np.asarray(V), b, s)
    else:
        exponential = exp_dirac_affine(e * np.asarray(V), e * A3, mass_term, s)
    return _matvec(exponential, field.data)


def potential_step(field: SpinorField, t_eval: float, s: float, model: PotentialModel) -> SpinorField:
    POTENTIAL_FACTORS.inc()
    values = model.evaluate(t_eval, field.grid.coordinates)
    return field.with_data(_pointwise_exponential(field, values.V, values.A, s, model.constants))


def compact_potential_step(field: SpinorField, t_eval: float, s: float, tau: float, model: PotentialModel) -> SpinorField:
    """e^{sŴ(t_eval)} for A ≡ 0 (any dimension) or d = 1 (any A)."""
    COMPACT_FACTORS.inc()
    values = model.evaluate(t_eval, field.grid.coordinates)
    if not np.any(values.A):
        return field.with_data(_pointwise_exponential(field, values.V, values.A, s, model.constants))
    if field.grid.d != 1:
        raise UnsupportedCommutatorTransport(
            f"compact step with a magnetic potential needs the transport form of the commutator in {field.grid.d}D"
        )
    constants = model.constants
    mass_term = tau * tau * constants.e ** 2 * constants.rest_energy * values.A[0] ** 2 / 12.0
    return field.with_data(_pointwise_exponential(field, values.V, values.A, s, constants, mass_term))


@dataclass(frozen=True, eq=False)
class CommutatorCoefficients:
    """[W, [T, W]] = zeroth + Σ_j first[j] ∂_j, each a matrix field on the grid."""

    grid: PeriodicGrid
    zeroth: np.ndarray
    first: tuple[np.ndarray, ...]
    tau: float = 0.0

    @property
    def is_pointwise(self) -> bool:
        return not any(np.any(f) for f in self.first)

    @property
    def is_zero(self) -> bool:
        return self.is_pointwise and not np.any(self.zeroth)

    def scaled(self, factor: float) -> "CommutatorCoefficients":
        return CommutatorCoefficients(
            self.grid, factor * self.zeroth, tuple(factor * f for f in self.first), self.tau
        )

    def correction(self) -> "CommutatorCoefficients":
        """The τ²/48 multiple entering Ŵ."""
        return self.scaled(self.tau * self.tau / 48.0)

    def apply(self, field: SpinorField) -> SpinorField:
        out = _matvec(self.zeroth, field.data)
        for j, coefficient in enumerate(self.first):
            if np.any(coefficient):
                out = out + _matvec(coefficient, self.grid.spectral_derivative(field.data, j))
        return field.with_data(out)


def double_commutator_coefficients(
    model: PotentialModel,
    t: float,
    grid: PeriodicGrid,
    ncomp: int = 2,
    tau: float = 0.0,
) -> CommutatorCoefficients:
    """Closed form of [W, [T, W]] with P = V - Σ A_k M_k:

    first_j = 4ce² Σ_{k≠j} (A_j A_k M_k - A_k² M_j)
    zeroth  = 4ce² Σ_j Σ_{k≠j} A_k ∂_jV M_j M_k - 4i e² mc² |A|² B
              + 2ce² Σ_j Σ_{k≠j} (A_j ∂_jA_k M_k - A_k ∂_jA_k M_j)
              - 2ce² Σ_j Σ_{k≠j} Σ_l A_k ∂_jA_l M_j M_k M_l
    """
    generators, mass_matrix = clifford_basis(ncomp, grid.d)
    constants = model.constants
    c, e = constants.c, constants.e
    ce2 = c * e * e
    d = grid.d
    shape = grid.shape + (ncomp, ncomp)

    values = model.evaluate(t, grid.coordinates)
    A = values.A

    first = [np.zeros(shape, dtype=np.complex128) for _ in range(d)]
    zeroth = _coefficient(-4j * e * e * constants.rest_energy * np.sum(A * A, axis=0), mass_matrix)
    zeroth = np.array(np.broadcast_to(zeroth, shape), dtype=np.complex128)

    for j in range(d):
        for k in range(d):
            if k != j:
                first[j] += 4.0 * ce2 * (_coefficient(A[j] * A[k], generators[k]) - _coefficient(A[k] ** 2, generators[j]))

    if d >= 2 and np.any(A):
        gradients = model.evaluate_gradients(t, grid.coordinates)
        dV, dA = gradients.dV, gradients.dA
        for j in range(d):
            for k in range(d):
                if k == j:
                    continue
                pair = generators[j] @ generators[k]
                zeroth += 4.0 * ce2 * _coefficient(A[k] * dV[j], pair)
                zeroth += 2.0 * ce2 * (
                    _coefficient(A[j] * dA[j, k], generators[k]) - _coefficient(A[k] * dA[j, k], generators[j])
                )
                for l in range(d):
                    zeroth -= 2.0 * ce2 * _coefficient(A[k] * dA[j, l], pair @ generators[l])

    return CommutatorCoefficients(grid, zeroth, tuple(first), float(tau))


def _apply_kinetic_operator(data, grid: PeriodicGrid, generators, mass_matrix, constants: PhysicalConstants):
    out = -1j * constants.rest_energy * np.einsum("ab,...b->...a", mass_matrix, data)
    for j in range(grid.d):
        out -= constants.c * np.einsum("ab,...b->...a", generators[j], grid.spectral_derivative(data, j))
    return out


def _apply_potential_operator(data, V, A, generators, e: float):
    out = np.asarray(V)[..., None] * data
    for k in range(A.shape[0]):
        out -= A[k][..., None] * np.einsum("ab,...b->...a", generators[k], data)
    return -1j * e * out


def double_commutator_bruteforce(field: SpinorField, t: float, model: PotentialModel) -> SpinorField:
    """[W, [T, W]] f = 2 W T W f - W W T f - T W W f, with T through spectral derivatives."""
    grid = field.grid
    generators, mass_matrix = clifford_basis(field.ncomp, grid.d)
    constants = model.constants
    values = model.evaluate(t, grid.coordinates)

    def T(data):
        return _apply_kinetic_operator(data, grid, generators, mass_matrix, constants)

    def W(data):
        return _apply_potential_operator(data, values.V, values.A, generators, constants.e)

    f = field.data
    result = 2.0 * W(T(W(f))) - W(W(T(f))) - T(W(W(f)))
    return field.with_data(result)
