import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from diracsim.errors import ExprError, PotentialError
from diracsim.exprlang import Expr, differentiate, evaluate, free_variables, parse, to_source

HONEYCOMB_WAVENUMBER = 4.0 * math.pi / math.sqrt(3.0)
SPATIAL_VARIABLES = ("x", "y", "z")


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 1.0
    m: float = 1.0
    e: float = 1.0

    @property
    def rest_energy(self) -> float:
        return self.m * self.c * self.c


ATOMIC_UNITS = PhysicalConstants(c=137.0359895, m=1.0, e=1.0)


class PotentialValues(NamedTuple):
    V: np.ndarray
    A: np.ndarray  # shape (d,) + point shape


class PotentialGradients(NamedTuple):
    dV: np.ndarray  # dV[j] = ∂_j V
    dA: np.ndarray  # dA[j, k] = ∂_j A_k


class PotentialModel(ABC):
    """Time-dependent electric potential V and magnetic potential A_1..A_d.

    Points are passed as a sequence of d coordinate arrays (or scalars) of a
    common shape; results carry that shape.
    """

    kind: str = "base"
    time_independent: bool = False
    has_gradients: bool = True

    def __init__(self, dimension: int, constants: PhysicalConstants | None = None):
        if dimension not in (1, 2, 3):
            raise PotentialError(f"dimension must be 1, 2 or 3, got {dimension}")
        self.dimension = dimension
        self.constants = constants or PhysicalConstants()

    def _points(self, x) -> tuple[tuple[np.ndarray, ...], tuple[int, ...]]:
        if self.dimension == 1 and not isinstance(x, (tuple, list)):
            x = (x,)
        coords = tuple(np.asarray(c, dtype=np.float64) for c in x)
        if len(coords) != self.dimension:
            raise PotentialError(
                f"{self.kind} potential is {self.dimension}D but got a {len(coords)}D point"
            )
        shape = np.broadcast_shapes(*(c.shape for c in coords))
        return tuple(np.broadcast_to(c, shape) for c in coords), shape

    def evaluate(self, t: float, x) -> PotentialValues:
        coords, shape = self._points(x)
        return self._evaluate(float(t), coords, shape)

    def evaluate_gradients(self, t: float, x) -> PotentialGradients:
        if not self.has_gradients:
            raise PotentialError(f"{self.kind} potential does not provide gradients")
        coords, shape = self._points(x)
        return self._gradients(float(t), coords, shape)

    @abstractmethod
    def _evaluate(self, t: float, coords, shape) -> PotentialValues:
        pass

    @abstractmethod
    def _gradients(self, t: float, coords, shape) -> PotentialGradients:
        pass

    def _zero_vector(self, shape) -> np.ndarray:
        return np.zeros((self.dimension,) + tuple(shape))

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "constants": asdict(self.constants)}


class ZeroPotential(PotentialModel):
    kind = "zero"
    time_independent = True

    def _evaluate(self, t, coords, shape):
        return PotentialValues(np.zeros(shape), self._zero_vector(shape))

    def _gradients(self, t, coords, shape):
        d = self.dimension
        return PotentialGradients(self._zero_vector(shape), np.zeros((d, d) + tuple(shape)))


class TimeDependent1D(PotentialModel):
    """V = (1 - tx)/(1 + t²x²), A_1 = (tx + 1)²/(1 + t²x²)."""

    kind = "td1d"

    def __init__(self, constants: PhysicalConstants | None = None):
        super().__init__(1, constants)

    def _evaluate(self, t, coords, shape):
        (x,) = coords
        denominator = 1.0 + t * t * x * x
        V = (1.0 - t * x) / denominator
        A1 = (t * x + 1.0) ** 2 / denominator
        return PotentialValues(np.asarray(V), np.asarray(A1)[None, ...])

    def _gradients(self, t, coords, shape):
        (x,) = coords
        denominator = (1.0 + t * t * x * x) ** 2
        dV = (-t - 2.0 * t * t * x + t ** 3 * x * x) / denominator
        dA1 = 2.0 * t * (1.0 - t * t * x * x) / denominator
        return PotentialGradients(np.asarray(dV)[None, ...], np.asarray(dA1)[None, None, ...])


class KleinStep(PotentialModel):
    """Smoothed step V = V0/2 (1 + tanh(x/L)), no magnetic potential."""

    kind = "klein"
    time_independent = True

    def __init__(self, V0: float, L: float, constants: PhysicalConstants | None = None):
        super().__init__(1, constants)
        if L <= 0:
            raise PotentialError(f"step width L must be positive, got {L}")
        self.V0 = float(V0)
        self.L = float(L)

    def _evaluate(self, t, coords, shape):
        (x,) = coords
        V = 0.5 * self.V0 * (1.0 + np.tanh(x / self.L))
        return PotentialValues(np.asarray(V), self._zero_vector(shape))

    def _gradients(self, t, coords, shape):
        (x,) = coords
        tanh = np.tanh(x / self.L)
        dV = 0.5 * self.V0 / self.L * (1.0 - tanh * tanh)
        return PotentialGradients(np.asarray(dV)[None, ...], np.zeros((1, 1) + tuple(shape)))

    def describe(self) -> dict:
        return {**super().describe(), "V0": self.V0, "L": self.L}


def honeycomb_theta(case: int, t: float) -> float:
    if case == 1:
        return math.pi
    if case == 2:
        return math.pi + math.pi * t
    if case == 3:
        return math.pi + math.pi * math.cos(math.pi * t)
    raise PotentialError(f"honeycomb case must be 1, 2 or 3, got {case!r}")


class Honeycomb2D(PotentialModel):
    """V = Σ_k cos(4π/√3 e_k(t)·x) with e_k rotated by θ(t) + 2π(k-1)/3; A = 0."""

    kind = "honeycomb"

    def __init__(self, theta_case: int = 1, constants: PhysicalConstants | None = None):
        super().__init__(2, constants)
        honeycomb_theta(theta_case, 0.0)
        self.theta_case = theta_case
        self.time_independent = theta_case == 1

    def directions(self, t: float) -> np.ndarray:
        theta = honeycomb_theta(self.theta_case, t)
        angles = theta + np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
        return np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    def _phases(self, t, coords):
        x, y = coords
        directions = self.directions(t)
        return [HONEYCOMB_WAVENUMBER * (ex * x + ey * y) for ex, ey in directions], directions

    def _evaluate(self, t, coords, shape):
        phases, _ = self._phases(t, coords)
        V = sum(np.cos(phase) for phase in phases)
        return PotentialValues(np.asarray(V), self._zero_vector(shape))

    def _gradients(self, t, coords, shape):
        phases, directions = self._phases(t, coords)
        dV = np.zeros((2,) + tuple(shape))
        for phase, direction in zip(phases, directions):
            sine = np.sin(phase)
            for j in range(2):
                dV[j] -= HONEYCOMB_WAVENUMBER * direction[j] * sine
        return PotentialGradients(dV, np.zeros((2, 2) + tuple(shape)))

    def describe(self) -> dict:
        return {**super().describe(), "theta_case": self.theta_case}


class CustomPotential(PotentialModel):
    """Potentials given as expressions in t, x, y, z with symbolic gradients."""

    kind = "custom"

    def __init__(
        self,
        dimension: int,
        V: str | Expr = "0",
        A: Sequence[str | Expr] | None = None,
        constants: PhysicalConstants | None = None,
    ):
        super().__init__(dimension, constants)
        A = list(A) if A is not None else ["0"] * dimension
        if len(A) != dimension:
            raise PotentialError(f"expected {dimension} magnetic components, got {len(A)}")
        try:
            self.V_expr = parse(V) if isinstance(V, str) else V
            self.A_exprs = tuple(parse(a) if isinstance(a, str) else a for a in A)
        except ExprError as exc:
            raise PotentialError(f"invalid potential expression: {exc}") from exc

        allowed = {"t", *SPATIAL_VARIABLES[:dimension]}
        used = free_variables(self.V_expr).union(*(free_variables(a) for a in self.A_exprs))
        if not used <= allowed:
            raise PotentialError(f"variables {sorted(used - allowed)} are not available in {dimension}D")
        self.time_independent = "t" not in used

        names = SPATIAL_VARIABLES[:dimension]
        self.dV_exprs = tuple(differentiate(self.V_expr, name) for name in names)
        self.dA_exprs = tuple(tuple(differentiate(a, name) for a in self.A_exprs) for name in names)

    def _environment(self, t, coords) -> dict:
        env = {"t": t}
        env.update(zip(SPATIAL_VARIABLES, coords))
        return env

    def _eval(self, expr: Expr, env: dict, shape) -> np.ndarray:
        try:
            value = evaluate(expr, env)
        except ExprError as exc:
            raise PotentialError(f"cannot evaluate {to_source(expr)}: {exc}") from exc
        return np.broadcast_to(np.asarray(value, dtype=np.float64), shape).copy()

    def _evaluate(self, t, coords, shape):
        env = self._environment(t, coords)
        V = self._eval(self.V_expr, env, shape)
        A = np.stack([self._eval(a, env, shape) for a in self.A_exprs])
        return PotentialValues(V, A)

    def _gradients(self, t, coords, shape):
        env = self._environment(t, coords)
        dV = np.stack([self._eval(expr, env, shape) for expr in self.dV_exprs])
        dA = np.stack([np.stack([self._eval(expr, env, shape) for expr in row]) for row in self.dA_exprs])
        return PotentialGradients(dV, dA)

    def describe(self) -> dict:
        return {
            **super().describe(),
            "V": to_source(self.V_expr),
            "A": [to_source(a) for a in self.A_exprs],
        }


def random_trig_potential(
    dimension: int,
    rng: np.random.Generator,
    constants: PhysicalConstants | None = None,
    amplitude: float = 0.5,
    magnetic: bool = True,
) -> CustomPotential:
    """Random potentials of trigonometric degree one per axis, periodic on (-π, π)^d."""
    names = SPATIAL_VARIABLES[:dimension]

    def term() -> str:
        parts = [f"{rng.uniform(-amplitude, amplitude):.6f}"]
        for name in names:
            parts.append(f"{rng.uniform(-amplitude, amplitude):.6f}*cos({name})")
            parts.append(f"{rng.uniform(-amplitude, amplitude):.6f}*sin({name})")
        if dimension >= 2:
            parts.append(f"{rng.uniform(-amplitude, amplitude):.6f}*sin(x)*cos(y)")
        if dimension == 3:
            parts.append(f"{rng.uniform(-amplitude, amplitude):.6f}*cos(y)*sin(z)")
        return " + ".join(parts)

    V = term()
    A = [term() if magnetic else "0" for _ in names]
    return CustomPotential(dimension, V, A, constants)


def build_potential(kind: str, dimension: int, constants: PhysicalConstants | None = None, **params) -> PotentialModel:
    if kind == "zero":
        return ZeroPotential(dimension, constants)
    if kind == "td1d":
        _require_dimension(kind, dimension, 1)
        return TimeDependent1D(constants)
    if kind == "klein":
        _require_dimension(kind, dimension, 1)
        return KleinStep(params.get("V0", 6.13e4), params.get("L", 1e-4), constants)
    if kind == "honeycomb":
        _require_dimension(kind, dimension, 2)
        return Honeycomb2D(params.get("theta_case", 1), constants)
    if kind == "custom":
        A = [params.get(f"A{j + 1}_expr") or "0" for j in range(dimension)]
        return CustomPotential(dimension, params.get("V_expr") or "0", A, constants)
    if kind == "random":
        rng = np.random.default_rng(params.get("seed", 0))
        return random_trig_potential(dimension, rng, constants)
    raise PotentialError(f"unknown potential kind {kind!r}")


def _require_dimension(kind: str, dimension: int, expected: int):
    if dimension != expected:
        raise PotentialError(f"{kind} potential is {expected}D, configured dimension is {dimension}")
