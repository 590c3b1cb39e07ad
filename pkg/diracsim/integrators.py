"""Time-ordered split-step plans and the evolution loop.

Factors are listed in application order (rightmost operator first). A
kinetic factor e^{aτT} advances the sampling time of every potential factor
applied after it by aτ, so a potential factor's offset is the sum of the
kinetic coefficients before it.
"""

import math
import time
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np
import structlog

from diracsim.errors import NumericalError, PlanError, SchemeUnavailable, StepCountError
from diracsim.fields import SpinorField, mass
from diracsim.metrics import EVOLUTION_SECONDS, STEP_COUNT
from diracsim.potentials import PotentialModel
from diracsim.propagators import compact_potential_step, kinetic_step, potential_step
from diracsim.settings import get_settings

logger = structlog.get_logger(__name__)

SCHEMES = ("s1", "s2", "s4", "s4rk", "s4c")
STEP_COUNT_ULPS = 8

# Forest-Ruth triple jump
FOREST_RUTH_W1 = Fraction("1.3512071919596576340476878089715")
FOREST_RUTH_W0 = 1 - 2 * FOREST_RUTH_W1

# Symmetric six-stage partitioned Runge-Kutta splitting, kinetic stages first
PRK_A = (
    Fraction("0.0792036964311957"),
    Fraction("0.353172906049774"),
    Fraction("-0.0420650803577195"),
)
PRK_B = (
    Fraction("0.209515106613362"),
    Fraction("-0.143851773179818"),
)


class FactorKind(str, Enum):
    KINETIC = "kinetic"
    POTENTIAL = "potential"
    COMPACT = "compact"


@dataclass(frozen=True)
class Factor:
    kind: FactorKind
    coefficient: Fraction
    time_offset: Fraction | None = None

    @property
    def is_potential(self) -> bool:
        return self.kind is not FactorKind.KINETIC


@dataclass(frozen=True)
class SplitStepPlan:
    scheme: str
    order: int
    factors: tuple[Factor, ...]

    @property
    def kinetic_total(self) -> Fraction:
        return sum((f.coefficient for f in self.factors if not f.is_potential), Fraction(0))

    @property
    def potential_total(self) -> Fraction:
        return sum((f.coefficient for f in self.factors if f.is_potential), Fraction(0))

    def cost(self) -> tuple[int, int]:
        kinetic = sum(1 for f in self.factors if not f.is_potential)
        return kinetic, len(self.factors) - kinetic

    def validate(self) -> "SplitStepPlan":
        if self.kinetic_total != 1 or self.potential_total != 1:
            raise PlanError(
                f"{self.scheme}: coefficients must sum to 1 per family, "
                f"got kinetic {self.kinetic_total}, potential {self.potential_total}"
            )
        elapsed = Fraction(0)
        for index, factor in enumerate(self.factors):
            if not factor.is_potential:
                elapsed += factor.coefficient
            elif factor.time_offset != elapsed:
                raise PlanError(
                    f"{self.scheme}: factor {index} samples the potential at offset {factor.time_offset}, "
                    f"expected {elapsed}"
                )
        return self


def assign_time_offsets(plan: SplitStepPlan) -> SplitStepPlan:
    elapsed = Fraction(0)
    factors = []
    for factor in plan.factors:
        if factor.is_potential:
            factors.append(replace(factor, time_offset=elapsed))
        else:
            factors.append(replace(factor, time_offset=None))
            elapsed += factor.coefficient
    return replace(plan, factors=tuple(factors))


def freeze_time_offsets(plan: SplitStepPlan) -> SplitStepPlan:
    """Sample every potential factor at t_n, as if the potentials were frozen over the step."""
    factors = tuple(
        replace(f, time_offset=Fraction(0)) if f.is_potential else f for f in plan.factors
    )
    return replace(plan, scheme=f"{plan.scheme}-frozen", factors=factors)


def _kin(coefficient) -> Factor:
    return Factor(FactorKind.KINETIC, Fraction(coefficient))


def _pot(coefficient) -> Factor:
    return Factor(FactorKind.POTENTIAL, Fraction(coefficient))


def _scheme_factors(scheme: str) -> tuple[int, list[Factor]]:
    half = Fraction(1, 2)
    if scheme == "s1":
        return 1, [_pot(1), _kin(1)]
    if scheme == "s2":
        return 2, [_pot(half), _kin(1), _pot(half)]
    if scheme == "s4":
        w1, w0 = FOREST_RUTH_W1, FOREST_RUTH_W0
        return 4, [
            _pot(w1 / 2), _kin(w1),
            _pot((w1 + w0) / 2), _kin(w0),
            _pot((w0 + w1) / 2), _kin(w1),
            _pot(w1 / 2),
        ]
    if scheme == "s4c":
        return 4, [
            _pot(Fraction(1, 6)), _kin(half),
            Factor(FactorKind.COMPACT, Fraction(2, 3)),
            _kin(half), _pot(Fraction(1, 6)),
        ]
    if scheme == "s4rk":
        a1, a2, a3 = PRK_A
        a4 = 1 - 2 * (a1 + a2 + a3)
        b1, b2 = PRK_B
        b3 = half - (b1 + b2)
        return 4, [
            _kin(a1), _pot(b1), _kin(a2), _pot(b2), _kin(a3), _pot(b3),
            _kin(a4),
            _pot(b3), _kin(a3), _pot(b2), _kin(a2), _pot(b1), _kin(a1),
        ]
    raise PlanError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")


def builtin_plan(scheme: str) -> SplitStepPlan:
    name = scheme.lower()
    if name == "s4rk" and not get_settings().enable_s4rk:
        raise SchemeUnavailable("s4rk is disabled (DIRAC_ENABLE_S4RK=false)")
    order, factors = _scheme_factors(name)
    plan = SplitStepPlan(scheme=name, order=order, factors=tuple(factors))
    return assign_time_offsets(plan).validate()


def _format_fraction(value: Fraction | None) -> str:
    if value is None:
        return "-"
    if value.denominator <= 1000:
        return str(value)
    return repr(float(value))


def describe_plan(plan: SplitStepPlan) -> list[dict]:
    return [
        {
            "index": index,
            "kind": factor.kind.value,
            "coefficient": _format_fraction(factor.coefficient),
            "time_offset": _format_fraction(factor.time_offset),
        }
        for index, factor in enumerate(plan.factors)
    ]


def step(field: SpinorField, t_n: float, tau: float, plan: SplitStepPlan, model: PotentialModel) -> SpinorField:
    if tau == 0:
        return field.copy()
    for factor in plan.factors:
        s = float(factor.coefficient) * tau
        if factor.kind is FactorKind.KINETIC:
            field = kinetic_step(field, s, model.constants)
            continue
        t_eval = t_n + float(factor.time_offset) * tau
        if factor.kind is FactorKind.POTENTIAL:
            field = potential_step(field, t_eval, s, model)
        else:
            field = compact_potential_step(field, t_eval, s, tau, model)
    return field


def step_count(t0: float, t_max: float, tau: float) -> int:
    """Number of steps of size tau from t0 to t_max, accepting a few ulps of rounding."""
    if not tau > 0:
        raise StepCountError(f"time step must be positive, got {tau}")
    ratio = (t_max - t0) / tau
    count = round(ratio)
    if count < 0 or abs(ratio - count) > STEP_COUNT_ULPS * np.spacing(max(abs(ratio), 1.0)):
        raise StepCountError(f"(t_max - t0)/tau = {ratio!r} is not a non-negative integer")
    return int(count)


Observer = Callable[[int, float, SpinorField], None]


def evolve(
    field0: SpinorField,
    t0: float,
    t_max: float,
    tau: float,
    plan: SplitStepPlan,
    model: PotentialModel,
    observer: Observer | None = None,
    stride: int = 1,
) -> SpinorField:
    """Repeat ``step`` from t0 to t_max.

    The observer sees (n, t_n, field) at n = 0, every ``stride`` steps and at
    the final step. It must not mutate the field.
    """
    steps = step_count(t0, t_max, tau)
    stride = max(1, int(stride))
    started = time.perf_counter()
    initial_mass = mass(field0)

    field = field0
    if observer is not None:
        observer(0, t0, field)
    for n in range(steps):
        field = step(field, t0 + n * tau, tau, plan, model)
        if observer is not None and ((n + 1) % stride == 0 or n + 1 == steps):
            observer(n + 1, t0 + (n + 1) * tau, field)
    if steps == 0:
        field = field0.copy()

    elapsed = time.perf_counter() - started
    STEP_COUNT.labels(scheme=plan.scheme).inc(steps)
    EVOLUTION_SECONDS.labels(scheme=plan.scheme).observe(elapsed)

    final_mass = mass(field)
    drift = abs(final_mass - initial_mass) / initial_mass if initial_mass > 0 else 0.0
    logger.debug(
        "evolution_finished",
        scheme=plan.scheme,
        steps=steps,
        tau=tau,
        seconds=round(elapsed, 4),
        mass_drift=drift,
    )
    if not math.isfinite(final_mass):
        logger.error("evolution_non_finite", scheme=plan.scheme, steps=steps, tau=tau)
        raise NumericalError(f"{plan.scheme}: field is not finite after {steps} steps of tau={tau}")
    return field
