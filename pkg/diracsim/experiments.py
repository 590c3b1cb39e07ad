"""Experiment drivers: Klein step transmission, convergence ladders, 2D honeycomb dynamics
and the closed-form commutator check."""

import asyncio
import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
import structlog

from diracsim.cache import ReferenceCache, build_cache_key, reference_cache
from diracsim.errors import GridError
from diracsim.fields import SpinorField, component_densities, error_norms, mass, probability_density
from diracsim.grid import PeriodicGrid
from diracsim.integrators import SplitStepPlan, builtin_plan, evolve, step_count
from diracsim.metrics import CELL_SECONDS, COMMUTATOR_CHECKS
from diracsim.models.reports import CommutatorCheckResult, ConvergenceCell, ConvergenceReport, KleinReport
from diracsim.potentials import (
    ATOMIC_UNITS,
    Honeycomb2D,
    KleinStep,
    PhysicalConstants,
    PotentialModel,
    TimeDependent1D,
    ZeroPotential,
    random_trig_potential,
)
from diracsim.propagators import double_commutator_bruteforce, double_commutator_coefficients
from diracsim.settings import get_settings

logger = structlog.get_logger(__name__)

COMMUTATOR_CASES = ((1, 2), (1, 4), (2, 2), (2, 4), (3, 4))


def embed_components(first: np.ndarray, second: np.ndarray, ncomp: int) -> list[np.ndarray]:
    """(φ1, φ2) as two components, or (φ1, 0, 0, φ2) as four."""
    if ncomp == 2:
        return [first, second]
    zero = np.zeros_like(first)
    return [first, zero, zero, second]


@dataclass
class Setup:
    name: str
    grid: PeriodicGrid
    model: PotentialModel
    initial: SpinorField
    t0: float = 0.0
    t_max: float = 1.0
    params: dict = field(default_factory=dict)

    def fingerprint(self) -> dict:
        return {
            "name": self.name,
            "axes": [(axis.a, axis.b, axis.M) for axis in self.grid.axes],
            "ncomp": self.initial.ncomp,
            "model": self.model.describe(),
            "t0": self.t0,
            "params": self.params,
        }


def gaussian_pair_initial(grid: PeriodicGrid, ncomp: int = 2) -> SpinorField:
    """φ1 = exp(-|x|²/2), φ2 = exp(-|x - e_1|²/2)."""
    coords = grid.coordinates
    radius = sum(c * c for c in coords)
    shifted = radius - 2.0 * coords[0] + 1.0
    return SpinorField.from_components(grid, embed_components(np.exp(-radius / 2.0), np.exp(-shifted / 2.0), ncomp))


def td1d_setup(
    a: float = -32.0,
    b: float = 32.0,
    h: float = 1 / 16,
    t_max: float = 2.0,
    ncomp: int = 2,
    constants: PhysicalConstants | None = None,
) -> Setup:
    grid = PeriodicGrid.from_spacing(1, a, b, h)
    return Setup(
        name="td1d",
        grid=grid,
        model=TimeDependent1D(constants),
        initial=gaussian_pair_initial(grid, ncomp),
        t_max=t_max,
    )


def honeycomb_setup(
    case: int = 1,
    a: float = -8.0,
    b: float = 8.0,
    h: float = 1 / 8,
    t_max: float = 1.0,
    grid: PeriodicGrid | None = None,
    ncomp: int = 2,
    constants: PhysicalConstants | None = None,
) -> Setup:
    grid = grid or PeriodicGrid.from_spacing(2, a, b, h)
    return Setup(
        name="honeycomb",
        grid=grid,
        model=Honeycomb2D(case, constants),
        initial=gaussian_pair_initial(grid, ncomp),
        t_max=t_max,
        params={"theta_case": case},
    )


def setup_from_config(config) -> Setup:
    grid = config.build_grid()
    model = config.build_potential()
    ncomp = config.field.components
    if config.initial.kind == "klein_packet":
        params = KleinParameters.from_config(config)
        initial = klein_initial(params, grid, ncomp)
        extra = {"k0": params.k0, "x0": params.x0}
    else:
        initial = gaussian_pair_initial(grid, ncomp)
        extra = {}
    return Setup(
        name=f"{config.potential.kind}-{config.initial.kind}",
        grid=grid,
        model=model,
        initial=initial,
        t0=config.time.t0,
        t_max=config.time.t_max,
        params=extra,
    )


# --- Klein step ---------------------------------------------------------------


@dataclass(frozen=True)
class KleinParameters:
    k0: float = 106.0
    x0: float = -10.0
    L: float = 1e-4
    V0: float = 6.13e4
    constants: PhysicalConstants = ATOMIC_UNITS
    a: float = -20.0
    b: float = 20.0
    t_max: float = 0.22

    @classmethod
    def from_config(cls, config) -> "KleinParameters":
        return cls(
            k0=config.initial.k0,
            x0=config.initial.x0,
            L=config.potential.L,
            V0=config.potential.V0,
            constants=config.build_constants(),
            a=config.grid.a[0],
            b=config.grid.b[0],
            t_max=config.time.t_max,
        )

    @property
    def spinor_ratio(self) -> float:
        c, rest = self.constants.c, self.constants.rest_energy
        return c * self.k0 / (rest + math.sqrt(rest * rest + c * c * self.k0 * self.k0))


class KleinTransmission(NamedTuple):
    value: float
    in_region: bool
    E_k: float
    k: float
    k_prime: float


def klein_initial(params: KleinParameters, grid: PeriodicGrid, ncomp: int = 2) -> SpinorField:
    """Gaussian packet e^{ik0x} e^{-(x-x0)²/4} on the positive-energy spinor (1, C)."""
    if grid.d != 1:
        raise GridError(f"the Klein packet needs a 1D grid, got {grid.d}D")
    (x,) = grid.coordinates
    packet = np.exp(1j * params.k0 * x) * np.exp(-((x - params.x0) ** 2) / 4.0)
    return SpinorField.from_components(grid, embed_components(packet, params.spinor_ratio * packet, ncomp))


def klein_transmission_analytic(k0: float, V0: float, L: float, constants: PhysicalConstants = ATOMIC_UNITS) -> KleinTransmission:
    c, rest = constants.c, constants.rest_energy
    E_k = math.sqrt(k0 * k0 * c * c + rest * rest)
    if V0 <= E_k + rest:
        return KleinTransmission(0.0, False, E_k, 0.0, 0.0)

    k = math.sqrt((E_k - V0) ** 2 - rest * rest) / c
    k_prime = -math.sqrt(E_k * E_k - rest * rest) / c
    numerator = math.sinh(math.pi * k * L) * math.sinh(math.pi * k_prime * L)
    denominator = math.sinh(math.pi * (V0 / c + k + k_prime) * L / 2.0) * math.sinh(
        math.pi * (V0 / c - k - k_prime) * L / 2.0
    )
    return KleinTransmission(-numerator / denominator, True, E_k, k, k_prime)


def transmitted_fraction(field: SpinorField) -> float:
    """Share of the mass on the right half of a 1D grid (x ≥ midpoint)."""
    density = probability_density(field)
    total = float(np.sum(density))
    if total == 0.0:
        return 0.0
    return float(np.sum(density[field.grid.shape[0] // 2 :])) / total


def klein_run(params: KleinParameters, h: float, tau: float, scheme: str | SplitStepPlan = "s4c") -> KleinReport:
    plan = builtin_plan(scheme) if isinstance(scheme, str) else scheme
    grid = PeriodicGrid.from_spacing(1, params.a, params.b, h)
    model = KleinStep(params.V0, params.L, params.constants)
    final = evolve(klein_initial(params, grid), 0.0, params.t_max, tau, plan, model)

    analytic = klein_transmission_analytic(params.k0, params.V0, params.L, params.constants)
    T_num = transmitted_fraction(final)
    rel_err = abs(T_num - analytic.value) / analytic.value if analytic.in_region and analytic.value > 0 else None
    logger.info(
        "klein_run_finished",
        V0=params.V0,
        scheme=plan.scheme,
        T_ana=analytic.value,
        T_num=T_num,
        rel_err=rel_err,
    )
    return KleinReport(
        k0=params.k0,
        x0=params.x0,
        L=params.L,
        V0=params.V0,
        c=params.constants.c,
        m=params.constants.m,
        E_k=analytic.E_k,
        k=analytic.k,
        k_prime=analytic.k_prime,
        in_region=analytic.in_region,
        T_ana=analytic.value,
        T_num=T_num,
        reflected=1.0 - T_num,
        rel_err=rel_err,
    )


def klein_sweep(
    V0_list: Sequence[float],
    h: float,
    tau: float,
    scheme: str | SplitStepPlan = "s4c",
    params: KleinParameters | None = None,
) -> list[KleinReport]:
    base = params or KleinParameters()
    return [klein_run(replace(base, V0=float(V0)), h, tau, scheme) for V0 in V0_list]


# --- Convergence ladders ------------------------------------------------------


def _as_plan(scheme: str | SplitStepPlan) -> SplitStepPlan:
    return builtin_plan(scheme) if isinstance(scheme, str) else scheme


def observed_snapshots(setup: Setup, plan: SplitStepPlan, tau: float, observe_times: Sequence[float]) -> dict[float, SpinorField]:
    """Evolve once to the last observation time, keeping the field at every observation time."""
    wanted = {step_count(setup.t0, t, tau): t for t in observe_times}
    collected: dict[float, SpinorField] = {}

    def observer(n, t, field):
        if n in wanted:
            collected[wanted[n]] = field.copy()

    evolve(setup.initial, setup.t0, max(observe_times), tau, plan, setup.model, observer=observer)
    return collected


def _rate(previous: float, current: float, tau_previous: float, tau: float) -> float | None:
    if previous <= 0.0 or current <= 0.0 or tau_previous == tau:
        return None
    return math.log(previous / current) / math.log(tau_previous / tau)


async def _convergence_study(
    setup: Setup,
    plans: list[SplitStepPlan],
    taus: list[float],
    reference_plan: SplitStepPlan,
    reference_tau: float,
    observe_times: list[float],
    cache: ReferenceCache,
) -> list[ConvergenceReport]:
    semaphore = asyncio.Semaphore(get_settings().threads)
    key = build_cache_key(
        setup=setup.fingerprint(),
        scheme=reference_plan.scheme,
        tau=reference_tau,
        observe_times=observe_times,
    )

    def reference():
        return cache.get_or_compute(key, lambda: observed_snapshots(setup, reference_plan, reference_tau, observe_times))

    def cell(plan: SplitStepPlan, tau: float):
        started = time.perf_counter()
        fields = observed_snapshots(setup, plan, tau, observe_times)
        seconds = time.perf_counter() - started
        CELL_SECONDS.labels(scheme=plan.scheme).observe(seconds)
        exact = reference()
        return {t: error_norms(fields[t], exact[t]) for t in observe_times}, seconds

    async def run(plan: SplitStepPlan, tau: float):
        async with semaphore:
            return await asyncio.to_thread(cell, plan, tau)

    # the reference goes first so the cells do not queue behind its lock
    async with semaphore:
        await asyncio.to_thread(reference)
    jobs = [(plan, tau) for plan in plans for tau in taus]
    results = await asyncio.gather(*(run(plan, tau) for plan, tau in jobs))

    reports = []
    for plan in plans:
        report = ConvergenceReport(scheme=plan.scheme, reference_tau=reference_tau, reference_scheme=reference_plan.scheme)
        outcomes = [result for (p, _), result in zip(jobs, results) if p is plan]
        for t in observe_times:
            previous = None
            for tau, (norms, seconds) in zip(taus, outcomes):
                norms_t = norms[t]
                rates = {}
                for name in ("phi", "rho", "j"):
                    value = getattr(norms_t, name)
                    rates[f"rate_{name}"] = (
                        _rate(getattr(previous[1], name), value, previous[0], tau) if previous is not None else None
                    )
                report.cells.append(
                    ConvergenceCell(
                        tau=tau,
                        observe_time=t,
                        e_phi=norms_t.phi,
                        e_rho=norms_t.rho,
                        e_j=norms_t.j,
                        seconds=seconds,
                        **rates,
                    )
                )
                previous = (tau, norms_t)
        reports.append(report)
        logger.info(
            "convergence_finished",
            scheme=plan.scheme,
            taus=len(taus),
            rates_phi=report.rates("phi"),
        )
    return reports


def convergence_study(
    setup: Setup,
    schemes: Sequence[str | SplitStepPlan],
    taus: Sequence[float],
    reference_tau: float,
    reference_scheme: str | SplitStepPlan = "s4c",
    observe_times: Sequence[float] | None = None,
    cache: ReferenceCache | None = None,
) -> list[ConvergenceReport]:
    """Temporal errors of each scheme on a τ ladder against a fine-step reference on the same grid.

    Ladder cells run concurrently on up to ``settings.threads`` worker threads;
    the reference is computed once per setup and cached.
    """
    taus = [float(tau) for tau in taus]
    observe_times = sorted(float(t) for t in (observe_times or [setup.t_max]))
    for tau in taus + [float(reference_tau)]:
        for t in observe_times:
            step_count(setup.t0, t, tau)
    plans = [_as_plan(scheme) for scheme in schemes]
    return asyncio.run(
        _convergence_study(
            setup,
            plans,
            taus,
            _as_plan(reference_scheme),
            float(reference_tau),
            observe_times,
            cache if cache is not None else reference_cache,
        )
    )


# --- 2D honeycomb dynamics ----------------------------------------------------


@dataclass
class DensitySnapshot:
    t: float
    spinor: SpinorField
    rho1: np.ndarray
    rho2: np.ndarray
    rho: np.ndarray
    mass: float


def honeycomb_dynamics(
    case: int,
    tau: float,
    snapshot_times: Sequence[float],
    setup: Setup | None = None,
    scheme: str | SplitStepPlan = "s4c",
) -> list[DensitySnapshot]:
    """ρ1, ρ2 and ρ1 + ρ2 at each requested time; defaults to the (-25, 25)² domain at h = 1/8."""
    times = sorted(float(t) for t in snapshot_times)
    setup = setup or honeycomb_setup(case, a=-25.0, b=25.0, h=1 / 8, t_max=times[-1])
    plan = _as_plan(scheme)
    wanted = {step_count(setup.t0, t, tau): t for t in times}
    snapshots: list[DensitySnapshot] = []

    def observer(n, t, field):
        if n in wanted:
            densities = component_densities(field)
            rho1 = densities[..., 0]
            rho2 = densities[..., -1]
            snapshots.append(
                DensitySnapshot(
                    t=wanted[n],
                    spinor=field.copy(),
                    rho1=rho1,
                    rho2=rho2,
                    rho=np.sum(densities, axis=-1),
                    mass=mass(field),
                )
            )

    evolve(setup.initial, setup.t0, times[-1], tau, plan, setup.model, observer=observer)
    return snapshots


# --- Closed-form commutator check ---------------------------------------------


def random_band_limited_field(
    grid: PeriodicGrid,
    ncomp: int,
    rng: np.random.Generator,
    modes: int = 8,
    max_mode: int = 2,
) -> SpinorField:
    data = np.zeros(grid.shape + (ncomp,), dtype=np.complex128)
    for _ in range(modes):
        phase = np.zeros(grid.shape)
        for axis, coordinate in zip(grid.axes, grid.coordinates):
            l = int(rng.integers(-max_mode, max_mode + 1))
            phase = phase + 2.0 * math.pi * l * (coordinate - axis.a) / axis.length
        amplitude = rng.normal(size=ncomp) + 1j * rng.normal(size=ncomp)
        data += np.exp(1j * phase)[..., None] * amplitude
    return SpinorField(grid, data)


def commutator_check(
    constants: PhysicalConstants | None = None,
    samples: int = 50,
    tolerance: float = 1e-9,
    seed: int = 0,
    M: int = 16,
    zero: bool = False,
    cases: Sequence[tuple[int, int]] = COMMUTATOR_CASES,
) -> list[CommutatorCheckResult]:
    """Closed-form [W, [T, W]] against 2WTW - WWT - TWW on random band-limited fields."""
    constants = constants or PhysicalConstants()
    rng = np.random.default_rng(seed)
    results = []
    for d, ncomp in cases:
        grid = PeriodicGrid.uniform(d, -math.pi, math.pi, M)
        model = ZeroPotential(d, constants) if zero else random_trig_potential(d, rng, constants)
        t = float(rng.uniform(0.0, 1.0))
        coefficients = double_commutator_coefficients(model, t, grid, ncomp)

        worst = 0.0
        for _ in range(samples):
            field = random_band_limited_field(grid, ncomp, rng)
            closed = coefficients.apply(field).data
            brute = double_commutator_bruteforce(field, t, model).data
            scale = float(np.linalg.norm(brute))
            difference = float(np.linalg.norm(closed - brute))
            worst = max(worst, difference / scale if scale > 0 else difference)

        case = f"{d}d-{ncomp}c"
        passed = worst <= tolerance
        COMMUTATOR_CHECKS.labels(case=case, status="pass" if passed else "fail").inc()
        logger.info("commutator_case_checked", case=case, max_relative_error=worst, passed=passed)
        results.append(
            CommutatorCheckResult(
                case=case,
                dimension=d,
                components=ncomp,
                samples=samples,
                max_relative_error=worst,
                tolerance=tolerance,
                passed=passed,
            )
        )
    return results


