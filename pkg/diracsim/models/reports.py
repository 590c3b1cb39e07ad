from pydantic import BaseModel, Field


class ConvergenceCell(BaseModel):
    tau: float
    observe_time: float
    e_phi: float
    e_rho: float
    e_j: float
    rate_phi: float | None = None
    rate_rho: float | None = None
    rate_j: float | None = None
    seconds: float = 0.0


class ConvergenceReport(BaseModel):
    scheme: str
    reference_tau: float
    reference_scheme: str
    cells: list[ConvergenceCell] = Field(default_factory=list)

    def at_time(self, observe_time: float) -> list[ConvergenceCell]:
        return [cell for cell in self.cells if cell.observe_time == observe_time]

    def observe_times(self) -> list[float]:
        return sorted({cell.observe_time for cell in self.cells})

    def rates(self, norm: str = "phi", observe_time: float | None = None) -> list[float]:
        if observe_time is None:
            observe_time = self.observe_times()[-1]
        values = [getattr(cell, f"rate_{norm}") for cell in self.at_time(observe_time)]
        return [value for value in values if value is not None]

    def mean_rate(self, norm: str = "phi", last: int = 3, observe_time: float | None = None) -> float:
        rates = self.rates(norm, observe_time)[-last:]
        return sum(rates) / len(rates)


class KleinReport(BaseModel):
    k0: float
    x0: float
    L: float
    V0: float
    c: float
    m: float
    E_k: float
    k: float
    k_prime: float
    in_region: bool
    T_ana: float
    T_num: float
    reflected: float
    rel_err: float | None = None


class CommutatorCheckResult(BaseModel):
    case: str
    dimension: int
    components: int
    samples: int
    max_relative_error: float
    tolerance: float
    passed: bool


class RunSummary(BaseModel):
    scheme: str
    dimension: int
    components: int
    tau: float
    t0: float
    t_max: float
    steps: int
    initial_mass: float
    final_mass: float
    mass_drift: float
    seconds: float
    snapshots: list[str] = Field(default_factory=list)
