"""Line-based simulation config.

Each non-blank line is ``section.key = value``; ``#`` starts a comment.
Numbers accept decimal, scientific or ``p/q`` notation, lists are comma
separated, and per-axis grid values may be given once for all axes.
"""

from fractions import Fraction
from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator

from diracsim.errors import ConfigError, DiracError, ExprError
from diracsim.exprlang import parse
from diracsim.grid import Axis, PeriodicGrid
from diracsim.integrators import SCHEMES, step_count
from diracsim.potentials import PhysicalConstants, PotentialModel, build_potential

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # DIRAC_* settings from the environment only


def _parse_number(value):
    if not isinstance(value, str):
        return value
    text = value.strip()
    numerator, slash, denominator = text.partition("/")
    try:
        if slash:
            return float(Fraction(numerator.strip()) / Fraction(denominator.strip()))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {value!r}") from exc


def _split_list(value):
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


Number = Annotated[float, BeforeValidator(_parse_number)]
NumberList = Annotated[list[Number], BeforeValidator(_split_list)]
IntList = Annotated[list[int], BeforeValidator(_split_list)]
SchemeList = Annotated[list[str], BeforeValidator(_split_list)]


def _check_scheme(name: str) -> str:
    name = name.strip().lower()
    if name not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {', '.join(SCHEMES)}")
    return name


def _check_expression(source: str | None) -> str | None:
    if source is not None:
        try:
            parse(source)
        except ExprError as exc:
            raise ValueError(str(exc)) from exc
    return source


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    dimension: int = 1
    a: NumberList = Field(default_factory=lambda: [-32.0])
    b: NumberList = Field(default_factory=lambda: [32.0])
    M: IntList = Field(default_factory=lambda: [1024])

    @field_validator("dimension")
    @classmethod
    def _dimension(cls, value: int) -> int:
        if value not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        return value

    @field_validator("M")
    @classmethod
    def _even(cls, values: list[int]) -> list[int]:
        for value in values:
            if value < 4 or value % 2:
                raise ValueError(f"M must be even and at least 4, got {value}")
        return values


class FieldSection(_Section):
    components: int = 2

    @field_validator("components")
    @classmethod
    def _components(cls, value: int) -> int:
        if value not in (2, 4):
            raise ValueError("components must be 2 or 4")
        return value


class InitialSection(_Section):
    kind: Literal["gaussian_pair", "klein_packet"] = "gaussian_pair"
    k0: Number = 106.0
    x0: Number = -10.0


class TimeSection(_Section):
    scheme: str = "s4c"
    tau: Number
    t_max: Number
    t0: Number = 0.0

    @field_validator("scheme")
    @classmethod
    def _scheme(cls, value: str) -> str:
        return _check_scheme(value)

    @field_validator("tau")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tau must be positive")
        return value


class PotentialSection(_Section):
    kind: Literal["zero", "td1d", "klein", "honeycomb", "custom", "random"] = "zero"
    V0: Number = 6.13e4
    L: Number = 1e-4
    theta_case: int = 1
    V_expr: str | None = None
    A1_expr: str | None = None
    A2_expr: str | None = None
    A3_expr: str | None = None
    seed: int = 0

    @field_validator("V_expr", "A1_expr", "A2_expr", "A3_expr")
    @classmethod
    def _expressions(cls, value: str | None) -> str | None:
        return _check_expression(value)


class ConstantsSection(_Section):
    c: Number = 1.0
    m: Number = 1.0
    e: Number = 1.0


class OutputSection(_Section):
    prefix: str = "dirac"
    snapshot_stride: int = Field(default=0, ge=0)


class ConvergenceSection(_Section):
    taus: NumberList = Field(default_factory=list)
    reference_tau: Number | None = None
    reference_scheme: str | None = None
    schemes: SchemeList = Field(default_factory=list)
    observe_times: NumberList = Field(default_factory=list)

    @field_validator("reference_scheme")
    @classmethod
    def _reference(cls, value: str | None) -> str | None:
        return None if value is None else _check_scheme(value)

    @field_validator("schemes")
    @classmethod
    def _schemes(cls, values: list[str]) -> list[str]:
        return [_check_scheme(value) for value in values]


class KleinSection(_Section):
    V0_list: NumberList = Field(default_factory=list)


class CommutatorSection(_Section):
    samples: int = Field(default=50, ge=1)
    tolerance: Number = 1e-9
    seed: int = 0
    M: int = 16


class SimulationConfig(_Section):
    grid: GridSection = Field(default_factory=GridSection)
    field: FieldSection = Field(default_factory=FieldSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    time: TimeSection
    potential: PotentialSection = Field(default_factory=PotentialSection)
    constants: ConstantsSection = Field(default_factory=ConstantsSection)
    output: OutputSection = Field(default_factory=OutputSection)
    convergence: ConvergenceSection = Field(default_factory=ConvergenceSection)
    klein: KleinSection = Field(default_factory=KleinSection)
    commutator: CommutatorSection = Field(default_factory=CommutatorSection)

    def _per_axis(self, values: list) -> list:
        return values * self.grid.dimension if len(values) == 1 else values

    def build_constants(self) -> PhysicalConstants:
        return PhysicalConstants(c=self.constants.c, m=self.constants.m, e=self.constants.e)

    def build_grid(self) -> PeriodicGrid:
        axes = zip(self._per_axis(self.grid.a), self._per_axis(self.grid.b), self._per_axis(self.grid.M))
        return PeriodicGrid(tuple(Axis(a, b, M) for a, b, M in axes))

    def build_potential(self) -> PotentialModel:
        p = self.potential
        return build_potential(
            p.kind,
            self.grid.dimension,
            self.build_constants(),
            V0=p.V0,
            L=p.L,
            theta_case=p.theta_case,
            V_expr=p.V_expr,
            A1_expr=p.A1_expr,
            A2_expr=p.A2_expr,
            A3_expr=p.A3_expr,
            seed=p.seed,
        )


SECTIONS = tuple(SimulationConfig.model_fields)


def _read_lines(text: str) -> tuple[dict, dict[str, int]]:
    raw: dict[str, dict[str, str]] = {name: {} for name in SECTIONS}
    lines: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, equals, value = content.partition("=")
        key = key.strip()
        if not equals:
            raise ConfigError("expected 'section.key = value'", line=number)
        section, dot, name = key.partition(".")
        if not dot or not section or not name:
            raise ConfigError("keys must be dotted as section.key", key=key, line=number)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=number)
        if section not in raw:
            raise ConfigError("unknown section", key=key, line=number)
        raw[section][name] = value.strip()
        lines[key] = number
    return raw, lines


def _from_validation_error(exc: ValidationError, lines: dict[str, int]) -> ConfigError:
    error = exc.errors()[0]
    key = ".".join(str(part) for part in error["loc"][:2])
    message = "unknown key" if error["type"] == "extra_forbidden" else error["msg"]
    if error["type"] == "missing":
        message = "missing required key"
    return ConfigError(message, key=key, line=lines.get(key))


def _cross_check(config: SimulationConfig, lines: dict[str, int]):
    d = config.grid.dimension

    def fail(message: str, key: str):
        return ConfigError(message, key=key, line=lines.get(key))

    for name in ("a", "b", "M"):
        if len(getattr(config.grid, name)) not in (1, d):
            raise fail(f"expected 1 or {d} values", f"grid.{name}")
    if config.field.components == 2 and d == 3:
        raise fail("two-component fields support dimensions 1 and 2 only", "field.components")
    if config.initial.kind == "klein_packet" and d != 1:
        raise fail("klein_packet initial data is 1D", "initial.kind")

    try:
        config.build_grid()
    except DiracError as exc:
        raise fail(str(exc), "grid.M") from exc
    try:
        config.build_potential()
    except DiracError as exc:
        raise fail(str(exc), "potential.kind") from exc

    t = config.time
    try:
        step_count(t.t0, t.t_max, t.tau)
    except DiracError as exc:
        raise fail(str(exc), "time.tau") from exc

    observe_times = config.convergence.observe_times or [t.t_max]
    ladder = [("convergence.taus", tau) for tau in config.convergence.taus]
    if config.convergence.reference_tau is not None:
        ladder.append(("convergence.reference_tau", config.convergence.reference_tau))
    for key, tau in ladder:
        if not tau > 0:
            raise fail("time steps must be positive", key)
        for observe in observe_times:
            try:
                step_count(t.t0, observe, tau)
            except DiracError as exc:
                raise fail(f"{exc} at t = {observe}", key) from exc


def parse_config(text: str) -> SimulationConfig:
    raw, lines = _read_lines(text)
    try:
        config = SimulationConfig.model_validate(raw)
    except ValidationError as exc:
        raise _from_validation_error(exc, lines) from exc
    _cross_check(config, lines)
    return config


def load_config(path: str | Path) -> SimulationConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


def _format(value) -> str:
    if isinstance(value, list):
        return ", ".join(_format(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: SimulationConfig) -> str:
    out = []
    for section in SECTIONS:
        values = getattr(config, section)
        for name in type(values).model_fields:
            value = getattr(values, name)
            if value is None:
                continue
            out.append(f"{section}.{name} = {_format(value)}")
    return "\n".join(out) + "\n"
