class DiracError(Exception):
    """Base class for every error raised by diracsim."""


class AlgebraError(DiracError, ValueError):
    pass


class GridError(DiracError, ValueError):
    pass


class FieldError(DiracError, ValueError):
    pass


class ExprError(DiracError, ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class ArityError(ExprError):
    pass


class ExprEvaluationError(ExprError):
    pass


class PotentialError(DiracError, ValueError):
    pass


class UnsupportedCommutatorTransport(DiracError):
    """Compact factor requested where the double commutator carries derivative terms."""


class PlanError(DiracError, ValueError):
    pass


class SchemeUnavailable(PlanError):
    pass


class StepCountError(DiracError, ValueError):
    pass


class ConfigError(DiracError, ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class BackendUnavailable(DiracError):
    pass


class SnapshotFormatError(DiracError, ValueError):
    pass


class NumericalError(DiracError, ArithmeticError):
    """The evolved field stopped being finite."""
