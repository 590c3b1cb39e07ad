from diracsim.models.reports import (
    CommutatorCheckResult,
    ConvergenceCell,
    ConvergenceReport,
    KleinReport,
    RunSummary,
)

__all__ = ["CommutatorCheckResult", "ConvergenceCell", "ConvergenceReport", "KleinReport", "RunSummary"]
