from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile

FACTOR_APPLICATIONS = Counter(
    "dirac_factor_applications_total",
    "Split-step factors applied",
    ["kind"]
)

STEP_COUNT = Counter(
    "dirac_steps_total",
    "Completed time steps",
    ["scheme"]
)

EVOLUTION_SECONDS = Histogram(
    "dirac_evolution_seconds",
    "Wall-clock seconds per evolution",
    ["scheme"]
)

CELL_SECONDS = Histogram(
    "dirac_convergence_cell_seconds",
    "Wall-clock seconds per convergence ladder cell",
    ["scheme"]
)

CACHE_HITS = Counter(
    "dirac_reference_cache_hits_total",
    "Reference solution cache hits"
)
CACHE_MISSES = Counter(
    "dirac_reference_cache_misses_total",
    "Reference solution cache misses"
)

COMMUTATOR_CHECKS = Counter(
    "dirac_commutator_checks_total",
    "Closed-form versus brute-force commutator checks",
    ["case", "status"]
)

ERROR_COUNT = Counter(
    "dirac_errors_total",
    "Errors surfaced at the command line",
    ["error_type"]
)

KINETIC_FACTORS = FACTOR_APPLICATIONS.labels(kind="kinetic")
POTENTIAL_FACTORS = FACTOR_APPLICATIONS.labels(kind="potential")
COMPACT_FACTORS = FACTOR_APPLICATIONS.labels(kind="compact")


def export_metrics(path: str):
    write_to_textfile(path, REGISTRY)
