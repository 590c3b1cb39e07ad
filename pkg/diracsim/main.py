import argparse
import csv
import json
import sys
import time
from pathlib import Path

import structlog

from diracsim import __version__
from diracsim.config import SimulationConfig, load_config
from diracsim.errors import ConfigError, DiracError, PlanError, StepCountError
from diracsim.experiments import (
    KleinParameters,
    commutator_check,
    convergence_study,
    klein_run,
    klein_sweep,
    setup_from_config,
)
from diracsim.fields import mass
from diracsim.integrators import builtin_plan, describe_plan, evolve, freeze_time_offsets, step_count
from diracsim.logging_config import configure_logging
from diracsim.metrics import ERROR_COUNT, export_metrics
from diracsim.models.reports import RunSummary
from diracsim.potentials import PhysicalConstants
from diracsim.settings import get_settings
from diracsim.snapshots import write_snapshot

logger = structlog.get_logger()

CSV_COLUMNS = ("scheme", "tau", "e_phi", "rate_phi", "e_rho", "rate_rho", "e_j", "rate_j", "seconds")
USAGE_ERRORS = (ConfigError, StepCountError, PlanError)


def _number(value: float | None) -> str:
    return "" if value is None else f"{value:.15e}"


def _output_path(config: SimulationConfig, suffix: str) -> Path:
    path = Path(f"{config.output.prefix}{suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    config = load_config(args.config)
    setup = setup_from_config(config)
    plan = builtin_plan(config.time.scheme)
    stride = config.output.snapshot_stride
    steps = step_count(setup.t0, setup.t_max, config.time.tau)
    written: list[str] = []

    def observer(n, t, field):
        if (stride and n % stride == 0) or n == steps:
            path = write_snapshot(_output_path(config, f"_{n:06d}.dspn"), field, t)
            written.append(str(path))

    started = time.perf_counter()
    final = evolve(setup.initial, setup.t0, setup.t_max, config.time.tau, plan, setup.model, observer=observer)
    seconds = time.perf_counter() - started

    initial_mass = mass(setup.initial)
    final_mass = mass(final)
    summary = RunSummary(
        scheme=plan.scheme,
        dimension=setup.grid.d,
        components=setup.initial.ncomp,
        tau=config.time.tau,
        t0=setup.t0,
        t_max=setup.t_max,
        steps=steps,
        initial_mass=initial_mass,
        final_mass=final_mass,
        mass_drift=abs(final_mass - initial_mass) / initial_mass if initial_mass > 0 else 0.0,
        seconds=seconds,
        snapshots=written,
    )
    path = _output_path(config, "_summary.json")
    path.write_text(summary.model_dump_json(indent=2) + "\n")
    logger.info("run_finished", summary=str(path), steps=steps, mass_drift=summary.mass_drift)
    return 0


def write_convergence_csv(path: Path, reports, observe_time: float):
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            for cell in report.at_time(observe_time):
                writer.writerow(
                    [
                        report.scheme,
                        _number(cell.tau),
                        _number(cell.e_phi),
                        _number(cell.rate_phi),
                        _number(cell.e_rho),
                        _number(cell.rate_rho),
                        _number(cell.e_j),
                        _number(cell.rate_j),
                        _number(cell.seconds),
                    ]
                )


def cmd_convergence(args) -> int:
    config = load_config(args.config)
    study = config.convergence
    if not study.taus:
        raise ConfigError("a convergence study needs a tau ladder", key="convergence.taus")
    setup = setup_from_config(config)
    schemes = [builtin_plan(name) for name in (study.schemes or [config.time.scheme])]
    if args.frozen:
        schemes = [freeze_time_offsets(plan) for plan in schemes]
    reference_tau = study.reference_tau or min(study.taus) / 32

    reports = convergence_study(
        setup,
        schemes,
        study.taus,
        reference_tau,
        reference_scheme=study.reference_scheme or config.time.scheme,
        observe_times=study.observe_times or None,
    )

    observe_times = reports[0].observe_times()
    for index, observe_time in enumerate(observe_times):
        # the final observation time owns the unsuffixed file
        suffix = "_convergence.csv" if observe_time == observe_times[-1] else f"_convergence_t{index}.csv"
        path = _output_path(config, suffix)
        write_convergence_csv(path, reports, observe_time)
        logger.info("convergence_written", path=str(path), t=observe_time)
    return 0


def _klein_json(report) -> dict:
    return {
        "k0": report.k0,
        "V0": report.V0,
        "L": report.L,
        "E_k": report.E_k,
        "T_ana": report.T_ana,
        "T_num": report.T_num,
        "rel_err": report.rel_err,
    }


def cmd_klein(args) -> int:
    config = load_config(args.config)
    params = KleinParameters.from_config(config)
    h = config.build_grid().spacing[0]
    if config.klein.V0_list:
        payload = [_klein_json(r) for r in klein_sweep(config.klein.V0_list, h, config.time.tau, config.time.scheme, params)]
    else:
        payload = _klein_json(klein_run(params, h, config.time.tau, config.time.scheme))

    path = _output_path(config, "_klein.json")
    path.write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload, indent=2))
    return 0


def cmd_commutator_check(args) -> int:
    if args.config:
        config = load_config(args.config)
        options = config.commutator
        constants = config.build_constants()
        samples, tolerance, seed, M = options.samples, options.tolerance, options.seed, options.M
    else:
        constants = PhysicalConstants()
        samples, tolerance, seed, M = 50, 1e-9, 0, 16

    results = commutator_check(constants, samples=samples, tolerance=tolerance, seed=seed, M=M, zero=args.zero)
    print(f"{'case':<8} {'samples':>7} {'max_rel_error':>22}  status")
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"{result.case:<8} {result.samples:>7} {result.max_relative_error:>22.15e}  {status}")
    return 0 if all(result.passed for result in results) else 1


def cmd_plan(args) -> int:
    plan = builtin_plan(args.scheme)
    if args.frozen:
        plan = freeze_time_offsets(plan)
    print(f"# {plan.scheme} (order {plan.order})")
    print(f"{'index':>5}  {'kind':<9}  {'coefficient':>22}  time_offset")
    for row in describe_plan(plan):
        print(f"{row['index']:>5}  {row['kind']:<9}  {row['coefficient']:>22}  {row['time_offset']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-s4c", description="Time-splitting Dirac solvers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--metrics-file", default=None, help="write Prometheus text metrics here on exit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evolve a config and write snapshots plus a summary")
    run.add_argument("config")
    run.set_defaults(handler=cmd_run)

    convergence = sub.add_parser("convergence", help="tau-ladder convergence study")
    convergence.add_argument("config")
    convergence.add_argument("--frozen", action="store_true", help="sample every potential factor at t_n")
    convergence.set_defaults(handler=cmd_convergence)

    klein = sub.add_parser("klein", help="Klein step transmission run or sweep")
    klein.add_argument("config")
    klein.set_defaults(handler=cmd_klein)

    check = sub.add_parser("commutator-check", help="closed-form double commutator against brute force")
    check.add_argument("config", nargs="?")
    check.add_argument("--zero", action="store_true", help="use the zero potential")
    check.set_defaults(handler=cmd_commutator_check)

    plan = sub.add_parser("plan", help="print a scheme's factors and time offsets")
    plan.add_argument("scheme")
    plan.add_argument("--frozen", action="store_true")
    plan.set_defaults(handler=cmd_plan)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(settings.log_level, json=settings.log_json)

    try:
        code = args.handler(args)
    except DiracError as exc:
        ERROR_COUNT.labels(error_type=type(exc).__name__).inc()
        logger.error("command_failed", command=args.command, error_type=type(exc).__name__, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        code = 2 if isinstance(exc, USAGE_ERRORS) else 1
    except Exception:
        logger.exception("command_crashed", command=args.command)
        raise
    finally:
        metrics_file = args.metrics_file or settings.metrics_file
        if metrics_file:
            export_metrics(metrics_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
