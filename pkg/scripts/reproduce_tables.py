#!/usr/bin/env python3
"""
Run the full-scale convergence ladders and write them in the CLI's CSV format.

Minutes-scale; intended for occasional regression runs, not CI.

Usage:
    python scripts/reproduce_tables.py [--table 1|2|all] [--out-dir results]
"""
import argparse
import sys
from pathlib import Path

# Add project root to path so diracsim is importable
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from diracsim.experiments import convergence_study, honeycomb_setup, td1d_setup
from diracsim.logging_config import configure_logging
from diracsim.main import write_convergence_csv

LADDER = [1 / 2 ** k for k in range(1, 8)]


def table_1(out_dir: Path):
    setup = td1d_setup(a=-64.0, b=64.0, h=1 / 64, t_max=5.0)
    reports = convergence_study(setup, ["s1", "s2", "s4", "s4c", "s4rk"], LADDER, reference_tau=2.0 ** -17)
    path = out_dir / "table1_td1d.csv"
    write_convergence_csv(path, reports, 5.0)
    return path


def table_2(out_dir: Path):
    paths = []
    for case in (1, 2, 3):
        setup = honeycomb_setup(case, a=-25.0, b=25.0, h=1 / 16, t_max=3.0)
        reports = convergence_study(setup, ["s4c"], LADDER, reference_tau=2.0 ** -14)
        path = out_dir / f"table2_honeycomb_case{case}.csv"
        write_convergence_csv(path, reports, 3.0)
        paths.append(path)
    return paths


def main() -> int:
    parser = argparse.ArgumentParser(description="Reproduce the 1D scheme table and the 2D honeycomb tables")
    parser.add_argument("--table", choices=["1", "2", "all"], default="all")
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    configure_logging("INFO", json=False)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.table in ("1", "all"):
        print(f"wrote {table_1(out_dir)}")
    if args.table in ("2", "all"):
        for path in table_2(out_dir):
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
