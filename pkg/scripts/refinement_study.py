#!/usr/bin/env python3
"""Refinement study for the interface constants.

Fits λ_L on the reference converging nozzle for a sequence of grid spacings
and prints, per spacing, the measured constants

    C_bernoulli = median ||∇ψ| - λ|/λ / √h
    C_smooth    = |k'(0) - g'(0)| / √h

next to λ_L. The constants should stay bounded as h shrinks; their values
are what diagnostics.bernoulli_C and diagnostics.smooth_fit_C are tuned
against.

Usage:
    python scripts/refinement_study.py
    python scripts/refinement_study.py --h 0.0625 0.03125 --L 4 --output runs/refinement.dat
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path

import numpy as np

# Add the project root to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from jetflow.core.exceptions import FitError, SolverError  # noqa: E402
from jetflow.services.diagnostics import DiagnosticInputs  # noqa: E402
from jetflow.services.freeboundary import bernoulli_error, with_gradient  # noqa: E402
from jetflow.services.jetfit import JetProblem, fit_lambda, smooth_fit_check  # noqa: E402
from jetflow.services.report_writer import write_table  # noqa: E402
from jetflow.services.verification import converging_nozzle_config  # noqa: E402

COLUMNS = ["h", "lambda_L", "bernoulli_error", "C_bernoulli", "smooth_gap", "C_smooth"]


async def measure(h: float, L: float) -> list:
    config = converging_nozzle_config(h, L)
    problem = JetProblem.from_config(config)
    result = await fit_lambda(problem)
    solution = result.solution
    lo, hi = DiagnosticInputs(problem=problem, solution=solution, config=config).window()
    curve, _ = with_gradient(solution.field, solution.curve)
    error = bernoulli_error(curve, solution.lam, lo, hi)
    fit = smooth_fit_check(solution, problem.geometry, config.fit.extrapolation_columns)
    root = np.sqrt(h)
    return [
        h,
        solution.lam,
        np.nan if error is None else error,
        np.nan if error is None else error / root,
        np.nan if fit.gap is None else fit.gap,
        np.nan if fit.gap is None else fit.gap / root,
    ]


async def refinement_study(spacings: list, L: float) -> np.ndarray:
    rows = []
    for h in sorted(spacings, reverse=True):
        try:
            rows.append(await measure(h, L))
        except (FitError, SolverError) as e:
            print(f"  h={h:g}: fit failed ({e})")
            continue
        print("  " + "  ".join(f"{name}={value:.5g}" for name, value in zip(COLUMNS, rows[-1])))
    return np.array(rows)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, nargs="+", default=[1 / 16, 1 / 32, 1 / 64])
    parser.add_argument("--L", type=float, default=6.0)
    parser.add_argument("--output", type=Path, default=None, help="write the table to this file")
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    print("=" * 60)
    print(f"Refinement study on the converging nozzle, L={args.L:g}")
    print("=" * 60)
    rows = asyncio.run(refinement_study(args.h, args.L))
    if rows.size == 0:
        return 1
    if args.output is not None:
        write_table(args.output, COLUMNS, rows)
        print(f"\nTable written to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
