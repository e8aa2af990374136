#!/usr/bin/env python3
"""Run the 2-D heat and advection-diffusion solver studies: per-outer inner
iteration counts with and without the circulant preconditioner, totals over
a range of sub-interval counts, and the inner-tolerance study."""

import sys

from paraopt_kit.cli import main

EXPERIMENTS = ["HeatIterationCounts", "HeatTotalIterations",
               "AdvectionIterationCounts", "GmresToleranceStudy"]

if __name__ == "__main__":
    base = sys.argv[1] if len(sys.argv) > 1 else "results"
    rc = 0
    for exp in EXPERIMENTS:
        rc = max(rc, main(["experiment", exp, "-o", f"{base}/{exp}"]))
    sys.exit(rc)
