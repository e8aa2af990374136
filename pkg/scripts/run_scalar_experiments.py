#!/usr/bin/env python3
"""Run the scalar model-problem studies: coarse-timestep sweep, the two
reference convergence cases with fitted rates, and weak scaling in the
number of sub-intervals."""

import sys

from paraopt_kit.cli import main

EXPERIMENTS = ["ScalarTimestepSweep", "ScalarConvergenceAB",
               "ScalarWeakScaling", "TcFotdVsFdto"]

if __name__ == "__main__":
    base = sys.argv[1] if len(sys.argv) > 1 else "results"
    rc = 0
    for exp in EXPERIMENTS:
        rc = max(rc, main(["experiment", exp, "-o", f"{base}/{exp}"]))
    sys.exit(rc)
