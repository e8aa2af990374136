#!/usr/bin/env python3
"""Sweep the convergence-factor bound over the (sigma_hat, gamma_hat) plane
for all six propagator pairings and write one contour CSV per panel."""

import sys

from paraopt_kit.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/bound_contours"
    sys.exit(main(["experiment", "BoundContours", "-o", out]))
