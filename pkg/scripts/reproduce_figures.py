#!/usr/bin/env python3
"""Run the four bundled closed-loop experiments and collect their artifacts.

Each run writes <name>.trajectory.csv, <name>.fits.csv, and <name>.svg into
the output directory (default: out/, override with --out or UESLAB_OUT).
"""

import argparse
import os
import sys

from ueslab.cli import main

RUNS = ["fig2_nominal_a", "fig2_nominal_b", "fig3_asymptotic_ues", "exponential_ues"]


def run_all() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", help="output directory (overrides UESLAB_OUT)")
    args = parser.parse_args()
    if args.out:
        os.environ["UESLAB_OUT"] = args.out
    for name in RUNS:
        code = main(["run", name])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run_all())
