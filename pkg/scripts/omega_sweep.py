#!/usr/bin/env python3
"""Practical-stability probe over the dither base frequency.

Runs the bundled omega_sweep experiment (or any config given on the command
line) and writes <name>.probe.csv with one row per (omega, trial).
"""

import argparse
import os
import sys

from ueslab.cli import main


def run() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", nargs="?", default="omega_sweep", help="config path or bundled name")
    parser.add_argument("--out", help="output directory (overrides UESLAB_OUT)")
    args = parser.parse_args()
    if args.out:
        os.environ["UESLAB_OUT"] = args.out
    return main(["sweep", args.config])


if __name__ == "__main__":
    sys.exit(run())
