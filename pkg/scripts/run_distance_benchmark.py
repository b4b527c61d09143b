#!/usr/bin/env python3
"""Measured operator distances across the model zoo at depth parity.

One CSV + SVG per benchmark Hamiltonian (distances and bounds over the
60-point tau grid), using optimized node files from run_node_optimization.py
when present.  The 8-qubit Hubbard plaquette and the 200-site free-fermion
run are the slow ones; select models with --models.
"""

import argparse
import sys
from pathlib import Path

from mpfsim.cli import main as cli_main

RESULTS = Path(__file__).resolve().parent.parent / "results"

MODEL_FLAGS = {
    "heisenberg": ["--model", "heisenberg", "--n", "6"],
    "anticommuting": ["--model", "anticommuting"],
    "syk": ["--model", "syk", "--syk-n", "10", "--model-seed", "7"],
    "hubbard": ["--model", "hubbard"],
    "free_fermion": ["--model", "free_fermion", "--n", "200"],
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--models",
        default="heisenberg,anticommuting,syk,free_fermion",
        help="comma-separated subset of " + ",".join(MODEL_FLAGS),
    )
    args, passthrough = parser.parse_known_args()

    RESULTS.mkdir(exist_ok=True)
    spec_args = []
    for kind in ("matching", "cf"):
        spec_file = RESULTS / f"optimized_{kind}.mpf"
        if spec_file.exists():
            spec_args += [f"--{kind}-file", str(spec_file)]

    worst = 0
    for name in args.models.split(","):
        name = name.strip()
        if name not in MODEL_FLAGS:
            print(f"unknown model {name!r}", file=sys.stderr)
            return 2
        code = cli_main(
            ["distance", "--chi", "2", "--reps", "3"]
            + MODEL_FLAGS[name]
            + spec_args
            + ["--csv", str(RESULTS / f"distance_{name}.csv")]
            + ["--svg", str(RESULTS / f"distance_{name}.svg")]
            + passthrough
        )
        print(f"{name}: exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
