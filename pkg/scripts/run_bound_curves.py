#!/usr/bin/env python3
"""Bound-comparison curves at depth parity (30 oracle calls).

Evaluates the four methods' error bounds over the standard 60-point tau grid
with 2 chi = 4 and r = R = K + 1 = 3, using optimized node files when
present (see run_node_optimization.py) and the default alternating-integer
nodes otherwise.  Writes CSV and SVG under results/.
"""

import sys
from pathlib import Path

from mpfsim.cli import main

RESULTS = Path(__file__).resolve().parent.parent / "results"
RESULTS.mkdir(exist_ok=True)

args = [
    "bounds",
    "--methods", "ts,cw,matching,cf",
    "--chi", "2",
    "--reps", "3",
    "--csv", str(RESULTS / "bound_curves.csv"),
    "--svg", str(RESULTS / "bound_curves.svg"),
]
for kind in ("matching", "cf"):
    spec_file = RESULTS / f"optimized_{kind}.mpf"
    if spec_file.exists():
        args += [f"--{kind}-file", str(spec_file)]
sys.exit(main(args + sys.argv[1:]))
