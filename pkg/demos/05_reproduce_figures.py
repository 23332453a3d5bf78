"""
All four figures as CSV files
=============================

Equivalent to running ``insider-default figure1`` ... ``figure4``.
"""

import sys
from pathlib import Path

from insider_default.experiments import ExperimentSpec, run_figure

out = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
for n in (1, 2, 3, 4):
    summary = run_figure(n, ExperimentSpec(f"figure{n}", out_dir=out, svg="--svg" in sys.argv))
    print(f"figure{n}: {sorted(summary)}")
print(f"written to {out.resolve()}")
