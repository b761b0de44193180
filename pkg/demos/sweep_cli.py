"""
Grid sweeps from the command line
=================================

The ``privdsgd`` entry point runs the same experiments as the library and
writes CSV trajectories plus JSON sidecars. This script drives it in-process.
"""

# %%
# Sweep quantizer step and noise exponent
# ---------------------------------------

import csv
import tempfile
from pathlib import Path

import numpy as np

from privdsgd.cli import main

out = Path(tempfile.mkdtemp())
main(["sweep", "--config", "reference_5node", "--out", str(out), "--jobs", "2"])

# %%
# Summarise the index
# -------------------

rows = list(csv.DictReader((out / "index.csv").open()))
cells = {}
for r in rows:
    cells.setdefault((r["privacy.sigma_exp"], r["quantizer.delta"]), []).append(float(r["final_gap"]))
for (sigma, delta), gaps in sorted(cells.items(), key=lambda kv: (float(kv[0][0]), float(kv[0][1]))):
    print(f"sigma={float(sigma):+.1f} delta={float(delta):>4}: median final gap {np.median(gaps):.2e}")

# %%
# Tail and complexity report over every trajectory written.

main(["analyze", str(out), "--eta", "1e-3", "--out", str(out / "analysis.json")])
