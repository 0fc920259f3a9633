"""Regenerate the bundled toy fixtures.

Ten regions joined by a small tract graph, and sixteen subjects whose
signals are correlated (r = 0.6) only within regions 5, 6 and 7. Run from
the repository root; the files land in ``src/neurohotnet/data/toy``.
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "neurohotnet" / "data" / "toy"

LABELS = ["PreCG.L", "PreCG.R", "SFGdor.L", "SFGdor.R", "ORBsup.L",
          "ORBsup.R", "MFG.L", "MFG.R", "IFGoperc.L", "IFGoperc.R"]
# 1-based region pairs and tract counts
EDGES = [(1, 2, 1), (1, 3, 1), (1, 4, 1), (1, 8, 1), (1, 9, 1), (1, 10, 1),
         (2, 3, 2), (3, 4, 1), (4, 5, 1), (5, 6, 2), (5, 7, 1), (6, 7, 1),
         (8, 9, 1)]
PLANTED = [4, 5, 6]
N_SUBJECTS, FRAMES = 16, 60


def write(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABELS)
        w.writerows(rows)


w = np.zeros((10, 10))
for a, b, c in EDGES:
    w[a - 1, b - 1] = w[b - 1, a - 1] = c
write(OUT / "structure.csv", [[f"{x:g}" for x in r] for r in w])

corr = np.eye(10)
for i in PLANTED:
    for j in PLANTED:
        if i != j:
            corr[i, j] = 0.6
factor = np.linalg.cholesky(corr)
rng = np.random.default_rng(20240611)
for s in range(N_SUBJECTS):
    x = 9600 + 400 * rng.standard_normal((FRAMES, 10)) @ factor.T
    write(OUT / "subjects" / f"sub{s + 1:02d}.csv",
          [[f"{v:.3f}" for v in r] for r in x])
print(f"wrote {N_SUBJECTS} subjects to {OUT}")
