"""Score the bundled tennis data and diff it against a reference CSV.

    python scripts/reproduce_tennis.py [--reference tests/data/tennis_reference.csv] [--tol 1e-4]

Prints one line per player with the largest absolute deviation over all
reference columns, flags rows outside the tolerance, and exits 1 if any are.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from robustdea.instances import tennis_dataset
from robustdea.report import score_dataset
from robustdea.scores import CommonBernoulli, CommonUniform, ExpertBernoulli, MaxEntropy

EXPERT = (0.4, 0.8, 0.8, 1.0, 0.8, 0.8, 0.8, 0.8, 1.0)
GRID = [round(0.1 * k, 12) for k in range(1, 11)]
DEFAULT_REF = Path(__file__).resolve().parent.parent / "tests" / "data" / "tennis_reference.csv"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reference", default=str(DEFAULT_REF))
    ap.add_argument("--tol", type=float, default=1e-4)
    args = ap.parse_args(argv)

    with open(args.reference, newline="") as fh:
        ref = {r["dmu"]: {k: float(v) for k, v in r.items() if k != "dmu"} for r in csv.DictReader(fh)}
    ds = tennis_dataset()
    models = [ExpertBernoulli(EXPERT), CommonUniform(), MaxEntropy()] + [CommonBernoulli(g) for g in GRID]
    t0 = time.perf_counter()
    rep = score_dataset(ds, models)
    elapsed = time.perf_counter() - t0

    cols = ["expert_e", "uniform_e", "entropy_e"]
    sd_cols = ["expert_sd", "uniform_sd", "entropy_sd"]
    bad = 0
    for j, dmu in enumerate(ds.dmu_names):
        ours = dict(zip(cols, rep.expected[j, :3]))
        ours.update(zip(sd_cols, rep.std_dev[j, :3]))
        ours.update({f"pbar_{g:.1f}": rep.expected[j, 3 + k] for k, g in enumerate(GRID)})
        devs = {c: abs(ours[c] - ref[dmu][c]) for c in ours}
        col = max(devs, key=devs.get)
        flag = devs[col] > args.tol
        bad += flag
        print(f"{'!!' if flag else 'ok'} {dmu:24s} max |diff| {devs[col]:.2e} ({col}: "
              f"{ours[col]:.5f} vs {ref[dmu][col]:.5f})")
    lps = rep.total_stats.lps_solved
    print(f"\n{len(ds.dmu_names) - bad}/{len(ds.dmu_names)} players within {args.tol:g}; "
          f"{lps} LPs, {elapsed:.1f}s for {len(models)} models")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
