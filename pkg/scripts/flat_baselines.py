"""AF, delayed one-tap relaying and the equalizing source filter on a flat channel."""

import argparse
import csv
from pathlib import Path

import numpy as np

from ltirelay.flatfading import FlatChannel, af_optimal, equalizing_rate, one_tap_delayed_rate
from ltirelay.spectra import PowerBudget, QuadratureGrid


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--delays", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--out", type=Path, default=Path("results/flat_baselines.csv"))
    args = p.parse_args()

    fc = FlatChannel(args.a, args.b)
    grid = QuadratureGrid.gauss_legendre()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "af_gain", "af_rate", "equalizing_rate"]
                   + [f"one_tap_delay{d}" for d in args.delays])
        for pw in np.geomspace(0.01, 100.0, 21):
            budget = PowerBudget(pw, pw)
            d, r_af = af_optimal(fc, budget)
            row = [pw, d, r_af, equalizing_rate(fc, budget)[1]]
            row += [one_tap_delayed_rate(fc, budget, k, grid) for k in args.delays]
            w.writerow([f"{v:.9g}" for v in row])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
