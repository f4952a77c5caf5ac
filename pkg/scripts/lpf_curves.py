"""Ideal low-pass relay versus AF on a flat channel, for fixed and optimized cutoffs."""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from ltirelay.flatfading import FlatChannel, af_optimal, lpf_design
from ltirelay.spectra import PowerBudget


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--pmin", type=float, default=1e-3)
    p.add_argument("--pmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out", type=Path, default=Path("results/lpf_curves.csv"))
    args = p.parse_args()

    fc = FlatChannel(args.a, args.b)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "af_rate", "lpf_03pi", "type_03pi", "lpf_06pi", "type_06pi",
                    "lpf_opt", "omega_c_opt_over_pi", "type_opt"])
        for pw in np.geomspace(args.pmin, args.pmax, args.points):
            budget = PowerBudget(pw, pw)
            s3 = lpf_design(fc, budget, 0.3 * math.pi)
            s6 = lpf_design(fc, budget, 0.6 * math.pi)
            so = lpf_design(fc, budget)
            w.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in (
                float(pw), af_optimal(fc, budget)[1], s3.rate_bits, s3.sol_type,
                s6.rate_bits, s6.sol_type, so.rate_bits, so.omega_c / math.pi, so.sol_type)])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
