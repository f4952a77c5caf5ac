"""Design filters for one fixed channel triple and write the per-frequency trace."""

import argparse
from pathlib import Path

from ltirelay.harness import ExperimentSpec, read_channel_file, trace_instance, write_trace
from ltirelay.objective import rate
from ltirelay.optimizer import af_baseline
from ltirelay.spectra import PowerBudget, QuadratureGrid

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--channels", type=Path, default=HERE / "fixed_channels.txt")
    p.add_argument("--ps", type=float, default=1.0)
    p.add_argument("--pr", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=Path("results/trace.csv"))
    args = p.parse_args()

    ch = read_channel_file(args.channels)
    budget = PowerBudget(args.ps, args.pr)
    spec = ExperimentSpec()
    cols, u = trace_instance(ch, budget, spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(cols, args.out)
    grid = QuadratureGrid.gauss_legendre(spec.grid_size)
    print(f"designed rate {rate(u, ch, grid, budget.sigma2):.6f} bits, "
          f"AF {af_baseline(ch, budget, grid).rate_bits:.6f} bits -> {args.out}")


if __name__ == "__main__":
    main()
