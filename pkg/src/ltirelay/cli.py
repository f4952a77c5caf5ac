"""Command-line entry point: ``python -m ltirelay`` or ``ltirelay``.

A sweep writes ``summary.csv`` and ``detail.csv`` into ``--out``; with
``--trace`` a single instance is designed and ``trace.csv`` is written
instead.  A YAML config file may hold any of the keys in ``CONFIG_KEYS``;
command-line flags override it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .harness import (
    BASELINES,
    CAUSAL_MODES,
    ExperimentSpec,
    read_channel_file,
    run_sweep,
    trace_instance,
    write_detail,
    write_summary,
    write_trace,
)
from .optimizer import INITS, STEP_MODES, OptimizerConfig
from .spectra import PowerBudget

CONFIG_KEYS = (
    "seed", "trials", "variances", "channel_order", "sweep", "ls", "lr",
    "causal_mode", "grid", "max_iters", "tol", "step_mode", "step_scale",
    "init", "baselines", "workers", "out", "trace",
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ltirelay",
        description="Design FIR source/relay filters for ISI relay channels and run sweeps.",
    )
    p.add_argument("--config", type=Path, help="YAML file with flat keys (see README)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--ps", type=float, nargs="+", help="source powers (paired with --pr)")
    p.add_argument("--pr", type=float, nargs="+", help="relay powers (paired with --ps)")
    p.add_argument("--sweep", type=float, nargs="+", metavar="P",
                   help="sweep P_s = P_r over these values")
    p.add_argument("--ls", type=int, help="source filter order")
    p.add_argument("--lr", type=int, help="relay filter order")
    p.add_argument("--channel-order", type=int)
    p.add_argument("--variances", type=float, nargs=3, metavar=("SD", "SR", "RD"))
    p.add_argument("--grid", type=int, help="quadrature nodes")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float, help="relative displacement stopping tolerance")
    p.add_argument("--step-mode", choices=STEP_MODES)
    p.add_argument("--step-scale", type=float)
    p.add_argument("--init", choices=INITS)
    p.add_argument("--causal-mode", choices=CAUSAL_MODES)
    p.add_argument("--strictly-causal", action="store_true",
                   help="shorthand for --causal-mode strictly_causal")
    p.add_argument("--baselines", nargs="+", choices=BASELINES)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--trace", metavar="CHANNELS",
                   help="channel file (3 tap lines) or a trial index to trace")
    return p


def _load_config(path: Path) -> dict:
    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping of keys to values")
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _merge(args) -> dict:
    cfg = _load_config(args.config) if args.config else {}
    flags = {
        "seed": args.seed, "trials": args.trials, "ls": args.ls, "lr": args.lr,
        "channel_order": args.channel_order, "variances": args.variances,
        "grid": args.grid, "max_iters": args.max_iters, "tol": args.tol,
        "step_mode": args.step_mode, "step_scale": args.step_scale, "init": args.init,
        "causal_mode": args.causal_mode, "baselines": args.baselines,
        "workers": args.workers, "out": args.out, "trace": args.trace,
    }
    if args.strictly_causal:
        flags["causal_mode"] = "strictly_causal"
    if args.sweep is not None:
        flags["sweep"] = [[p, p] for p in args.sweep]
    if args.ps is not None or args.pr is not None:
        ps = args.ps or args.pr
        pr = args.pr or args.ps
        if len(ps) == 1:
            ps = ps * len(pr)
        if len(pr) == 1:
            pr = pr * len(ps)
        if len(ps) != len(pr):
            raise ValueError("--ps and --pr need equal lengths (or a single value)")
        flags["sweep"] = [[a, b] for a, b in zip(ps, pr)]
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return cfg


def spec_from_config(cfg: dict) -> ExperimentSpec:
    base = ExperimentSpec()
    opt = OptimizerConfig(
        max_iters=int(cfg.get("max_iters", base.optimizer.max_iters)),
        rel_tol=float(cfg.get("tol", base.optimizer.rel_tol)),
        step_mode=cfg.get("step_mode", base.optimizer.step_mode),
        step_scale=float(cfg.get("step_scale", base.optimizer.step_scale)),
        init=cfg.get("init", base.optimizer.init),
    )
    sweep = cfg.get("sweep", base.sweep)
    sweep = [(p, p) if not isinstance(p, (list, tuple)) else tuple(p) for p in sweep]
    return ExperimentSpec(
        seed=int(cfg.get("seed", base.seed)),
        trials=int(cfg.get("trials", base.trials)),
        variances=tuple(cfg.get("variances", base.variances)),
        channel_order=int(cfg.get("channel_order", base.channel_order)),
        sweep=tuple(sweep),
        orders=(int(cfg.get("ls", base.orders[0])), int(cfg.get("lr", base.orders[1]))),
        causal_mode=cfg.get("causal_mode", base.causal_mode),
        optimizer=opt,
        grid_size=int(cfg.get("grid", base.grid_size)),
        baselines=tuple(cfg.get("baselines", base.baselines)),
        workers=int(cfg.get("workers", base.workers)),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge(args)
        spec = spec_from_config(cfg)
        out = Path(cfg.get("out", "results"))
        out.mkdir(parents=True, exist_ok=True)
        if cfg.get("trace") is not None:
            source = str(cfg["trace"])
            ch = read_channel_file(source) if Path(source).is_file() else int(source)
            p_s, p_r = spec.sweep[0]
            cols, _ = trace_instance(ch, PowerBudget(p_s, p_r), spec)
            write_trace(cols, out / "trace.csv")
            print(f"wrote {out / 'trace.csv'}")
            return 0
        rows, results = run_sweep(spec)
        write_summary(rows, out / "summary.csv")
        write_detail(results, out / "detail.csv")
        for r in rows:
            print(f"P_s={r.p_s:.4g} P_r={r.p_r:.4g} rate={r.mean_rate:.6g} "
                  f"af={r.mean_af_rate:.6g} strict={r.mean_strict_rate:.6g} "
                  f"failed={r.failed}/{r.trials}")
        print(f"wrote {out / 'summary.csv'} and {out / 'detail.csv'}")
        return 0
    except (ValueError, OSError, yaml.YAMLError) as exc:
        print(f"ltirelay: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
