"""Monte Carlo sweeps over random ISI channels and per-frequency traces.

Channels are regenerated from ``(seed, trial, channel id)`` with a
counter-based generator, so any trial can be reproduced in isolation and
the sweep result does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .flatfading import FlatChannel, lpf_design, one_tap_delayed_rate
from .optimizer import OptimizerConfig, af_design, af_baseline, design, max_violation
from .spectra import ChannelTriple, PowerBudget, QuadratureGrid, cnr_density

__all__ = [
    "CAUSAL_MODES",
    "BASELINES",
    "ExperimentSpec",
    "SweepRow",
    "TrialResult",
    "generate_channels",
    "read_channel_file",
    "run_sweep",
    "write_summary",
    "write_detail",
    "trace_instance",
    "write_trace",
]

CAUSAL_MODES = ("causal", "strictly_causal", "both")
BASELINES = ("af_flat", "one_tap", "lpf")
CHANNEL_IDS = {"sr": 0, "rd": 1, "sd": 2}

SUMMARY_HEADER = (
    "p_s", "p_r", "trials", "failed", "mean_rate", "mean_af_rate",
    "mean_strict_rate", "mean_iterations", "flat_one_tap_rate", "flat_lpf_rate",
)
DETAIL_HEADER = (
    "p_s", "p_r", "trial", "rate", "af_rate", "strict_rate", "iterations",
    "strict_iterations", "max_violation", "wall_time", "error",
)
TRACE_HEADER = (
    "omega", "omega_over_pi", "af_noise_level", "designed_noise_level",
    "designed_psd", "af_flat_psd",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


@dataclass(frozen=True)
class ExperimentSpec:
    seed: int = 0
    trials: int = 100
    variances: tuple = (1.0, 1.0, 1.0)
    channel_order: int = 5
    sweep: tuple = ((1.0, 1.0),)
    orders: tuple = (30, 20)
    causal_mode: str = "both"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    grid_size: int = 512
    baselines: tuple = ("af_flat",)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variances", tuple(float(v) for v in self.variances))
        object.__setattr__(self, "sweep", tuple((float(a), float(b)) for a, b in self.sweep))
        object.__setattr__(self, "orders", tuple(int(x) for x in self.orders))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep:
            raise ValueError("sweep must be nonempty")
        for p_s, p_r in self.sweep:
            PowerBudget(p_s, p_r)
        if len(self.variances) != 3 or any(v < 0 or not math.isfinite(v) for v in self.variances):
            raise ValueError("variances must be three finite values >= 0 (sd, sr, rd)")
        if self.channel_order < 1:
            raise ValueError("channel_order must be >= 1")
        if len(self.orders) != 2 or min(self.orders) < 1:
            raise ValueError("orders must be two positive integers (L_s, L_r)")
        if self.causal_mode not in CAUSAL_MODES:
            raise ValueError(f"causal_mode must be one of {CAUSAL_MODES}")
        if self.causal_mode != "causal" and min(self.orders) < 2:
            raise ValueError("strictly causal designs need L_s, L_r >= 2")
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        bad = set(self.baselines) - set(BASELINES)
        if bad:
            raise ValueError(f"unknown baselines {sorted(bad)}; choose from {BASELINES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def sigma2_sd(self) -> float:
        return self.variances[0]

    @property
    def sigma2_sr(self) -> float:
        return self.variances[1]

    @property
    def sigma2_rd(self) -> float:
        return self.variances[2]


@dataclass(frozen=True)
class SweepRow:
    p_s: float
    p_r: float
    mean_rate: float
    mean_af_rate: float
    mean_strict_rate: float
    trials: int
    mean_iterations: float
    mean_wall_time: float
    failed: int = 0
    flat_one_tap_rate: Optional[float] = None
    flat_lpf_rate: Optional[float] = None


@dataclass(frozen=True)
class TrialResult:
    p_s: float
    p_r: float
    trial: int
    rate: Optional[float]
    af_rate: Optional[float]
    strict_rate: Optional[float]
    iterations: Optional[int]
    strict_iterations: Optional[int]
    max_violation: Optional[float]
    wall_time: float
    error: str = ""


def generate_channels(seed: int, spec: ExperimentSpec, trial: int = 0) -> ChannelTriple:
    """Gaussian taps, independent per (seed, trial, channel); zero variance gives zeros."""
    taps = {}
    for name, cid in CHANNEL_IDS.items():
        var = getattr(spec, f"sigma2_{name}")
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, cid])))
        taps[name] = math.sqrt(var) * gen.standard_normal(spec.channel_order)
    return ChannelTriple.from_taps(taps["sr"], taps["rd"], taps["sd"])


def read_channel_file(path: Union[str, Path]) -> ChannelTriple:
    """Three non-empty lines of whitespace-separated taps: S-R, R-D, S-D."""
    lines = [ln.split("#")[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) != 3:
        raise ValueError(f"{path}: expected 3 tap lines (S-R, R-D, S-D), found {len(lines)}")
    rows = [[float(x) for x in ln.replace(",", " ").split()] for ln in lines]
    return ChannelTriple.from_taps(*rows)


def _run_trial(args) -> TrialResult:
    spec, p_s, p_r, trial = args
    start = time.perf_counter()
    grid = QuadratureGrid.gauss_legendre(spec.grid_size)
    budget = PowerBudget(p_s, p_r)
    out = dict(rate=None, af_rate=None, strict_rate=None, iterations=None,
               strict_iterations=None, max_violation=None)
    errors = []
    try:
        ch = generate_channels(spec.seed, spec, trial)
    except ValueError as exc:
        return TrialResult(p_s, p_r, trial, wall_time=time.perf_counter() - start,
                           error=f"{type(exc).__name__}: {exc}", **out)
    viol = 0.0
    if spec.causal_mode in ("causal", "both"):
        try:
            _, rep, tr = design(ch, budget, spec.orders, spec.optimizer, grid)
            out["rate"], out["iterations"] = rep.rate_bits, rep.iterations
            viol = max(viol, max_violation(tr, budget))
        except Exception as exc:  # surfaced in the error column
            errors.append(f"causal {type(exc).__name__}: {exc}")
    if spec.causal_mode in ("strictly_causal", "both"):
        cfg = replace(spec.optimizer, strictly_causal=True)
        try:
            _, rep, tr = design(ch, budget, spec.orders, cfg, grid)
            out["strict_rate"], out["strict_iterations"] = rep.rate_bits, rep.iterations
            viol = max(viol, max_violation(tr, budget))
        except Exception as exc:
            errors.append(f"strict {type(exc).__name__}: {exc}")
    try:
        out["af_rate"] = af_baseline(ch, budget, grid).rate_bits
    except Exception as exc:
        errors.append(f"af {type(exc).__name__}: {exc}")
    out["max_violation"] = viol
    return TrialResult(p_s, p_r, trial, wall_time=time.perf_counter() - start,
                       error="; ".join(errors), **out)


def _flat_equivalent(spec: ExperimentSpec) -> Optional[FlatChannel]:
    if spec.sigma2_sd <= 0:
        return None
    return FlatChannel(math.sqrt(spec.sigma2_sr / spec.sigma2_sd),
                       math.sqrt(spec.sigma2_rd / spec.sigma2_sd))


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else math.nan


def run_sweep(spec: ExperimentSpec):
    """Run every (sweep point, trial) pair; returns ``(rows, trial_results)``.

    Results are aggregated in (sweep point, trial) order regardless of the
    order in which workers finish.
    """
    tasks = [(spec, p_s, p_r, k) for p_s, p_r in spec.sweep for k in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=1))
    else:
        results = [_run_trial(t) for t in tasks]

    fc = _flat_equivalent(spec)
    grid = QuadratureGrid.gauss_legendre(spec.grid_size)
    rows = []
    for i, (p_s, p_r) in enumerate(spec.sweep):
        chunk = results[i * spec.trials:(i + 1) * spec.trials]
        budget = PowerBudget(p_s, p_r)
        one_tap = lpf = None
        if fc is not None and "one_tap" in spec.baselines:
            one_tap = one_tap_delayed_rate(fc, budget, 1, grid)
        if fc is not None and "lpf" in spec.baselines:
            lpf = lpf_design(fc, budget).rate_bits
        rows.append(SweepRow(
            p_s=p_s,
            p_r=p_r,
            mean_rate=_mean(r.rate for r in chunk),
            mean_af_rate=_mean(r.af_rate for r in chunk),
            mean_strict_rate=_mean(r.strict_rate for r in chunk),
            trials=len(chunk),
            mean_iterations=_mean(r.iterations for r in chunk),
            mean_wall_time=_mean(r.wall_time for r in chunk),
            failed=sum(1 for r in chunk if r.error),
            flat_one_tap_rate=one_tap,
            flat_lpf_rate=lpf,
        ))
    return rows, results


def _write_csv(path, header, records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([_fmt(rec[k]) for k in header])
    data = buf.getvalue()
    if path is not None:
        Path(path).write_text(data)
    return data


def write_summary(rows: Sequence[SweepRow], path=None) -> str:
    """Summary CSV text (wall time is left out so reruns compare equal)."""
    return _write_csv(path, SUMMARY_HEADER, [asdict(r) for r in rows])


def write_detail(results: Sequence[TrialResult], path=None) -> str:
    return _write_csv(path, DETAIL_HEADER, [asdict(r) for r in results])


def trace_instance(
    ch: Union[ChannelTriple, int],
    budget: PowerBudget,
    spec: Optional[ExperimentSpec] = None,
):
    """Per-frequency noise levels and PSDs of the designed and AF schemes.

    ``ch`` may be a channel triple or a trial index for
    :func:`generate_channels` under ``spec.seed``.  Returns
    ``(columns, design point)`` with ``columns`` a dict of equal-length
    arrays keyed by :data:`TRACE_HEADER`.
    """
    spec = spec or ExperimentSpec()
    if not isinstance(ch, ChannelTriple):
        ch = generate_channels(spec.seed, spec, int(ch))
    grid = QuadratureGrid.gauss_legendre(spec.grid_size)
    u, _, _ = design(ch, budget, spec.orders, spec.optimizer, grid)
    af = af_design(ch, budget, grid)
    omega = grid.nodes
    designed = 1.0 / cnr_density(ch, u.h.taps, budget.sigma2, grid)
    af_noise = 1.0 / cnr_density(ch, af.h.taps, budget.sigma2, grid)
    cols = {
        "omega": omega,
        "omega_over_pi": omega / math.pi,
        "af_noise_level": af_noise,
        "designed_noise_level": designed,
        "designed_psd": np.abs(grid.response(u.t.taps)) ** 2,
        "af_flat_psd": np.full(omega.size, af.t.energy()),
    }
    return cols, u


def write_trace(cols: dict, path=None) -> str:
    """Trace CSV; PSDs use the convention (1/2pi) int S dw = power."""
    buf = io.StringIO()
    buf.write("# psd normalization: (1/2pi) int S(w) dw = power, so a flat PSD equals P_s\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for i in range(len(cols["omega"])):
        w.writerow([_fmt(cols[k][i]) for k in TRACE_HEADER])
    data = buf.getvalue()
    if path is not None:
        Path(path).write_text(data)
    return data

