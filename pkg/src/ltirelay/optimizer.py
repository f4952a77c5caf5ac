"""Projected-subgradient design of FIR source and relay filters.

The production loop alternates a normalized (or level-shifted Polyak)
subgradient step on ``phi = -rate`` with the two-step projection: ball in
``t``, then the relay ellipsoid of the projected ``t`` in ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateChannel
from .objective import DesignPoint, RateReport, rate, rate_and_gradient
from .projections import (
    _two_step,
    project_ball,
    project_ellipsoid,
    project_xi,
    relay_form,
)
from .spectra import ChannelTriple, PowerBudget, QuadratureGrid

__all__ = [
    "OptimizerConfig",
    "OptimizerTrace",
    "design",
    "step_length",
    "af_design",
    "af_baseline",
    "initial_point",
    "max_violation",
]

STEP_MODES = ("normalized", "polyak_level")
ALGORITHMS = ("two_step", "xi_reference")
INITS = ("full_relay", "flat", "af")

# Channels whose taps are all below this magnitude are treated as absent.
DEGENERATE_TAP = 1e-15


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the design loop.

    ``step_scale`` multiplies the ``1/sqrt(n)`` schedule.  ``level_slack``
    (polyak_level mode only) defaults to ``0.1 |phi(u0)|``.
    """

    max_iters: int = 1000
    rel_tol: float = 1e-5
    step_mode: str = "normalized"
    step_scale: float = 1.0
    level_slack: Optional[float] = None
    strictly_causal: bool = False
    algorithm: str = "two_step"
    init: str = "full_relay"
    deterministic: bool = True
    xi_samples: Optional[int] = None
    xi_sweeps: int = 20

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.step_mode not in STEP_MODES:
            raise ValueError(f"step_mode must be one of {STEP_MODES}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")
        if not self.step_scale > 0:
            raise ValueError("step_scale must be > 0")
        if self.step_mode == "polyak_level" and self.step_scale >= 2:
            raise ValueError("polyak_level needs mu_n in (0, 2)")

    def mu(self, n: int) -> float:
        return self.step_scale / math.sqrt(n)


@dataclass
class OptimizerTrace:
    """Per-iteration records, one entry per evaluated iterate.

    The point reached by the last step is recorded too (with ``step = 0``).
    """

    rate: list = field(default_factory=list)
    best_rate: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    source_power: list = field(default_factory=list)
    relay_power: list = field(default_factory=list)
    step: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rate)

    def append(self, rate_, best, gnorm, ps, pr, step):
        self.rate.append(rate_)
        self.best_rate.append(best)
        self.grad_norm.append(gnorm)
        self.source_power.append(ps)
        self.relay_power.append(pr)
        self.step.append(step)

    def as_array(self) -> np.ndarray:
        return np.column_stack(
            [
                self.rate,
                self.best_rate,
                self.grad_norm,
                self.source_power,
                self.relay_power,
                self.step,
            ]
        )


def step_length(
    mode: str,
    n: int,
    phi_n: float,
    grad_norm: float,
    level: float = 0.0,
    step_scale: float = 1.0,
) -> float:
    """Multiplier ``s_n`` of the gradient in ``u - s_n phi'(u)``.

    ``polyak_level``: ``mu_n max(phi_n - level, 0) / ||phi'||^2``;
    ``normalized``: ``mu_n / ||phi'||`` (a step of length ``mu_n``), with
    ``mu_n = step_scale / sqrt(n)``.
    """
    if grad_norm <= 0:
        raise ValueError("grad_norm must be > 0")
    mu = step_scale / math.sqrt(n)
    if mode == "polyak_level":
        return mu * max(phi_n - level, 0.0) / grad_norm**2
    if mode == "normalized":
        return mu / grad_norm
    raise ValueError(f"unknown step mode {mode!r}")


def max_violation(trace: "OptimizerTrace", budget: PowerBudget) -> float:
    """Largest relative excess over either power budget along ``trace``."""
    if len(trace) == 0:
        return 0.0
    ps = np.asarray(trace.source_power) / budget.p_s - 1.0
    pr = np.asarray(trace.relay_power) / budget.p_r - 1.0
    return float(max(0.0, ps.max(), pr.max()))


def _check_channels(ch: ChannelTriple):
    if ch.max_abs_tap() < DEGENERATE_TAP:
        raise DegenerateChannel("all three channels are identically zero")


def _unit(n: int, k: int, value: float) -> np.ndarray:
    v = np.zeros(n)
    v[k] = value
    return v


def _af_gain(ch, budget, grid, relay_order=1, n_grid=401):
    """Best one-tap gain for a white source; search over ``[-d_max, d_max]``."""
    t = np.array([np.sqrt(budget.p_s)])
    ell = relay_form(t, ch, grid, budget.sigma2, budget.p_r, 1)
    d_max = math.sqrt(budget.p_r / ell.q[0, 0])

    def rate_of(d):
        return rate(DesignPoint(t, [d]), ch, grid, budget.sigma2)

    ds = np.linspace(-d_max, d_max, n_grid)
    vals = np.array([rate_of(d) for d in ds])
    k = int(np.argmax(vals))
    lo, hi = ds[max(k - 1, 0)], ds[min(k + 1, n_grid - 1)]
    best_d, best_r = ds[k], vals[k]
    if hi > lo:
        res = minimize_scalar(
            lambda d: -rate_of(d), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12 * max(1.0, d_max)},
        )
        if -res.fun > best_r:
            best_d, best_r = float(res.x), float(-res.fun)
    return best_d, d_max


def af_design(ch: ChannelTriple, budget: PowerBudget, grid: QuadratureGrid,
              source_order: int = 1, relay_order: int = 1) -> DesignPoint:
    """Instantaneous AF with a white (flat-spectrum) source.

    The source filter is ``[sqrt(P_s), 0, ...]`` and the relay a single tap
    ``d`` chosen to maximize the rate within the relay-power interval of
    that source; zero padding up to the requested orders.
    """
    d, _ = _af_gain(ch, budget, grid)
    return DesignPoint(
        _unit(source_order, 0, math.sqrt(budget.p_s)), _unit(relay_order, 0, d)
    )


def af_baseline(ch: ChannelTriple, budget: PowerBudget, grid: QuadratureGrid) -> RateReport:
    """Rate of the flat-input AF scheme (see :func:`af_design`)."""
    u = af_design(ch, budget, grid)
    ell = relay_form(u.t.taps, ch, grid, budget.sigma2, budget.p_r, 1)
    return RateReport(
        rate_bits=rate(u, ch, grid, budget.sigma2),
        source_power_used=u.t.energy(),
        relay_power_used=ell.value(u.h.taps),
        converged=True,
        iterations=0,
    )


def initial_point(ch, budget, grid, orders, cfg: OptimizerConfig):
    """Starting ``(t, h)`` before the first projection."""
    ls, lr = orders
    k0 = 1 if cfg.strictly_causal else 0
    init = cfg.init
    if init == "af" and cfg.strictly_causal:
        init = "full_relay"
    if init == "full_relay":
        t = _unit(ls, k0, math.sqrt(budget.p_s))
        h = np.ones(lr)
        h[:k0] = 0.0
        ell = relay_form(t, ch, grid, budget.sigma2, budget.p_r, lr)
        h[k0:] = project_ellipsoid(h[k0:], ell.restrict(k0))
        return t, h
    if init == "flat":
        t = np.full(ls, math.sqrt(budget.p_s / (ls - k0)))
        t[:k0] = 0.0
        return t, np.zeros(lr)
    u = af_design(ch, budget, grid, ls, lr)
    return u.t.taps.copy(), u.h.taps.copy()


def _project(t, h, ch, grid, budget, cfg: OptimizerConfig):
    if cfg.algorithm == "two_step":
        t, h, ell = _two_step(t, h, ch, grid, budget.sigma2, budget, cfg.strictly_causal)
        return t, h, ell
    t = project_ball(t, budget.p_s)
    h = project_xi(
        h, ch, grid, budget.sigma2, budget, t.size, cfg.xi_samples, cfg.xi_sweeps
    )
    return t, h, relay_form(t, ch, grid, budget.sigma2, budget.p_r, h.size)


def design(
    ch: ChannelTriple,
    budget: PowerBudget,
    orders: tuple[int, int],
    cfg: Optional[OptimizerConfig] = None,
    grid: Optional[QuadratureGrid] = None,
):
    """Run the projected-subgradient loop.

    Returns ``(best DesignPoint, RateReport, OptimizerTrace)``; the report
    describes the best-rate iterate seen, not necessarily the last one.
    """
    cfg = cfg or OptimizerConfig()
    grid = grid or QuadratureGrid.gauss_legendre()
    ls, lr = orders
    min_order = 2 if cfg.strictly_causal else 1
    if ls < min_order or lr < min_order:
        raise ValueError(f"filter orders must be >= {min_order}")
    _check_channels(ch)
    sigma2 = budget.sigma2

    t, h = initial_point(ch, budget, grid, orders, cfg)
    t, h, ell = _project(t, h, ch, grid, budget, cfg)

    trace = OptimizerTrace()
    best = (-np.inf, t, h, ell)
    level_slack = cfg.level_slack
    converged = False
    stepped = False
    iterations = 0

    def consider(value, t, h, ell):
        nonlocal best
        if value > best[0]:
            best = (value, t.copy(), h.copy(), ell)

    for n in range(1, cfg.max_iters + 1):
        value, grad = rate_and_gradient(
            np.concatenate([t, h]), ch, grid, sigma2,
            source_order=ls, deterministic=cfg.deterministic,
        )
        consider(value, t, h, ell)
        if cfg.strictly_causal:
            grad[0] = 0.0
            grad[ls] = 0.0
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            trace.append(value, best[0], gnorm, float(t @ t), ell.value(h), 0.0)
            converged = True
            stepped = False
            break

        phi = -value
        if cfg.step_mode == "polyak_level":
            if level_slack is None:
                level_slack = 0.1 * abs(phi) if phi != 0 else 1e-3
            s = step_length("polyak_level", n, phi, gnorm, -best[0] - level_slack,
                            cfg.step_scale)
        else:
            s = step_length("normalized", n, phi, gnorm, 0.0, cfg.step_scale)
        trace.append(value, best[0], gnorm, float(t @ t), ell.value(h), s * gnorm)

        t_new, h_new, ell = _project(t - s * grad[:ls], h - s * grad[ls:],
                                     ch, grid, budget, cfg)
        iterations = n
        stepped = True
        u_old = np.concatenate([t, h])
        disp = float(np.sum((np.concatenate([t_new, h_new]) - u_old) ** 2))
        t, h = t_new, h_new
        if disp <= cfg.rel_tol * float(u_old @ u_old):
            converged = True
            break

    value, grad = rate_and_gradient(np.concatenate([t, h]), ch, grid, sigma2,
                                    source_order=ls, deterministic=cfg.deterministic)
    consider(value, t, h, ell)
    if cfg.strictly_causal:
        grad[0] = grad[ls] = 0.0
    if stepped:
        # the last projected point is an iterate too
        trace.append(value, best[0], float(np.linalg.norm(grad)), float(t @ t),
                     ell.value(h), 0.0)
    best_rate, bt, bh, bell = best
    report = RateReport(
        rate_bits=float(best_rate),
        source_power_used=float(bt @ bt),
        relay_power_used=bell.value(bh),
        converged=converged,
        iterations=iterations,
    )
    return DesignPoint(bt, bh), report, trace
