"""Closed-form and scalar-search baselines for flat relay channels.

The flat model has ``H_sd = 1``, ``H_sr = a`` and ``H_rd = b``.  Rates are
in bits per channel use.  The ideal low-pass relay works on the half band
``[0, pi]`` using even symmetry; ``p_pass`` is the source power placed in
``[0, omega_c)`` and ``p_stop`` the remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InfeasibleBand
from .spectra import PowerBudget, QuadratureGrid

__all__ = [
    "FlatChannel",
    "LpfSolution",
    "water_fill",
    "af_optimal",
    "one_tap_delayed_rate",
    "equalizing_sweep",
    "equalizing_rate",
    "lpf_rate",
    "lpf_design",
    "lpf_classify",
    "lpf_kkt_residuals",
    "SOLUTION_TYPES",
]

_C = 1.0 / (2.0 * math.log(2.0))
SOLUTION_TYPES = ("T1_1", "T1_2", "T2", "T3")
_DUAL_TOL = 1e-10


@dataclass(frozen=True)
class FlatChannel:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("channel gains must be finite")


@dataclass(frozen=True)
class LpfSolution:
    delta: float
    omega_c: float
    p_pass: float
    p_stop: float
    lam: float
    nu: float
    eta_pass: float
    water_levels: tuple
    sol_type: str
    rate_bits: float
    relay_power: float
    relay_binds: bool


def _half_log2(x):
    return 0.5 * np.log2(1.0 + x)


def water_fill(noise, weights, power: float):
    """Allocate ``S_i = (level - noise_i)^+`` with ``sum_i weights_i S_i = power``.

    Exact (sort-based) solution of the weighted discrete problem; infinite
    noise entries never receive power.  Returns ``(S, level)``.
    """
    noise = np.asarray(noise, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if power <= 0:
        return np.zeros_like(noise), float(np.min(noise))
    order = np.argsort(noise)
    n_sorted = noise[order]
    w_sorted = weights[order]
    finite = np.isfinite(n_sorted)
    cw = np.cumsum(np.where(finite, w_sorted, 0.0))
    cwn = np.cumsum(np.where(finite, w_sorted * n_sorted, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        levels = (power + cwn) / cw
    ok = finite & (levels > n_sorted)
    k = int(np.nonzero(ok)[0][-1])
    level = float(levels[k])
    alloc = np.maximum(level - noise, 0.0)
    alloc[~np.isfinite(noise)] = 0.0
    return alloc, level


def _d_max(fc: FlatChannel, b: PowerBudget) -> float:
    return math.sqrt(b.p_r / (fc.a**2 * b.p_s + b.sigma2))


def _af_rate(fc, b, d):
    cnr = (1.0 + fc.a * fc.b * d) ** 2 / ((fc.b**2 * d**2 + 1.0) * b.sigma2)
    return float(_half_log2(cnr * b.p_s))


def af_optimal(fc: FlatChannel, budget: PowerBudget):
    """Optimal instantaneous AF gain and rate: ``d* = min(a/b, d_max)``.

    For gains of mixed sign the same bound applies to ``|d|`` with the sign
    of ``a/b``; ``b = 0`` turns the relay off.
    """
    if fc.b == 0.0:
        d = 0.0
    else:
        ratio = fc.a / fc.b
        d = math.copysign(min(abs(ratio), _d_max(fc, budget)), ratio)
    return d, _af_rate(fc, budget, d)


def _delayed_rate_at(fc, budget, delay, d, omega, mw):
    ab = fc.a * fc.b
    gain = 1.0 + 2.0 * ab * d * np.cos(omega * delay) + (ab * d) ** 2
    cnr = gain / ((fc.b**2 * d**2 + 1.0) * budget.sigma2)
    with np.errstate(divide="ignore"):
        noise = np.where(cnr > 0, 1.0 / cnr, np.inf)
    alloc, _ = water_fill(noise, mw, budget.p_s)
    return float(np.sum(mw * _half_log2(alloc * cnr)))


def one_tap_delayed_rate(
    fc: FlatChannel,
    budget: PowerBudget,
    delta_delay: int,
    grid: QuadratureGrid,
    n_gains: int = 201,
) -> float:
    """Best rate of the relay ``H(z) = d z^-delay`` with a water-filled source.

    The gain is searched over ``[0, d_max]`` (dense grid, then bounded
    refinement); the inner source spectrum is water-filled on the grid.
    """
    if delta_delay < 1:
        raise ValueError("delta_delay must be >= 1")
    omega, mw = grid.nodes, grid.mean_weights
    d_max = _d_max(fc, budget)

    def value(d):
        return _delayed_rate_at(fc, budget, delta_delay, d, omega, mw)

    ds = np.linspace(0.0, d_max, n_gains)
    vals = np.array([value(d) for d in ds])
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo, hi = ds[max(k - 1, 0)], ds[min(k + 1, n_gains - 1)]
    if hi > lo:
        res = minimize_scalar(lambda d: -value(d), bounds=(lo, hi), method="bounded")
        best = max(best, float(-res.fun))
    return best


def equalizing_sweep(fc: FlatChannel, budget: PowerBudget, n: int = 1001):
    """CNR of the equalizing-source scheme over ``d`` in ``[0, min(d_max, 1/|ab|))``."""
    ab = abs(fc.a * fc.b)
    d_hi = _d_max(fc, budget)
    if ab > 0:
        d_hi = min(d_hi, 1.0 / ab)
    d = np.linspace(0.0, d_hi, n, endpoint=False)
    cnr = (1.0 - (ab * d) ** 2) / ((fc.b**2 * d**2 + 1.0) * budget.sigma2)
    return d, cnr


def equalizing_rate(fc: FlatChannel, budget: PowerBudget, n: int = 1001):
    """Supremum of the equalizing-source rate and its maximizing gain.

    The sweep always peaks at ``d = 0``, i.e. the relay is switched off and
    the rate is that of the direct link alone.
    """
    d, cnr = equalizing_sweep(fc, budget, n)
    k = int(np.argmax(cnr))
    if d[k] != 0.0:
        raise AssertionError(f"equalizing sweep peaked at d={d[k]!r}, expected 0")
    return 0.0, float(_half_log2(budget.p_s / budget.sigma2))


# ---------------------------------------------------------------------------
# Ideal low-pass relay


def _lpf_delta(fc, budget, frac, p_pass):
    if fc.b == 0.0 or fc.a == 0.0:
        return np.zeros_like(np.asarray(p_pass, dtype=float))
    ratio = fc.a / fc.b
    cap = np.sqrt(budget.p_r / (fc.a**2 * np.asarray(p_pass) + frac * budget.sigma2))
    return np.copysign(np.minimum(abs(ratio), cap), ratio)


def _eta_pass(fc, sigma2, delta):
    return (fc.b**2 * delta**2 + 1.0) * sigma2 / (1.0 + fc.a * fc.b * delta) ** 2


def lpf_rate(fc: FlatChannel, budget: PowerBudget, omega_c: float, p_pass):
    """Two-band rate for given passband power(s), with the optimal passband gain.

    Returns ``(rate, delta)``; ``p_pass`` may be an array.
    """
    frac = omega_c / math.pi
    p_pass = np.asarray(p_pass, dtype=float)
    delta = _lpf_delta(fc, budget, frac, p_pass)
    cnr_pass = 1.0 / _eta_pass(fc, budget.sigma2, delta)
    r = frac * _half_log2(cnr_pass * p_pass / frac)
    if frac < 1.0:
        p_stop = np.maximum(budget.p_s - p_pass, 0.0)
        r = r + (1.0 - frac) * _half_log2(p_stop / ((1.0 - frac) * budget.sigma2))
    return r, delta


def _lpf_fixed(fc, budget, omega_c, n_grid):
    frac = omega_c / math.pi
    if frac >= 1.0:
        p_best = budget.p_s
    else:
        grid = np.linspace(0.0, budget.p_s, n_grid)
        vals, _ = lpf_rate(fc, budget, omega_c, grid)
        k = int(np.argmax(vals))
        p_best, r_best = float(grid[k]), float(vals[k])
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
        res = minimize_scalar(
            lambda p: -float(lpf_rate(fc, budget, omega_c, p)[0]),
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-13 * max(1.0, budget.p_s)},
        )
        if -res.fun > r_best:
            p_best = float(res.x)
    r, delta = lpf_rate(fc, budget, omega_c, p_best)
    return float(r), float(delta), p_best


def _lpf_duals(fc, budget, omega_c, delta, p_pass, p_stop, binds, tol):
    frac = omega_c / math.pi
    sigma2 = budget.sigma2
    eta = float(_eta_pass(fc, sigma2, delta))
    s_pass = p_pass / frac
    l_pass = eta + s_pass if p_pass > tol else None
    l_stop = sigma2 + p_stop / (1.0 - frac) if p_stop > tol else None
    a2d2 = fc.a**2 * delta**2
    if not binds:
        nu = 0.0
        lam = _C / l_stop if l_stop is not None else _C / l_pass
    elif l_stop is not None:
        lam = _C / l_stop
        nu = (_C / l_pass - lam) / a2d2 if l_pass is not None else 0.0
    else:
        cnr = 1.0 / eta
        ab = fc.a * fc.b
        q = fc.b**2 * delta**2 + 1.0
        dcnr = (2 * ab * (1 + ab * delta) * q - (1 + ab * delta) ** 2 * 2 * fc.b**2 * delta) / (
            q**2 * sigma2
        )
        ddelta = frac * _C * s_pass * dcnr / (1.0 + cnr * s_pass)
        nu = ddelta / (2.0 * delta * (fc.a**2 * p_pass + frac * sigma2))
        lam = _C / l_pass - nu * a2d2
    # clamp round-off; a clearly negative dual is left visible
    lam = 0.0 if abs(lam) < _DUAL_TOL else lam
    nu = 0.0 if abs(nu) < _DUAL_TOL else nu
    l1 = l_pass if l_pass is not None else (_C / (lam + nu * a2d2) if lam + nu * a2d2 > 0 else math.inf)
    l2 = l_stop if l_stop is not None else (_C / lam if lam > 0 else math.inf)
    return lam, nu, eta, (float(l1), float(l2))


def lpf_design(
    fc: FlatChannel,
    budget: PowerBudget,
    omega_c: Union[float, str] = "optimize",
    n_power_grid: int = 2001,
    n_cutoffs: int = 256,
    tol: float = 1e-9,
) -> LpfSolution:
    """Solve the ideal low-pass relay problem for one cutoff or optimize it.

    For each cutoff the passband gain follows in closed form from the
    passband power, which is found by a dense grid plus bounded scalar
    refinement.  With ``omega_c="optimize"`` the cutoff is chosen from
    ``n_cutoffs`` uniform candidates on ``(0, pi]`` and refined around the
    best one.  Dual variables are recovered from the water levels.
    """
    if isinstance(omega_c, str):
        if omega_c != "optimize":
            raise ValueError("omega_c must be a float or 'optimize'")
        cands = math.pi * np.arange(1, n_cutoffs + 1) / n_cutoffs
        scores = [_lpf_fixed(fc, budget, w, n_power_grid)[0] for w in cands]
        k = int(np.argmax(scores))
        wc, best = float(cands[k]), scores[k]
        lo = cands[k - 1] if k > 0 else 0.5 * cands[0]
        hi = cands[min(k + 1, n_cutoffs - 1)]
        if hi > lo:
            res = minimize_scalar(
                lambda w: -_lpf_fixed(fc, budget, w, n_power_grid)[0],
                bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
            )
            if -res.fun > best:
                wc = float(res.x)
        omega_c = wc
    omega_c = float(omega_c)
    if not omega_c > 0:
        raise InfeasibleBand(f"cutoff must be in (0, pi], got {omega_c}")
    omega_c = min(omega_c, math.pi)

    rate_bits, delta, p_pass = _lpf_fixed(fc, budget, omega_c, n_power_grid)
    frac = omega_c / math.pi
    p_stop = 0.0 if frac >= 1.0 else max(budget.p_s - p_pass, 0.0)
    p_pass = budget.p_s - p_stop
    relay_power = delta**2 * (fc.a**2 * p_pass + frac * budget.sigma2)
    free = abs(fc.a / fc.b) if fc.b != 0 else 0.0
    binds = delta != 0.0 and abs(delta) < free * (1.0 - 1e-10)
    lam, nu, eta, levels = _lpf_duals(
        fc, budget, omega_c, delta, p_pass, p_stop, binds, tol * budget.p_s
    )
    sol = LpfSolution(
        delta=delta,
        omega_c=omega_c,
        p_pass=p_pass,
        p_stop=p_stop,
        lam=lam,
        nu=nu,
        eta_pass=eta,
        water_levels=levels,
        sol_type="",
        rate_bits=rate_bits,
        relay_power=float(relay_power),
        relay_binds=bool(binds),
    )
    return replace(sol, sol_type=lpf_classify(sol, tol * budget.p_s))


def lpf_classify(sol: LpfSolution, tol: float = 1e-9) -> str:
    """Solution type by stopband power use and relay-power saturation."""
    if sol.p_stop <= tol:
        return "T1_2" if sol.relay_binds else "T1_1"
    return "T3" if sol.relay_binds else "T2"


def lpf_kkt_residuals(sol: LpfSolution, fc: FlatChannel, budget: PowerBudget,
                      tol: float = 1e-9) -> dict:
    """Residuals of the KKT conditions at ``sol`` (all ~0 at a stationary point)."""
    frac = sol.omega_c / math.pi
    sigma2 = budget.sigma2
    delta = sol.delta
    a2d2 = fc.a**2 * delta**2
    out = {}
    denom = sol.lam + sol.nu * a2d2
    if sol.p_pass > tol:
        out["passband_level"] = (sol.eta_pass + sol.p_pass / frac) - _C / denom
    if frac < 1.0:
        if sol.p_stop > tol:
            out["stopband_level"] = (sigma2 + sol.p_stop / (1 - frac)) - _C / sol.lam
        else:
            out["stopband_dry"] = max(0.0, _C / sol.lam - sigma2) if sol.lam > 0 else math.inf
    if delta != 0.0:
        ab = fc.a * fc.b
        q = fc.b**2 * delta**2 + 1.0
        cnr = 1.0 / sol.eta_pass
        dcnr = (2 * ab * (1 + ab * delta) * q - (1 + ab * delta) ** 2 * 2 * fc.b**2 * delta) / (
            q**2 * sigma2
        )
        s_pass = sol.p_pass / frac
        out["gain_stationarity"] = frac * _C * s_pass * dcnr / (1.0 + cnr * s_pass) - (
            2.0 * sol.nu * delta * (fc.a**2 * sol.p_pass + frac * sigma2)
        )
    out["relay_slackness"] = sol.nu * (sol.relay_power - budget.p_r)
    out["source_power"] = sol.p_pass + sol.p_stop - budget.p_s
    return out
