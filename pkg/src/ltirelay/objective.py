"""Rate functional, cost, analytic cost gradient and a finite-difference oracle.

The cost is ``phi(u) = -rate(u)`` with

    rate(u) = (1/2pi) int 1/2 log2(1 + CNR(w; h) |T(w; t)|^2) dw

and ``u = [t; h]`` stacks the source taps before the relay taps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteIntegrand
from .spectra import ChannelTriple, FirFilter, QuadratureGrid, as_taps

__all__ = [
    "DesignPoint",
    "RateReport",
    "rate",
    "cost",
    "cost_gradient",
    "rate_and_gradient",
    "finite_diff_gradient",
]

_INV_2LN2 = 1.0 / (2.0 * np.log(2.0))


@dataclass(frozen=True)
class DesignPoint:
    """Source filter ``t`` and relay filter ``h``; ``u`` is ``[t; h]``."""

    t: FirFilter
    h: FirFilter

    def __post_init__(self):
        if not isinstance(self.t, FirFilter):
            object.__setattr__(self, "t", FirFilter(self.t))
        if not isinstance(self.h, FirFilter):
            object.__setattr__(self, "h", FirFilter(self.h))

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([self.t.taps, self.h.taps])

    @property
    def orders(self) -> tuple[int, int]:
        return len(self.t), len(self.h)

    @classmethod
    def from_vector(cls, u, source_order: int) -> "DesignPoint":
        u = as_taps(u)
        if not 1 <= source_order < u.size:
            raise ValueError("source_order must leave at least one relay tap")
        return cls(FirFilter(u[:source_order]), FirFilter(u[source_order:]))


@dataclass(frozen=True)
class RateReport:
    rate_bits: float
    source_power_used: float
    relay_power_used: float
    converged: bool = True
    iterations: int = 0


def _wsum(coef: np.ndarray, basis: np.ndarray, deterministic: bool) -> np.ndarray:
    # Fixed-order numpy reduction instead of BLAS when reproducibility matters.
    if deterministic:
        return np.sum(coef[:, None] * basis, axis=0)
    return coef @ basis


def _split(u, source_order):
    if isinstance(u, DesignPoint):
        return u.t.taps, u.h.taps
    if source_order is None:
        raise ValueError("source_order is required when u is a plain vector")
    u = as_taps(u)
    return u[:source_order], u[source_order:]


def rate_and_gradient(
    u,
    ch: ChannelTriple,
    grid: QuadratureGrid,
    sigma2: float,
    *,
    source_order: Optional[int] = None,
    deterministic: bool = True,
    with_gradient: bool = True,
):
    """Rate in bits and the gradient of ``phi = -rate`` w.r.t. ``[t; h]``.

    Both share one pass over the quadrature nodes.  Returns
    ``(rate, grad)``; ``grad`` is ``None`` when ``with_gradient`` is false.
    """
    t, h = _split(u, source_order)
    e_t = grid.basis(t.size)
    e_h = grid.basis(h.size)
    mw = grid.mean_weights

    with np.errstate(over="ignore", invalid="ignore"):
        big_t = e_t @ t
        big_h = e_h @ h
        g_sr = grid.response(ch.h_sr)
        g_rd = grid.response(ch.h_rd)
        g_sd = grid.response(ch.h_sd)

        cascade = g_sr * g_rd
        overall = g_sd + cascade * big_h
        num = overall.real**2 + overall.imag**2
        rd_h = g_rd * big_h
        den = sigma2 * (rd_h.real**2 + rd_h.imag**2 + 1.0)
        cnr = num / den
        psd = big_t.real**2 + big_t.imag**2
        snr = cnr * psd

    if not np.all(np.isfinite(snr)):
        raise NonFiniteIntegrand("SNR density is not finite")

    value = float(np.sum(mw * np.log1p(snr)) * _INV_2LN2)
    if not with_gradient:
        return value, None

    scale = mw * _INV_2LN2 / (1.0 + snr)
    # d|T|^2/dt_k = 2 Re(conj(T) e^{-jwk})
    grad_t = 2.0 * _wsum(scale * cnr * np.conj(big_t), e_t, deterministic).real
    # d CNR/dh = (dN/dh - CNR dD/dh) / D
    rd2 = g_rd.real**2 + g_rd.imag**2
    dcoef = np.conj(overall) * cascade - cnr * sigma2 * rd2 * np.conj(big_h)
    grad_h = 2.0 * _wsum(scale * psd / den * dcoef, e_h, deterministic).real
    return value, -np.concatenate([grad_t, grad_h])


def rate(u, ch: ChannelTriple, grid: QuadratureGrid, sigma2: float, **kw) -> float:
    """Achievable rate (bits per channel use) of the design ``u``."""
    return rate_and_gradient(u, ch, grid, sigma2, with_gradient=False, **kw)[0]


def cost(u, ch: ChannelTriple, grid: QuadratureGrid, sigma2: float, **kw) -> float:
    return -rate(u, ch, grid, sigma2, **kw)


def cost_gradient(u, ch: ChannelTriple, grid: QuadratureGrid, sigma2: float, **kw):
    """Analytic gradient of ``phi = -rate``; layout ``[d/dt; d/dh]``."""
    return rate_and_gradient(u, ch, grid, sigma2, **kw)[1]


def finite_diff_gradient(
    u,
    ch: Optional[ChannelTriple] = None,
    grid: Optional[QuadratureGrid] = None,
    sigma2: float = 1.0,
    step: float = 1e-6,
    *,
    source_order: Optional[int] = None,
    func: Optional[Callable[[np.ndarray], float]] = None,
) -> np.ndarray:
    """Central differences ``(f(u + s e_i) - f(u - s e_i)) / 2s``.

    ``f`` defaults to the cost ``phi``; pass ``func`` to difference any
    scalar function of the stacked vector instead.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    if isinstance(u, DesignPoint):
        source_order = len(u.t)
        x0 = u.u
    else:
        x0 = as_taps(u).copy()
    if func is None:
        def func(x):
            return cost(x, ch, grid, sigma2, source_order=source_order)

    out = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += step
        xm[i] -= step
        out[i] = (func(xp) - func(xm)) / (2.0 * step)
    return out
