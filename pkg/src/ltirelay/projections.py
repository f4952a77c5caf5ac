"""Constraint-set geometry for the joint source/relay design.

* source power: the ball ``||t||^2 <= P_s``;
* relay power: for fixed ``t`` the ellipsoid ``h^T Q(t) h <= P_r`` with
  ``Q(t) = (1/2pi) int (|H_sr|^2 |T|^2 + sigma2) Re(w w^H) dw``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc

from .errors import SingularForm
from .objective import DesignPoint
from .spectra import ChannelTriple, PowerBudget, QuadratureGrid, as_taps

__all__ = [
    "RelayEllipsoid",
    "FEASIBILITY_RTOL",
    "relay_form",
    "relay_power",
    "project_ball",
    "project_ellipsoid",
    "project_two_step",
    "project_xi",
    "sphere_samples",
]

# Constraint violations below this fraction of the bound count as feasible.
FEASIBILITY_RTOL = 1e-9


@dataclass(frozen=True)
class RelayEllipsoid:
    """The set ``{x : x^T q x <= bound}`` with ``q`` symmetric positive definite."""

    q: np.ndarray
    bound: float

    def __post_init__(self):
        q = np.array(self.q, dtype=float, copy=True)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("q must be square")
        if np.max(np.abs(q - q.T), initial=0.0) > 1e-12 * max(1.0, np.abs(q).max()):
            raise ValueError("q must be symmetric")
        if not self.bound > 0:
            raise ValueError("bound must be > 0")
        q = 0.5 * (q + q.T)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def value(self, x) -> float:
        x = as_taps(x)
        return float(x @ self.q @ x)

    def contains(self, x, rtol: float = FEASIBILITY_RTOL) -> bool:
        return self.value(x) <= self.bound * (1.0 + rtol)

    def restrict(self, start: int) -> "RelayEllipsoid":
        """The ellipsoid seen by ``x[start:]`` when the leading coordinates are 0."""
        return RelayEllipsoid(self.q[start:, start:], self.bound)


def _gram(g: np.ndarray, grid: QuadratureGrid, m: int) -> np.ndarray:
    # (1/2pi) int g(w) Re(w w^H) dw, where Re(w w^H)[k, l] = cos(w (k - l)).
    basis = grid.basis(m)
    c = basis.real
    s = basis.imag
    wg = (grid.mean_weights * g)[:, None]
    q = (c * wg).T @ c + (s * wg).T @ s
    return 0.5 * (q + q.T)


def relay_form(
    t,
    ch: ChannelTriple,
    grid: QuadratureGrid,
    sigma2: float,
    p_r: float,
    relay_order: int,
) -> RelayEllipsoid:
    """Relay-power ellipsoid in ``h`` (length ``relay_order``) induced by ``t``."""
    t = as_taps(t)
    psd = np.abs(grid.response(t)) ** 2
    g = np.abs(grid.response(ch.h_sr)) ** 2 * psd + sigma2
    return RelayEllipsoid(_gram(g, grid, relay_order), p_r)


def relay_power(t, h, ch: ChannelTriple, grid: QuadratureGrid, sigma2: float) -> float:
    """``(1/2pi) int |H|^2 (|H_sr|^2 |T|^2 + sigma2) dw`` by direct quadrature."""
    psd = np.abs(grid.response(t)) ** 2
    g = np.abs(grid.response(ch.h_sr)) ** 2 * psd + sigma2
    return float(np.sum(grid.mean_weights * np.abs(grid.response(h)) ** 2 * g))


def project_ball(t, p_s: float) -> np.ndarray:
    """Metric projection onto ``{t : ||t||^2 <= p_s}``."""
    if p_s <= 0:
        raise ValueError("p_s must be > 0")
    t = as_taps(t)
    n2 = float(t @ t)
    if n2 <= p_s:
        return t.copy()
    return np.sqrt(p_s) * t / np.sqrt(n2)


def project_ellipsoid(h, e: RelayEllipsoid, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection of ``h`` onto ``{x : x^T q x <= bound}``.

    Solves for the multiplier ``mu >= 0`` of ``x(mu) = (I + mu q)^{-1} h``
    with ``x(mu)^T q x(mu) = bound`` by Newton's method on the eigenbasis of
    ``q``, safeguarded by bisection.  The result is pulled radially onto
    the feasible side if root-finding stops marginally outside.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    h = as_taps(h)
    if h.size != e.dim:
        raise ValueError(f"h has {h.size} taps but the ellipsoid is {e.dim}-dimensional")
    lam, vecs = np.linalg.eigh(e.q)
    if not np.all(np.isfinite(lam)) or lam[0] <= 0:
        raise SingularForm(f"relay form is not positive definite (min eig {lam[0]:.3g})")
    if e.value(h) <= e.bound * (1.0 + tol):
        return h.copy()

    bound = e.bound
    z2 = (vecs.T @ h) ** 2
    lz2 = lam * z2

    def f(mu):
        r = 1.0 + mu * lam
        return np.sum(lz2 / r**2) - bound, -2.0 * np.sum(lam * lz2 / r**3)

    lo, hi = 0.0, np.sqrt(np.sum(z2) / (bound * lam[0]))
    mu = 0.0
    val, der = f(mu)
    for _ in range(200):
        if abs(val) <= tol * bound:
            break
        if val > 0:
            lo = mu
        else:
            hi = mu
        step = mu - val / der if der < 0 else hi
        mu = step if lo < step < hi else 0.5 * (lo + hi)
        val, der = f(mu)

    x = vecs @ ((vecs.T @ h) / (1.0 + mu * lam))
    cur = float(x @ e.q @ x)
    if cur > bound:
        x *= np.sqrt(bound / cur)
    return x


def _two_step(t, h, ch, grid, sigma2, budget: PowerBudget, strictly_causal=False):
    """Array-level two-step projection; returns ``(t', h', ellipsoid(t'))``."""
    t = as_taps(t).copy()
    h = as_taps(h).copy()
    if strictly_causal:
        t[0] = 0.0
        h[0] = 0.0
    t = project_ball(t, budget.p_s)
    ell = relay_form(t, ch, grid, sigma2, budget.p_r, h.size)
    if strictly_causal:
        h[1:] = project_ellipsoid(h[1:], ell.restrict(1))
    else:
        h = project_ellipsoid(h, ell)
    return t, h, ell


def project_two_step(
    u: DesignPoint,
    ch: ChannelTriple,
    grid: QuadratureGrid,
    sigma2: float,
    budget: PowerBudget,
    *,
    strictly_causal: bool = False,
) -> DesignPoint:
    """Project ``t`` onto the power ball, then ``h`` onto the ellipsoid of the new ``t``.

    With ``strictly_causal`` the leading taps are pinned to zero and the
    projection acts on the remaining coordinates only.
    """
    t, h, _ = _two_step(u.t.taps, u.h.taps, ch, grid, sigma2, budget, strictly_causal)
    return DesignPoint(t, h)


def sphere_samples(dim: int, m: int) -> np.ndarray:
    """``m`` deterministic, roughly uniform unit vectors in ``R^dim``.

    1-D alternates +-1, 2-D uses equally spaced angles, 3-D a Fibonacci
    spiral, and higher dimensions map a Halton sequence through the normal
    quantile function before normalizing.
    """
    if dim < 1 or m < 1:
        raise ValueError("dim and m must be >= 1")
    k = np.arange(m)
    if dim == 1:
        return np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    if dim == 2:
        ang = 2 * np.pi * k / m
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if dim == 3:
        z = 1.0 - (2.0 * k + 1.0) / m
        r = np.sqrt(1.0 - z**2)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    pts = qmc.Halton(d=dim, scramble=False).random(m + 1)[1:]
    g = norm.ppf(pts)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def project_xi(
    h,
    ch: ChannelTriple,
    grid: QuadratureGrid,
    sigma2: float,
    budget: PowerBudget,
    source_order: int,
    m: Optional[int] = None,
    sweeps: int = 20,
    tol: float = 1e-12,
) -> np.ndarray:
    """Cyclic projection of ``h`` onto the ellipsoids of ``m`` ball-surface points.

    Approximates the projection onto the intersection of all relay
    ellipsoids over the source-power ball.  Cost grows quickly with
    ``source_order``; meant for small orders only.
    """
    if m is None:
        m = 2 * source_order**2
    h = as_taps(h).copy()
    points = np.sqrt(budget.p_s) * sphere_samples(source_order, m)
    ells = [relay_form(p, ch, grid, sigma2, budget.p_r, h.size) for p in points]
    for _ in range(sweeps):
        if all(e.contains(h, rtol=tol) for e in ells):
            break
        for e in ells:
            h = project_ellipsoid(h, e, tol)
    return h
