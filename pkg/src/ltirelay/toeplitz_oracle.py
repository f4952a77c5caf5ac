"""Finite-block mutual information with Toeplitz filtering matrices.

An independent check on the frequency-domain rate: for block length ``n``,

    I_n = (1/2n) [log2 det(N + G Sx G^T) - log2 det(N)]

with ``G = H_sd + H_rd H H_sr`` and ``N = sigma2 (H_rd H H^T H_rd^T + I)``.
Filtering matrices are lower-triangular Toeplitz (zero initial state) and
``Sx`` is the stationary autocorrelation matrix of the source filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, toeplitz

from .errors import NumericalRankLoss
from .objective import DesignPoint, rate
from .spectra import ChannelTriple, QuadratureGrid, as_taps, source_autocorrelation

__all__ = [
    "MAX_BLOCK",
    "FiniteBlockModel",
    "filtering_matrix",
    "finite_n_rate",
    "convergence_report",
]

MAX_BLOCK = 4096


def filtering_matrix(taps, n: int) -> np.ndarray:
    """``n x n`` lower-triangular Toeplitz convolution matrix of ``taps``."""
    taps = as_taps(taps)
    col = np.zeros(n)
    m = min(n, taps.size)
    col[:m] = taps[:m]
    return toeplitz(col, np.zeros(n))


def _autocorr_matrix(t, n: int) -> np.ndarray:
    t = as_taps(t)
    r = np.array([source_autocorrelation(t, k) for k in range(min(n, t.size))])
    col = np.zeros(n)
    col[: r.size] = r
    return toeplitz(col)


@dataclass(frozen=True)
class FiniteBlockModel:
    """Matrices of the length-``n`` block model."""

    n: int
    sigma_x: np.ndarray
    h_relay: np.ndarray
    h_sr: np.ndarray
    h_rd: np.ndarray
    h_sd: np.ndarray

    @classmethod
    def build(cls, u: DesignPoint, ch: ChannelTriple, n: int) -> "FiniteBlockModel":
        if n < 1:
            raise ValueError("n must be >= 1")
        if n > MAX_BLOCK:
            raise ValueError(f"n={n} exceeds the dense-algebra guard {MAX_BLOCK}")
        return cls(
            n=n,
            sigma_x=_autocorr_matrix(u.t.taps, n),
            h_relay=filtering_matrix(u.h.taps, n),
            h_sr=filtering_matrix(ch.h_sr, n),
            h_rd=filtering_matrix(ch.h_rd, n),
            h_sd=filtering_matrix(ch.h_sd, n),
        )

    def covariances(self, sigma2: float):
        """``(N, N + G Sx G^T)`` as symmetric arrays."""
        rd_h = self.h_rd @ self.h_relay
        g = self.h_sd + rd_h @ self.h_sr
        noise = sigma2 * (rd_h @ rd_h.T + np.eye(self.n))
        total = noise + g @ self.sigma_x @ g.T
        return noise, total


def _logdet2(m: np.ndarray) -> float:
    asym = np.max(np.abs(m - m.T))
    scale = max(1.0, float(np.max(np.abs(m))))
    if asym > 1e-12 * scale:
        raise NumericalRankLoss(f"matrix asymmetry {asym:.3g} exceeds tolerance")
    m = 0.5 * (m + m.T)
    try:
        c = cholesky(m, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalRankLoss(str(exc)) from exc
    return 2.0 * float(np.sum(np.log2(np.diag(c))))


def finite_n_rate(u: DesignPoint, ch: ChannelTriple, sigma2: float, n: int) -> float:
    """Block mutual information per channel use, in bits."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    model = FiniteBlockModel.build(u, ch, n)
    noise, total = model.covariances(sigma2)
    return (_logdet2(total) - _logdet2(noise)) / (2.0 * n)


def convergence_report(u: DesignPoint, ch: ChannelTriple, sigma2: float, ns, grid: QuadratureGrid):
    """Rows ``(n, finite_n_rate, finite_n_rate - rate(u))`` for each ``n`` in ``ns``."""
    ns = [int(n) for n in ns]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be a nonempty ascending list")
    limit = rate(u, ch, grid, sigma2)
    rows = []
    for n in ns:
        r = finite_n_rate(u, ch, sigma2, n)
        rows.append((n, r, r - limit))
    return rows
