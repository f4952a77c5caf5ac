"""Frequency responses, CNR densities and integration over [-pi, pi].

Conventions
-----------
A real FIR filter with taps ``x[0..m-1]`` has response
``X(e^{jw}) = sum_k x[k] e^{-jwk}``.  Spectra are normalized so that the
average ``(1/2pi) int S(w) dw`` equals the power, hence a flat source
spectrum of power ``P`` has PSD ``P`` at every frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import NonFiniteIntegrand

__all__ = [
    "FirFilter",
    "ChannelTriple",
    "PowerBudget",
    "QuadratureGrid",
    "freq_response",
    "cnr_terms",
    "cnr_density",
    "integrate",
    "source_autocorrelation",
    "as_taps",
]


def as_taps(x) -> np.ndarray:
    """Return ``x`` as a 1-D float array of taps (accepts FirFilter)."""
    if isinstance(x, FirFilter):
        return x.taps
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"taps must be one-dimensional, got shape {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FirFilter:
    """Real tap vector; stands for a source filter, relay filter or channel."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=float))
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("a filter needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("filter taps must be finite")
        object.__setattr__(self, "taps", _frozen(taps))

    def __len__(self) -> int:
        return self.taps.size

    def response(self, omega):
        return freq_response(self, omega)

    def energy(self) -> float:
        return float(self.taps @ self.taps)


@dataclass(frozen=True)
class ChannelTriple:
    """S-R, R-D and S-D impulse responses, all of the same order L."""

    h_sr: FirFilter
    h_rd: FirFilter
    h_sd: FirFilter

    def __post_init__(self):
        for name in ("h_sr", "h_rd", "h_sd"):
            value = getattr(self, name)
            if not isinstance(value, FirFilter):
                object.__setattr__(self, name, FirFilter(value))
        lengths = {len(self.h_sr), len(self.h_rd), len(self.h_sd)}
        if len(lengths) != 1:
            raise ValueError(f"channel orders differ: {sorted(lengths)}")

    @classmethod
    def from_taps(cls, h_sr, h_rd, h_sd) -> "ChannelTriple":
        return cls(FirFilter(h_sr), FirFilter(h_rd), FirFilter(h_sd))

    @classmethod
    def flat(cls, a: float, b: float, sd: float = 1.0) -> "ChannelTriple":
        """One-tap channels ``H_sr = a``, ``H_rd = b``, ``H_sd = sd``."""
        return cls.from_taps([a], [b], [sd])

    @property
    def order(self) -> int:
        return len(self.h_sr)

    def max_abs_tap(self) -> float:
        return float(
            max(np.max(np.abs(f.taps)) for f in (self.h_sr, self.h_rd, self.h_sd))
        )


@dataclass(frozen=True)
class PowerBudget:
    """Source power, relay power and noise variance (all > 0)."""

    p_s: float
    p_r: float
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("p_s", "p_r", "sigma2"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class QuadratureGrid:
    """Quadrature nodes/weights on [-pi, pi]; weights sum to 2*pi.

    Use :meth:`gauss_legendre` to build the default rule.  Complex
    exponential bases ``E[i, k] = exp(-j w_i k)`` are cached per column count.
    """

    nodes: np.ndarray
    weights: np.ndarray
    _bases: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be matching 1-D arrays")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly ascending")
        if nodes[0] <= -np.pi or nodes[-1] >= np.pi:
            raise ValueError("nodes must lie strictly inside (-pi, pi)")
        if abs(weights.sum() - 2 * np.pi) > 1e-12 * 2 * np.pi:
            raise ValueError("weights must sum to 2*pi")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def gauss_legendre(cls, count: int = 512) -> "QuadratureGrid":
        if count < 1:
            raise ValueError("count must be >= 1")
        x, w = np.polynomial.legendre.leggauss(count)
        return cls(np.pi * x, np.pi * w)

    @property
    def count(self) -> int:
        return self.nodes.size

    @property
    def mean_weights(self) -> np.ndarray:
        """Weights divided by 2*pi, i.e. the averaging measure."""
        cached = self._bases.get("mean")
        if cached is None:
            cached = _frozen(self.weights / (2 * np.pi))
            self._bases["mean"] = cached
        return cached

    def basis(self, m: int) -> np.ndarray:
        """``(count, m)`` matrix of ``exp(-j w_i k)`` for k = 0..m-1."""
        cached = self._bases.get(m)
        if cached is None:
            cached = np.exp(-1j * np.outer(self.nodes, np.arange(m)))
            cached.setflags(write=False)
            self._bases[m] = cached
        return cached

    def response(self, taps) -> np.ndarray:
        """Frequency response of ``taps`` at every node."""
        taps = as_taps(taps)
        return self.basis(taps.size) @ taps


def freq_response(f, omega):
    """Evaluate ``sum_k f[k] exp(-j omega k)``; ``omega`` may be an array."""
    taps = as_taps(f)
    omega = np.asarray(omega, dtype=float)
    k = np.arange(taps.size)
    out = np.exp(-1j * np.multiply.outer(omega, k)) @ taps
    return complex(out) if out.ndim == 0 else out


def _responses(ch: ChannelTriple, h, omega):
    if isinstance(omega, QuadratureGrid):
        grid = omega
        return (
            grid.response(ch.h_sr),
            grid.response(ch.h_rd),
            grid.response(ch.h_sd),
            grid.response(h),
        )
    return (
        freq_response(ch.h_sr, omega),
        freq_response(ch.h_rd, omega),
        freq_response(ch.h_sd, omega),
        freq_response(h, omega),
    )


def cnr_terms(ch: ChannelTriple, h, sigma2: float, omega):
    """Numerator ``|H_sd + H_sr H H_rd|^2`` and denominator
    ``sigma2 (|H_rd H|^2 + 1)`` of the CNR density.

    ``omega`` is a frequency, an array of frequencies, or a
    :class:`QuadratureGrid` (evaluated at its nodes).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    g_sr, g_rd, g_sd, g_h = _responses(ch, h, omega)
    num = np.abs(g_sd + g_sr * g_h * g_rd) ** 2
    den = sigma2 * (np.abs(g_rd * g_h) ** 2 + 1.0)
    return num, den


def cnr_density(ch: ChannelTriple, h, sigma2: float, omega):
    """Channel-to-noise power ratio density at ``omega``."""
    num, den = cnr_terms(ch, h, sigma2, omega)
    return num / den


Integrand = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def integrate(grid: QuadratureGrid, integrand: Integrand, axis: int = 0) -> float:
    """Approximate ``(1/2pi) int_{-pi}^{pi} f(w) dw`` on ``grid``.

    ``integrand`` is either a callable evaluated at ``grid.nodes`` or an array
    of values already sampled at the nodes (extra trailing axes are
    integrated independently).
    """
    values = integrand(grid.nodes) if callable(integrand) else integrand
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrand("integrand is not finite at every node")
    values = np.moveaxis(values, axis, -1)
    out = np.sum(values * grid.mean_weights, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def source_autocorrelation(t, k: int) -> float:
    """``r[k] = sum_n t[n] t[n-k]``; zero when ``|k| >= len(t)``."""
    taps = as_taps(t)
    k = abs(int(k))
    if k >= taps.size:
        return 0.0
    return float(taps[k:] @ taps[: taps.size - k])
