import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ltirelay.errors import NonFiniteIntegrand
from ltirelay.spectra import (
    ChannelTriple,
    FirFilter,
    PowerBudget,
    QuadratureGrid,
    cnr_density,
    cnr_terms,
    freq_response,
    integrate,
    source_autocorrelation,
)

taps_strategy = arrays(
    np.float64,
    st.integers(1, 64),
    elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False),
)


@given(taps_strategy)
def test_parseval(taps):
    grid = QuadratureGrid.gauss_legendre(512)
    energy = float(taps @ taps)
    val = integrate(grid, np.abs(grid.response(taps)) ** 2)
    assert val == pytest.approx(energy, rel=1e-10, abs=1e-12)


def test_weights_sum_to_two_pi(grid):
    assert grid.weights.sum() == pytest.approx(2 * math.pi, rel=1e-14)
    assert grid.count == 512
    assert np.all(np.abs(grid.nodes) < math.pi)


def test_integrate_constant_and_cosine(grid):
    assert integrate(grid, lambda w: np.full_like(w, 3.0)) == pytest.approx(3.0, rel=1e-13)
    assert abs(integrate(grid, np.cos)) < 1e-13
    assert integrate(grid, lambda w: np.cos(w) ** 2) == pytest.approx(0.5, rel=1e-12)


def test_integrate_rejects_nonfinite(grid):
    vals = np.ones(grid.count)
    vals[7] = np.nan
    with pytest.raises(NonFiniteIntegrand):
        integrate(grid, vals)


def test_freq_response_scalar_and_array():
    f = FirFilter([1.0, 2.0, -0.5])
    assert freq_response(f, 0.0) == pytest.approx(2.5)
    assert freq_response(f, math.pi) == pytest.approx(1.0 - 2.0 - 0.5)
    w = np.array([0.3, -1.1])
    expect = [sum(c * np.exp(-1j * x * k) for k, c in enumerate(f.taps)) for x in w]
    np.testing.assert_allclose(f.response(w), expect, rtol=1e-14)


def test_grid_response_matches_freq_response(grid):
    taps = np.array([0.2, -1.0, 0.7, 0.05])
    np.testing.assert_allclose(grid.response(taps), freq_response(taps, grid.nodes), atol=1e-13)


def test_fir_filter_is_frozen_and_validated():
    f = FirFilter([1.0, 2.0])
    with pytest.raises(ValueError):
        f.taps[0] = 3.0
    with pytest.raises(ValueError):
        FirFilter([])
    with pytest.raises(ValueError):
        FirFilter([1.0, np.inf])
    assert f.energy() == 5.0 and len(f) == 2


def test_channel_triple_requires_equal_orders():
    with pytest.raises(ValueError):
        ChannelTriple.from_taps([1.0, 2.0], [1.0], [1.0])
    ch = ChannelTriple.flat(1.0, 2.0)
    assert ch.order == 1 and ch.max_abs_tap() == 2.0


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, 0), (1, math.inf, 1)])
def test_power_budget_validation(bad):
    with pytest.raises(ValueError):
        PowerBudget(*bad)


def test_grid_validation():
    x, w = np.polynomial.legendre.leggauss(8)
    with pytest.raises(ValueError):
        QuadratureGrid(math.pi * x, w)  # weights sum to 2, not 2*pi
    with pytest.raises(ValueError):
        QuadratureGrid(math.pi * x[::-1], math.pi * w)


def test_cnr_flat_example():
    # a=1, b=2, h=0.5: |1 + 1*0.5*2|^2 / (|2*0.5|^2 + 1) = 4/2
    ch = ChannelTriple.flat(1.0, 2.0)
    assert cnr_density(ch, [0.5], 1.0, 0.37) == pytest.approx(2.0)
    num, den = cnr_terms(ch, [0.5], 2.0, np.array([0.0, 1.0]))
    np.testing.assert_allclose(num, [4.0, 4.0])
    np.testing.assert_allclose(den, [4.0, 4.0])


def test_cnr_relay_off_is_direct_link(grid, rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 5)))
    cnr = cnr_density(ch, [0.0], 1.5, grid)
    np.testing.assert_allclose(cnr, np.abs(grid.response(ch.h_sd)) ** 2 / 1.5, rtol=1e-12)


@given(taps_strategy, st.integers(-70, 70))
def test_autocorrelation_matches_numpy(taps, k):
    full = np.correlate(taps, taps, mode="full")
    mid = taps.size - 1
    expect = full[mid + k] if abs(k) < taps.size else 0.0
    assert source_autocorrelation(taps, k) == pytest.approx(expect, abs=1e-9)
