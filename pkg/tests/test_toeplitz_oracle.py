import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ltirelay.objective import DesignPoint, rate
from ltirelay.optimizer import design
from ltirelay.spectra import ChannelTriple, PowerBudget, QuadratureGrid
from ltirelay.toeplitz_oracle import (
    FiniteBlockModel,
    convergence_report,
    filtering_matrix,
    finite_n_rate,
)

GRID = QuadratureGrid.gauss_legendre(512)


@pytest.mark.parametrize("n", [1, 7, 64])
def test_white_awgn(n):
    u = DesignPoint([math.sqrt(2.0)], [0.0])
    ch = ChannelTriple.from_taps([0.7], [1.1], [1.0])
    assert finite_n_rate(u, ch, 0.5, n) == pytest.approx(0.5 * math.log2(1 + 4.0), rel=1e-13)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3))
def test_scalar_block(sr, rd, sd, h, t):
    ch = ChannelTriple.from_taps([sr], [rd], [sd])
    u = DesignPoint([t], [h])
    expect = 0.5 * math.log2(1 + (sd + rd * h * sr) ** 2 * t * t / (rd * rd * h * h + 1))
    assert finite_n_rate(u, ch, 1.0, 1) == pytest.approx(expect, rel=1e-10, abs=1e-14)


def test_memoryless_gap_is_zero():
    ch = ChannelTriple.from_taps([0.4], [1.3], [0.9])
    u = DesignPoint([1.2], [0.6])
    for n, r, gap in convergence_report(u, ch, 1.0, [4, 16, 64], GRID):
        assert abs(gap) < 1e-10


def test_filtering_matrix_structure(rng):
    taps = rng.standard_normal(5)
    m = filtering_matrix(taps, 9)
    assert np.all(np.triu(m, 1) == 0)
    assert np.all(m[:-1, :-1] == m[1:, 1:])
    np.testing.assert_array_equal(m[:5, 0], taps)
    np.testing.assert_array_equal(filtering_matrix(taps, 3)[:, 0], taps[:3])


def test_block_model_covariances(rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 5)))
    u = DesignPoint(rng.standard_normal(4), rng.standard_normal(3))
    model = FiniteBlockModel.build(u, ch, 32)
    sx = model.sigma_x
    assert np.all(sx[:-1, :-1] == sx[1:, 1:]) and np.allclose(sx, sx.T)
    assert np.min(np.linalg.eigvalsh(sx)) > -1e-10
    noise, total = model.covariances(1.0)
    assert np.min(np.linalg.eigvalsh(total - noise)) > -1e-10


def test_gaps_shrink_for_designed_instance(rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 5)))
    u, _, _ = design(ch, PowerBudget(1.0, 1.0), (8, 6), grid=GRID)
    rows = convergence_report(u, ch, 1.0, [64, 128, 256, 512], GRID)
    gaps = [abs(g) for _, _, g in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert all(r >= 0 for _, r, _ in rows)
    assert rows[-1][1] - rows[-1][2] == pytest.approx(rate(u, ch, GRID, 1.0))


def test_guards():
    u = DesignPoint([1.0], [0.0])
    ch = ChannelTriple.flat(1.0, 1.0)
    with pytest.raises(ValueError):
        finite_n_rate(u, ch, 1.0, 0)
    with pytest.raises(ValueError):
        finite_n_rate(u, ch, 1.0, 5000)
    with pytest.raises(ValueError):
        convergence_report(u, ch, 1.0, [8, 4], GRID)
