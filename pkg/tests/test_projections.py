import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from ltirelay.errors import SingularForm
from ltirelay.objective import DesignPoint
from ltirelay.projections import (
    RelayEllipsoid,
    project_ball,
    project_ellipsoid,
    project_two_step,
    project_xi,
    relay_form,
    relay_power,
    sphere_samples,
)
from ltirelay.spectra import ChannelTriple, PowerBudget, QuadratureGrid

GRID = QuadratureGrid.gauss_legendre(512)


def test_ball_projection():
    np.testing.assert_allclose(project_ball([3.0, 4.0], 1.0), [0.6, 0.8])
    np.testing.assert_array_equal(project_ball([0.1, 0.2], 1.0), [0.1, 0.2])


def test_ellipsoid_diag_oracle():
    # x_i = h_i / (1 + mu q_i) with 4 x_0^2 + x_1^2 = 1; mu from a scalar root
    mu = brentq(lambda m: 4 / (1 + 4 * m) ** 2 + 1 / (1 + m) ** 2 - 1, 0, 10, xtol=1e-15)
    expect = [1 / (1 + 4 * mu), 1 / (1 + mu)]
    x = project_ellipsoid([1.0, 1.0], RelayEllipsoid(np.diag([4.0, 1.0]), 1.0))
    np.testing.assert_allclose(x, expect, rtol=1e-10)
    np.testing.assert_allclose(x, [0.360555, 0.692820], atol=1e-6)


def _random_spd(r, n):
    a = r.standard_normal((n, n))
    return a @ a.T + 0.1 * np.eye(n)


@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_ellipsoid_projection_is_metric_projection(seed, n):
    r = np.random.default_rng(seed)
    e = RelayEllipsoid(_random_spd(r, n), float(r.uniform(0.1, 3)))
    h = 3 * r.standard_normal(n)
    x = project_ellipsoid(h, e)
    assert e.contains(x)
    # variational inequality against random feasible points
    for _ in range(20):
        y = r.standard_normal(n)
        y *= math.sqrt(e.bound / e.value(y)) * r.uniform(0, 1)
        assert (h - x) @ (y - x) <= 1e-8 * (1 + np.linalg.norm(h))
    np.testing.assert_allclose(project_ellipsoid(x, e), x, atol=1e-12)


def test_ellipsoid_validation():
    with pytest.raises(ValueError):
        RelayEllipsoid(np.array([[1.0, 2.0], [0.0, 1.0]]), 1.0)
    with pytest.raises(SingularForm):
        project_ellipsoid([1.0, 1.0], RelayEllipsoid(np.diag([1.0, 0.0]), 1.0))
    with pytest.raises(ValueError):
        project_ellipsoid([1.0], RelayEllipsoid(np.eye(2), 1.0))


def test_relay_form_matches_direct_quadrature(rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 5)))
    t = rng.standard_normal(6)
    h = rng.standard_normal(4)
    e = relay_form(t, ch, GRID, 1.3, 2.0, 4)
    assert e.value(h) == pytest.approx(relay_power(t, h, ch, GRID, 1.3), rel=1e-12)
    q = e.q
    assert np.allclose(q[:-1, :-1], q[1:, 1:], atol=1e-12)  # Toeplitz


def test_relay_form_flat_value():
    # flat: |a|^2 ||t||^2 + sigma2 on the diagonal, zero elsewhere
    ch = ChannelTriple.flat(2.0, 1.0)
    e = relay_form([1.0], ch, GRID, 1.0, 1.0, 3)
    np.testing.assert_allclose(e.q, 5.0 * np.eye(3), atol=1e-12)


def test_two_step_feasible_and_causal(rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 5)))
    budget = PowerBudget(1.0, 0.5)
    u = DesignPoint(5 * rng.standard_normal(6), 5 * rng.standard_normal(4))
    for causal in (False, True):
        v = project_two_step(u, ch, GRID, 1.0, budget, strictly_causal=causal)
        assert v.t.energy() <= 1.0 + 1e-12
        assert relay_power(v.t, v.h, ch, GRID, 1.0) <= 0.5 * (1 + 1e-9)
        if causal:
            assert v.t.taps[0] == 0.0 and v.h.taps[0] == 0.0


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_sphere_samples_unit_norm(dim):
    s = sphere_samples(dim, 40)
    assert s.shape == (40, dim)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1.0, rtol=1e-12)
    assert np.linalg.norm(s.mean(axis=0)) < 0.35


def test_xi_projection_satisfies_all_sampled_ellipsoids(rng):
    ch = ChannelTriple.from_taps(*rng.standard_normal((3, 3)))
    budget = PowerBudget(1.0, 1.0)
    h = project_xi(4 * rng.standard_normal(3), ch, GRID, 1.0, budget, 2, m=12, sweeps=200)
    pts = sphere_samples(2, 12)
    for p in pts:
        assert relay_form(p, ch, GRID, 1.0, 1.0, 3).contains(h, rtol=1e-9)
