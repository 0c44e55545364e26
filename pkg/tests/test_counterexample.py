import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paneitzlab.conformal import lp_norm_q, q_curvature, volume
from paneitzlab.counterexample import (admissible_p_window, limit_lp_norm, lp_norm,
                                       paneitz_of_u_eps, q_closed_form, q_zero_angle, sup_q,
                                       sweep, truncated_limit_integral, u_eps, volume_eps,
                                       volume_lower_bound)
from paneitzlab.geometry import analyze, make_grid
from paneitzlab.paneitz import paneitz_apply

EPS = [0.9, 0.99, 0.999, 0.9999]

# 30-digit mpmath quadrature of the same integrals
REFERENCE = {
    (5, 1.3): [920.37264, 1498.72882, 1694.1216263, 1739.3109231, 1749.9060271],
    (8, 2.3): [344.46045, 520.05693, 578.84141, 589.89114, 591.707517387],
}


def test_window():
    assert admissible_p_window(5) == (1.25, 25 / 18)
    assert admissible_p_window(8) == (2.0, 64 / 24)


def test_u_eps_domain():
    assert_allclose(float(u_eps(5, 0.0)(np.array([1.0]))[0]), 1.0)
    with pytest.raises(ValueError):
        u_eps(5, 1.0)
    with pytest.raises(ValueError):
        q_closed_form(5, 1.2, 0.3)


def test_paneitz_of_u_eps_is_spectral():
    n, eps = 6, 0.7
    grid = make_grid(n, 32)
    pu = paneitz_apply(analyze(u_eps(n, eps).field(grid)).chopped(1e-16))(grid.theta)
    th = np.asarray(grid.theta, dtype=float)
    assert_allclose(np.asarray(pu, dtype=float), paneitz_of_u_eps(n, eps, th), rtol=1e-12)


def test_closed_form_q_matches_spectral():
    grid = make_grid(5, 128)
    q = np.asarray(q_curvature(u_eps(5, 0.6), grid), dtype=float)
    assert_allclose(q, q_closed_form(5, 0.6, np.asarray(grid.theta, dtype=float)), rtol=1e-11)


def test_q_zero_angle():
    th = q_zero_angle(5, 0.9)
    assert abs(q_closed_form(5, 0.9, th)) < 1e-12
    assert q_zero_angle(5, 0.0) is None


@pytest.mark.parametrize("key", sorted(REFERENCE))
def test_lp_norm_reference(key):
    n, p = key
    got = [lp_norm(n, e, p) for e in EPS] + [limit_lp_norm(n, p)]
    assert_allclose(got, REFERENCE[key], rtol=1e-8)


def test_lp_norm_agrees_with_spectral_path():
    assert_allclose(lp_norm(5, 0.5, 1.3), lp_norm_q(u_eps(5, 0.5), 1.3), rtol=1e-9)


@pytest.mark.parametrize("n,p", [(5, 1.3), (8, 2.3)])
def test_bounded_inside_window(n, p):
    norms = [lp_norm(n, e, p) for e in EPS]
    limit = limit_lp_norm(n, p)
    assert math.isfinite(limit)
    assert abs(norms[-1] - limit) <= 0.01 * limit


@pytest.mark.parametrize("n,p", [(5, 1.5), (8, 3.0)])
def test_blows_up_outside_window(n, p):
    first, last = lp_norm(n, EPS[0], p), lp_norm(n, EPS[-1], p)
    assert last >= 10 * first
    with pytest.raises(ValueError, match="diverges"):
        limit_lp_norm(n, p)
    assert truncated_limit_integral(n, p, 1e-8) > 100 * truncated_limit_integral(n, p, 1e-2)


def test_volume_and_minimum():
    for n in (5, 8):
        low = volume_lower_bound(n)
        for e in EPS:
            assert volume_eps(n, e) >= low
            assert float(u_eps(n, e)(np.array([0.0]))[0]) == 1 - e
    assert_allclose(volume_lower_bound(5), 0.02645, rtol=1e-3)
    assert_allclose(volume_eps(5, 0.5), volume(u_eps(5, 0.5)), rtol=1e-12)


def test_sup_q():
    assert sup_q(5, 0.0) == pytest.approx(13.125)
    th = np.linspace(0, math.pi, 20001)
    assert sup_q(5, 0.9) >= np.max(np.abs(q_closed_form(5, 0.9, th))) * (1 - 1e-12)


def test_sweep_rows():
    rows = sweep(5, 1.3, [0.5, 0.9])
    assert [r.eps for r in rows] == [0.5, 0.9]
    assert rows[1].min_u == pytest.approx(0.1)
    assert math.isnan(rows[0].lambda1)
    with pytest.raises(ValueError):
        sweep(5, 1.3, [0.9, 0.5])
    with pytest.raises(ValueError):
        sweep(5, 1.3, [1.0])
