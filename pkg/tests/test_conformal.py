import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paneitzlab.conformal import (ConformalFactor, class_membership, dumbbell_factor, energy,
                                  lp_norm_q, moebius_covariance_residual, moebius_factor,
                                  normalize_volume, q_curvature, round_factor, volume)
from paneitzlab.counterexample import u_eps
from paneitzlab.geometry import make_grid, sphere_volume
from paneitzlab.moebius import (MoebiusMap, balance_parameter, dilate, dilation_factor,
                                pullback)
from paneitzlab.paneitz import paneitz_constants


def test_dilation_fixes_poles_and_composes():
    th = np.linspace(0, math.pi, 9)
    out = dilate(th, 3.0)
    assert out[0] == 0 and out[-1] == math.pi
    assert_allclose(dilate(dilate(th, 2.0), 3.0), dilate(th, 6.0), rtol=1e-14, atol=1e-15)
    assert_allclose(dilate(dilate(th, 5.0), 0.2), th, atol=1e-15)


def test_dilation_factor_is_derivative():
    # phi_t = d(delta_t)/d(theta) since delta_t is conformal and radial
    th = np.linspace(0.1, 3.0, 7)
    h = 1e-6
    fd = (dilate(th + h, 4.0) - dilate(th - h, 4.0)) / (2 * h)
    assert_allclose(dilation_factor(th, 4.0), fd, rtol=1e-8)


def test_moebius_map_algebra():
    m = MoebiusMap(2.0)
    assert m.inverse().parameter == 0.5
    assert m.compose(MoebiusMap(3.0)).parameter == 6.0
    assert MoebiusMap(4.0, direction=-1).parameter == 0.25
    with pytest.raises(ValueError):
        MoebiusMap(-1.0)


def test_pullback_of_round_is_bubble():
    n = 5
    th = np.linspace(0.05, 3.0, 11)
    pulled = pullback(lambda x: np.ones_like(x), 3.0, (n - 4) / 2)
    assert_allclose(pulled(th), np.asarray(moebius_factor(3.0, n)(th), dtype=float), rtol=1e-15)


@pytest.mark.parametrize("t", [2.0, 10.0, 0.1])
def test_balance_parameter_of_bubble(t):
    u = moebius_factor(t, 5)
    s, _ = balance_parameter(u.volume_density, 5)
    assert_allclose(s, t, rtol=1e-9)


@pytest.mark.parametrize("n", [5, 8])
def test_round_q_and_volume(n):
    u = round_factor(n)
    q = np.asarray(q_curvature(u), dtype=float)
    assert_allclose(q, n * (n * n - 4) / 8, rtol=1e-12)
    assert_allclose(volume(u), sphere_volume(n), rtol=1e-14)


@pytest.mark.parametrize("t", [3.0, 50.0])
def test_bubble_keeps_round_q(t):
    q = np.asarray(q_curvature(moebius_factor(t, 5)), dtype=float)
    assert_allclose(q, 13.125, rtol=1e-10)
    assert_allclose(volume(moebius_factor(t, 5)), math.pi ** 3, rtol=1e-12)


def test_energy_of_round_and_bubble():
    k = paneitz_constants(5)
    assert_allclose(energy(round_factor(5)), k.b * math.pi ** 3, rtol=1e-13)
    # u P u = (n-4)/2 Q u^{2n/(n-4)}, Moebius invariant
    assert_allclose(energy(moebius_factor(20.0, 5)), k.b * math.pi ** 3, rtol=1e-10)


def test_lp_norm_round():
    assert_allclose(lp_norm_q(round_factor(5), 1.3), 13.125 * math.pi ** (3 / 1.3), rtol=1e-14)


def test_lp_norm_of_u_eps_against_reference():
    # reference from an independent 30-digit quadrature
    assert_allclose(lp_norm_q(u_eps(5, 0.5), 1.3), 327.2946673845, rtol=1e-10)


@pytest.mark.parametrize("n", [5, 8])
@pytest.mark.parametrize("t", [2.0, 5.0, 20.0])
def test_covariance_residual(n, t):
    grid = make_grid(n, 128)
    for f in (np.ones_like, np.cos, lambda th: np.cos(th) ** 3 - 0.3 * np.cos(th)):
        assert moebius_covariance_residual(t, grid.sample(f)) <= 1e-8


def test_normalize_volume():
    u = normalize_volume(ConformalFactor(lambda th: 2 + np.cos(th), 5))
    assert_allclose(volume(u), math.pi ** 3, rtol=1e-13)
    assert_allclose(volume(dumbbell_factor(5)), math.pi ** 3, rtol=1e-13)


def test_second_order_convention_exponents():
    u = round_factor(6, "second")
    assert u.denominator == 4
    assert u.volume_exponent == 3.0
    assert_allclose(u.to_convention("fourth").volume_exponent, 6.0)


def test_class_membership_of_round():
    rep = class_membership(round_factor(5), 1.3, Lambda=200.0)
    assert rep.volume_ok and rep.q_norm_ok and rep.paneitz_nonnegative
    # lambda_1 = n exactly, so the strict gap fails
    assert not rep.gap_ok and not rep.is_member
    with pytest.raises(ValueError):
        class_membership(round_factor(5), 1.0, Lambda=200.0)
