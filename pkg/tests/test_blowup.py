import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paneitzlab.blowup import (RadialBump, bubble_limit_profile, captured_volume,
                               limit_rayleigh_check, rescale, transfer_check, volume_capture)
from paneitzlab.conformal import ConformalFactor, dumbbell_factor, moebius_factor, round_factor


def test_rescaled_bubble_profile():
    prof = rescale(moebius_factor(64.0, 5), 10.0)
    assert_allclose(prof.mu, 1 / 64, rtol=1e-14)
    assert_allclose(prof.v[0], 1.0, rtol=1e-14)
    assert np.max(np.abs(prof.v - bubble_limit_profile(5)(prof.s))) < 3e-4
    assert_allclose(prof.metric_coeff[0], 1.0)
    assert not prof.flipped


def test_rescale_reflects_south_maximum():
    prof = rescale(moebius_factor(0.25, 5), 1.0)
    assert prof.flipped
    assert_allclose(prof.theta(np.array([0.0])), [math.pi])
    assert_allclose(prof.v[0], 1.0, rtol=1e-14)


def test_rescale_errors():
    with pytest.raises(ValueError, match="pole"):
        rescale(ConformalFactor(lambda th: 2 + np.sin(th), 5), 0.5)
    with pytest.raises(ValueError, match="radius"):
        rescale(round_factor(5), 4.0)


def test_area_element_matches_metric_coefficient():
    prof = rescale(moebius_factor(4.0, 6), 2.0)
    s = np.linspace(0.1, 2.0, 5)
    from paneitzlab.geometry import sphere_volume
    assert_allclose(prof.area_element(s), sphere_volume(5) * (prof.a_at(s) * s * s) ** 2.5, rtol=1e-14)


@pytest.mark.parametrize("t", [4.0, 16.0])
@pytest.mark.parametrize("f", [1.0, np.cos])
@pytest.mark.parametrize("r", [0.5, 1.0])
def test_transfer_identity(t, f, r):
    assert transfer_check(moebius_factor(t, 5), f, r).residual <= 1e-8


def test_transfer_on_dumbbell():
    u = dumbbell_factor(5)
    chk = transfer_check(u, lambda th: np.cos(th) ** 2, 2.0)
    assert chk.residual <= 1e-10 * abs(chk.rhs)


def test_volume_capture_monotone():
    ts, Rs = [4.0, 16.0, 64.0], [1.0, 10.0, 100.0]
    rows = volume_capture([moebius_factor(t, 5) for t in ts], Rs)
    table = np.array([r["captured"] for r in rows]).reshape(len(ts), len(Rs))
    assert np.all(np.diff(table, axis=1) >= 0)
    assert np.all(np.diff(table, axis=0) <= 1e-12)
    assert_allclose(table[-1, -1], math.pi ** 3, rtol=2e-2)
    assert_allclose(table[-1, -1] / math.pi ** 3, 0.9999999947, rtol=1e-9)


def test_capture_clamps_radius():
    cap, R_eff = captured_volume(moebius_factor(4.0, 5), 100.0)
    assert_allclose(R_eff, 4 * math.pi)
    assert_allclose(cap, math.pi ** 3, rtol=1e-13)


def test_radial_bump_derivative():
    b = RadialBump(2.0, 4)
    s = np.linspace(0.1, 1.9, 7)
    h = 1e-6
    assert_allclose(b.derivative(s), (b(s + h) - b(s - h)) / (2 * h), rtol=1e-7, atol=1e-9)
    assert b(np.array([2.5]))[0] == 0


def test_limit_rayleigh_converges_like_mu_squared():
    fam = [moebius_factor(t, 5) for t in (8.0, 16.0, 32.0, 64.0, 128.0, 256.0)]
    rep = limit_rayleigh_check(fam, RadialBump(2.0), 2.0, v_limit=bubble_limit_profile(5))
    ratios = np.array(rep.differences[:-1]) / np.array(rep.differences[1:])
    assert_allclose(ratios, 4.0, rtol=0.05)
    assert rep.converged
    assert abs(rep.quotients[-1] - rep.limit) < 1e-3
