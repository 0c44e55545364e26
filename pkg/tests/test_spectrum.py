import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import comb

from paneitzlab.conformal import (ConformalFactor, dumbbell_factor, moebius_factor,
                                  normalize_volume, round_factor)
from paneitzlab.geometry import make_grid, sphere_volume
from paneitzlab.spectrum import (EuclideanWeight, ball_volume, cutoff_eta_R,
                                 gradient_n_integral, gradient_n_integral_closed,
                                 lambda1_euclidean, lambda1_sphere, rayleigh_quotient,
                                 sector_multiplicity, sphere_cutoff_gradient_n,
                                 volume_inequality_probe)


def test_sector_multiplicity():
    # spherical harmonics of degree l on S^{n-1}
    for n in (5, 6, 9):
        for l in range(6):
            expected = comb(l + n - 1, n - 1, exact=True) - comb(l + n - 3, n - 1, exact=True)
            assert sector_multiplicity(l, n) == expected


@pytest.mark.parametrize("n", [5, 6, 8])
def test_round_sphere_first_eigenvalue(n):
    rep = lambda1_sphere(round_factor(n))
    assert_allclose(rep.lambda1, n, rtol=0, atol=1e-8)
    assert rep.multiplicity == n + 1
    assert rep.warning is None
    assert rep.refinement_delta < 1e-10


def test_round_sector_minima_are_laplace_eigenvalues():
    rep = lambda1_sphere(round_factor(5), lmax=6)
    # the lowest nonzero mode of sector l has degree max(l, 1)
    expected = [max(l, 1) * (max(l, 1) + 4) for l in range(7)]
    assert_allclose(rep.sector_minima, expected, rtol=1e-12)


@pytest.mark.parametrize("t", [2.0, 10.0, 50.0])
def test_bubbles_are_isometric(t):
    assert_allclose(lambda1_sphere(moebius_factor(t, 5)).lambda1, 5.0, atol=1e-6)


def test_bubble_without_recentring():
    rep = lambda1_sphere(moebius_factor(3.0, 5), K=128, recentre=False)
    assert_allclose(rep.lambda1, 5.0, atol=1e-10)


def test_dumbbell_has_small_gap():
    rep = lambda1_sphere(dumbbell_factor(5))
    # a second-order finite difference solve of the l = 0 problem gives 7.19367e-4
    assert_allclose(rep.lambda1, 7.19367e-4, rtol=1e-4)
    assert rep.sector == 0
    assert rep.lambda1 < 5 - 0.1
    assert np.max(np.abs(rep.profile)) == 1.0


def test_rayleigh_quotient_upper_bound():
    grid = make_grid(5, 64)
    assert_allclose(rayleigh_quotient(round_factor(5), grid.sample(np.cos)), 5.0, rtol=1e-13)
    u = dumbbell_factor(5)
    q = rayleigh_quotient(u, grid.sample(np.cos))
    assert q >= lambda1_sphere(u).lambda1
    with pytest.raises(ValueError):
        rayleigh_quotient(u, grid.sample(np.ones_like))


def test_euclidean_round_weight():
    rep = lambda1_euclidean(EuclideanWeight.round(5))
    assert_allclose(rep.lambda1, 5.0, rtol=1e-5)
    assert rep.extra["relative_change"] < 1e-2
    assert_allclose(rep.extra["mass_2R"], math.pi ** 3, rtol=1e-6)


def test_euclidean_weight_from_factor_matches_sphere():
    u = normalize_volume(ConformalFactor(lambda th: 1 + 0.3 * np.cos(th), 5, "second"))
    sphere = lambda1_sphere(u).lambda1
    flat = lambda1_euclidean(EuclideanWeight.from_factor(u), R_max=200.0).lambda1
    assert_allclose(flat, sphere, rtol=1e-4)


def test_euclidean_scaling():
    # w -> c w multiplies lambda_1 by c^{2 - 2n/(n-2)}
    n, c = 5, 1.7
    base = lambda1_euclidean(EuclideanWeight.round(n)).lambda1
    scaled = lambda1_euclidean(EuclideanWeight.round(n).scaled(c)).lambda1
    assert_allclose(scaled, base * c ** (2 - 2 * n / (n - 2)), rtol=1e-5)


def test_from_samples_weight():
    r = np.linspace(0, 60, 601)
    w = EuclideanWeight.from_samples(r, (2 / (1 + r * r)) ** 1.5, 5)
    assert_allclose(w(np.array([0.5, 70.0])), [(2 / 1.25) ** 1.5, 0.0], rtol=1e-4)


@pytest.mark.parametrize("n", [5, 8])
@pytest.mark.parametrize("r,R", [(1, math.e), (1, math.e ** 2), (0.5, 50)])
def test_cutoff_identity(n, r, R):
    assert_allclose(gradient_n_integral(r, R, n), gradient_n_integral_closed(r, R, n), rtol=1e-12)


def test_cutoff_values():
    eta = cutoff_eta_R(1.0, math.e)
    assert_allclose(eta(np.array([0.5, 1.0, math.e ** 0.5, math.e, 5.0])), [1, 1, 0.5, 0, 0],
                    atol=1e-15)
    with pytest.raises(ValueError):
        cutoff_eta_R(2.0, 1.0)


def test_sphere_cutoff_gradient():
    n, r, R = 5, 0.1, 1.0
    L = math.log(R / r)
    ref, _ = quad(lambda t: (1 / (t * L)) ** n * math.sin(t) ** (n - 1), r, R, epsabs=0, epsrel=1e-13)
    assert_allclose(sphere_cutoff_gradient_n(r, R, n), sphere_volume(n - 1) * ref, rtol=1e-12)


def test_ball_volume_round():
    ref, _ = quad(lambda t: math.sin(t) ** 4, 0, 0.7, epsabs=0, epsrel=1e-13)
    assert_allclose(ball_volume(round_factor(5), 0.7), sphere_volume(4) * ref, rtol=1e-13)


def test_volume_probe_round():
    p = volume_inequality_probe(round_factor(5), 0.1, 1.0, Lambda=10.0)
    assert p.lhs <= p.energy_bound <= p.bound
    assert_allclose(p.bound, math.pi ** (3 * (2 + 3 / 5)) * sphere_volume(4) ** 0.4 / 5, rtol=1e-10)
    assert p.gap_ok is False
    with pytest.raises(ValueError, match="volume"):
        volume_inequality_probe(round_factor(5).scaled(1.1), 0.1, 1.0)
