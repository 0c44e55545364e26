import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paneitzlab.geometry import analyze, make_grid, sphere_volume
from paneitzlab.paneitz import (PaneitzConstants, coercivity_constant, green_paneitz,
                                green_profile, laplacian, paneitz_apply, paneitz_constants)


def chordal_green(theta, n):
    # Green's function of Delta^2 on R^n transported by stereographic projection
    d = 2 * np.sin(np.asarray(theta) / 2)
    return d ** (4 - n) / (2 * (n - 4) * (n - 2) * sphere_volume(n - 1))


def test_constants_n5():
    k = paneitz_constants(5)
    assert (k.c1, k.c2, k.a, k.b, k.c, k.q_round) == (3.75, 1.75, 5.5, 6.5625, 59.0625, 13.125)


@pytest.mark.parametrize("n", [5, 6, 7, 8, 12])
def test_constants_relations(n):
    k = paneitz_constants(n)
    assert_allclose(k.c1 * k.c2, k.b)
    assert_allclose(k.c1 + k.c2, k.a)
    assert_allclose(k.c, n * n + n * k.a + k.b)
    assert_allclose(k.q_round, n * (n * n - 4) / 8)


@pytest.mark.parametrize("n", [5, 6, 8, 12])
def test_constant_and_first_harmonic(n):
    grid = make_grid(n, 64)
    k = paneitz_constants(n)
    one = paneitz_apply(analyze(grid.sample(np.ones_like)).chopped(1e-16))(grid.theta)
    assert_allclose(np.asarray(one, dtype=float), k.b, rtol=1e-12)
    cos = paneitz_apply(analyze(grid.sample(np.cos)).chopped(1e-16))(grid.theta)
    assert_allclose(np.asarray(cos, dtype=float), k.c * np.cos(np.asarray(grid.theta, dtype=float)),
                    rtol=1e-12, atol=1e-12 * k.c)


def test_factorisation_matches_multipliers():
    n = 7
    grid = make_grid(n, 48)
    k = paneitz_constants(n)
    f = analyze(grid.sample(lambda th: np.exp(np.cos(th))))
    lap = laplacian(f)
    direct = paneitz_apply(f)
    # Delta is the positive Laplacian, so P = Delta^2 + a Delta + b
    composed = laplacian(lap).coeffs + k.a * lap.coeffs + k.b * f.coeffs
    assert_allclose(np.asarray(direct.coeffs, dtype=float), np.asarray(composed, dtype=float),
                    rtol=1e-14, atol=1e-17)


def test_perturbed_constants_take_effect():
    k = paneitz_constants(5)
    bumped = PaneitzConstants(n=5, c1=k.c1, c2=k.c2, a=k.a, b=k.b + 1e-3, c=k.c, q_round=k.q_round)
    assert_allclose(bumped.multipliers(0)[0] - k.multipliers(0)[0], 1e-3, rtol=1e-10)


@pytest.mark.parametrize("n", [5, 6, 8])
def test_coercivity_is_b(n):
    assert_allclose(coercivity_constant(n), paneitz_constants(n).b, rtol=1e-12)


@pytest.mark.parametrize("n", [5, 6, 8])
def test_green_matches_chordal_formula(n):
    for th in [0.1, 0.7, 1.5, 2.5, math.pi]:
        g = green_paneitz(th, K=256, n=n)
        assert_allclose(g.value, chordal_green(th, n), rtol=1e-13)
        assert_allclose(g.partial + g.tail, g.value, rtol=0, atol=1e-14 * max(1.0, abs(g.partial)))


def test_green_profile_positive_and_stable():
    th = np.linspace(0.1, math.pi, 200)
    g1 = np.asarray(green_profile(th, K=256, n=5), dtype=float)
    g2 = np.asarray(green_profile(th, K=512, n=5), dtype=float)
    assert np.all(g1 > 0)
    assert np.max(np.abs(g1 - g2)) <= 1e-6


def test_green_rejects_diagonal():
    with pytest.raises(ValueError, match="diagonal"):
        green_paneitz(0.0)
    with pytest.raises(ValueError):
        green_paneitz(4.0)
