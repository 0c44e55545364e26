"""The Paneitz operator on the round sphere.

On ``(S^n, g_round)`` the Paneitz operator factors through the positive
Laplacian as ``P = (Delta + c1)(Delta + c2)``, so it acts diagonally on zonal
harmonics with multiplier ``(lambda_k + c1)(lambda_k + c2)``, where
``lambda_k = k (k + n - 1)``.  Writing ``j = k + (n-1)/2`` the multiplier is
``(j^2 - 1/4)(j^2 - 9/4)``, which is what makes the Green's function series
summable in closed integral form (see :func:`green_paneitz`).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import (LD, ZonalCoeffs, check_dimension, eigenvalue,
                       sphere_volume_ld)
from .kernels import gauss_jacobi, jacobi_family


@dataclass(frozen=True)
class PaneitzConstants:
    """Constants of ``P = Delta^2 + a Delta + b = (Delta + c1)(Delta + c2)``.

    Attributes
    ----------
    n : int
    c1, c2 : float
        ``n(n-2)/4`` and ``(n+2)(n-4)/4``.
    a, b : float
        ``c1 + c2`` and ``c1 * c2``.
    c : float
        ``(n + c1)(n + c2) = n^2 + n a + b``, the multiplier on ``cos(theta)``.
    q_round : float
        Q-curvature of the round sphere, ``n (n^2 - 4) / 8``.
    """

    n: int
    c1: float
    c2: float
    a: float
    b: float
    c: float
    q_round: float

    def multipliers(self, K):
        """Long double multipliers ``lambda_k^2 + a lambda_k + b``, k = 0..K.

        Written through ``a`` and ``b`` so that perturbed constants (used to
        test the sensitivity of checks) act on the operator directly.
        """
        lam = eigenvalue(np.arange(K + 1, dtype=LD), self.n)
        return lam * lam + LD(self.a) * lam + LD(self.b)


def paneitz_constants(n):
    """Return the :class:`PaneitzConstants` of S^n.

    Every value is a dyadic rational for integer ``n``, so the identities
    ``c = n^2 + n a + b`` and ``b = (n-4)/2 * q_round`` hold exactly in
    floating point.

    Examples
    --------
    >>> k = paneitz_constants(5)
    >>> (k.c1, k.c2, k.a, k.b, k.c)
    (3.75, 1.75, 5.5, 6.5625, 59.0625)
    """
    n = check_dimension(n)
    c1 = n * (n - 2) / 4
    c2 = (n + 2) * (n - 4) / 4
    return PaneitzConstants(n=n, c1=c1, c2=c2, a=c1 + c2, b=c1 * c2,
                            c=(n + c1) * (n + c2), q_round=n * (n * n - 4) / 8)


def _constants_for(f, constants):
    if constants is None:
        return paneitz_constants(f.n)
    if constants.n != f.n:
        raise ValueError("constants belong to another dimension")
    return constants


def laplacian(f):
    """Apply the positive Laplacian to zonal coefficients."""
    lam = eigenvalue(np.arange(f.degree + 1, dtype=LD), f.n)
    return f.with_coeffs(lam * f.coeffs)


def shifted_laplacian(f, shift):
    """Apply ``Delta + shift`` to zonal coefficients."""
    lam = eigenvalue(np.arange(f.degree + 1, dtype=LD), f.n)
    return f.with_coeffs((lam + LD(shift)) * f.coeffs)


def paneitz_apply(f, constants=None):
    """Apply the round-sphere Paneitz operator to zonal coefficients.

    Parameters
    ----------
    f : ZonalCoeffs
    constants : PaneitzConstants, optional
        Override the constants, e.g. to inject a perturbation in tests.

    Returns
    -------
    ZonalCoeffs
    """
    k = _constants_for(f, constants)
    return f.with_coeffs(k.multipliers(f.degree) * f.coeffs)


def coercivity_constant(n):
    """Smallest eigenvalue of P on the round S^n.

    All multipliers increase with k, so the minimum sits at ``k = 0`` and
    equals ``b_n``.  It is the best constant in ``int u P u >= C int u^2``.
    """
    k = paneitz_constants(n)
    return float(np.min(k.multipliers(64)))


def green_coefficients(n, K):
    """Zonal coefficients of ``G(theta)``, the Green's function with pole at theta = 0.

    In the orthonormal basis ``p_k(cos theta)`` the coefficient of degree k
    is ``p_k(1) / (sigma_{n-1} m_k)`` with ``m_k`` the Paneitz multiplier.
    """
    n = check_dimension(n)
    fam = jacobi_family((n - 2) / 2, (n - 2) / 2, K + 2)
    p1 = fam.table(np.array([1], dtype=LD), K)[:, 0]
    m = paneitz_constants(n).multipliers(K)
    return ZonalCoeffs(n, p1 / (sphere_volume_ld(n - 1) * m))


class GreenValue(NamedTuple):
    """Result of :func:`green_paneitz`.

    ``value`` is the summed zonal series, ``partial`` the plain partial sum
    over degrees ``0..K`` and ``tail`` the part of the series beyond degree
    K, i.e. ``value - partial``.  ``quadrature_error`` estimates the error of
    ``value`` by comparison with a half-order rule.
    """

    value: float
    partial: float
    tail: float
    quadrature_error: float


def _green_summed(theta, n, N):
    # With j = k + lam and lam = (n-1)/2 the series reads
    #   G = 1/(lam sigma_n) sum_k j C_k^lam(x) / ((j^2 - 1/4)(j^2 - 9/4)).
    # Partial fractions turn j/m_k into four terms 1/(j + s); writing each as
    # int_0^1 r^{j+s-1} dr and summing the Gegenbauer generating function
    # sum_k C_k^lam(x) r^k = (1 - 2 x r + r^2)^(-lam) gives
    #   G = 1/(4 lam sigma_n) int_0^1 r^(lam-5/2) (1-r)^2 (1+r)
    #                                   (1 - 2 x r + r^2)^(-lam) dr,
    # which Gauss-Jacobi quadrature in r handles with spectral accuracy.
    lam = LD(n - 1) / 2
    xi, w = gauss_jacobi(2.0, (n - 6) / 2, N)
    r = (1 + xi) / 2
    x = np.cos(np.asarray(theta, dtype=LD)).ravel()
    scale = LD(2) ** (-LD(n - 6) / 2 - 3)
    f = (1 + r)[None, :] * (1 - 2 * x[:, None] * r[None, :] + r[None, :] ** 2) ** (-lam)
    return scale * (f @ w) / (4 * lam * sphere_volume_ld(n))


def green_paneitz(theta, K=256, n=5):
    """Green's function of the round-sphere Paneitz operator.

    Evaluates ``G(theta)``, the kernel ``G_P(x, y)`` as a function of the
    angle between ``x`` and ``y``, as the zonal series
    ``sum_k (dim_k / sigma_n) Z_k(cos theta) / m_k``.

    The plain partial sums of this series converge slowly: the terms decay
    like ``k^{(n-1)/2 - 4}`` and at the antipode they do not decay at all for
    ``n = 5``.  The series is therefore summed exactly through the
    Gegenbauer generating function (Abel summation), reducing it to a smooth
    integral over ``r in (0, 1)`` evaluated by a ``K``-point Gauss rule.  The
    degree-K partial sum and its tail are reported alongside.

    Parameters
    ----------
    theta : float
        Angle in ``(0, pi]``.
    K : int, optional
        Truncation degree of the reported partial sum and order of the
        summation rule.
    n : int, optional
        Sphere dimension.

    Returns
    -------
    GreenValue

    Raises
    ------
    ValueError
        At ``theta = 0`` (diagonal evaluation unsupported) or outside
        ``(0, pi]``.
    """
    n = check_dimension(n)
    th = float(theta)
    if th == 0:
        raise ValueError("diagonal evaluation unsupported: theta must be > 0")
    if not 0 < th <= np.pi:
        raise ValueError("theta must lie in (0, pi]")
    if K < 8:
        raise ValueError("K must be at least 8")
    value = _green_summed(th, n, K)[0]
    coarse = _green_summed(th, n, max(K // 2, 8))[0]
    partial = green_coefficients(n, K)(np.array([th], dtype=LD))[0]
    return GreenValue(float(value), float(partial), float(value - partial),
                      float(abs(value - coarse)))


def green_profile(theta, K=256, n=5):
    """Vectorised :func:`green_paneitz` returning only the summed values."""
    n = check_dimension(n)
    th = np.asarray(theta, dtype=LD)
    if np.any(th <= 0) or np.any(th > np.pi + 1e-15):
        raise ValueError("angles must lie in (0, pi]; diagonal evaluation unsupported")
    return np.asarray(_green_summed(th, n, K), dtype=float).reshape(np.shape(theta))
