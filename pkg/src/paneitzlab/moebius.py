"""Axis-aligned Moebius dilations of S^n.

In stereographic coordinates from the south pole the dilation ``delta_t``
is ``y -> t y``; in colatitude it reads ``tan(theta'/2) = t tan(theta/2)``.
Its conformal factor ``phi_t = d theta' / d theta`` satisfies
``delta_t^* g = phi_t^2 g`` with

    phi_t(theta) = 2 t / ((1 + t^2) - (t^2 - 1) cos(theta)),

so ``phi_t(0) = t`` and ``phi_t(pi) = 1/t``.  The inverse of ``delta_t``
is ``delta_{1/t}``.
"""
from dataclasses import dataclass

import numpy as np


def dilate(theta, t):
    """Image colatitude ``delta_t(theta)``."""
    theta = np.asarray(theta)
    half = theta / 2
    # atan2 keeps theta = pi fixed and avoids overflow of tan near pi
    return 2 * np.arctan2(t * np.sin(half), np.cos(half))


def dilation_factor(theta, t):
    """Conformal factor ``phi_t(theta)`` of ``delta_t``.

    Written with half angles so that it is accurate for large ``t``.
    """
    theta = np.asarray(theta)
    s2 = np.sin(theta / 2) ** 2
    c2 = np.cos(theta / 2) ** 2
    return t / (c2 + t * t * s2)


@dataclass(frozen=True)
class MoebiusMap:
    """The dilation ``delta_t`` along the polar axis.

    Attributes
    ----------
    t : float
        Dilation parameter, positive; ``t = 1`` is the identity.
    direction : int
        ``+1`` for dilations centred at the north pole (theta = 0), ``-1``
        for the reflected family.  A reflected map with parameter ``t``
        equals the direct map with parameter ``1/t``.
    """

    t: float
    direction: int = 1

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("dilation parameter must be positive")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")

    @property
    def parameter(self):
        """Parameter of the equivalent north-centred dilation."""
        return self.t if self.direction == 1 else 1.0 / self.t

    def __call__(self, theta):
        return dilate(theta, self.parameter)

    def factor(self, theta):
        return dilation_factor(theta, self.parameter)

    def inverse(self):
        return MoebiusMap(1.0 / self.t, self.direction)

    def compose(self, other):
        """``self o other``; same-axis dilations multiply their parameters."""
        return MoebiusMap(self.parameter * other.parameter)


def pullback(func, t, exponent):
    """Pull back a conformal factor through ``delta_t``.

    For ``g = u^{4/(n-4)} g_round`` one has
    ``delta_t^* g = ((u o delta_t) phi_t^{(n-4)/2})^{4/(n-4)} g_round``;
    ``exponent`` is ``(n-4)/2`` or ``(n-2)/2`` depending on the convention.

    Returns
    -------
    callable
        ``theta -> u(delta_t(theta)) * phi_t(theta)**exponent``.
    """
    def pulled(theta):
        return func(dilate(theta, t)) * dilation_factor(theta, t) ** exponent
    return pulled


def _com_original(density, t, n, K):
    # int cos(delta_t theta) W(theta) dmu over the original grid
    from .geometry import make_grid
    grid = make_grid(n, K)
    return float(grid.integrate(np.cos(dilate(grid.theta, t)) * density(grid.theta)))


def pushforward_density(density, t, n):
    """Density of the pushforward of ``density * dmu`` under ``delta_t``.

    Returns the callable ``theta -> W(delta_{1/t} theta) phi_{1/t}(theta)^n``.
    """
    s = 1.0 / t

    def pushed(theta):
        return density(dilate(theta, s)) * dilation_factor(theta, s) ** n
    return pushed


def center_of_mass_axis(density, n, t=1.0, K0=64, Kmax=4096):
    """Axis component of the centre of mass of the pushed-forward measure.

    Computes ``int x_{n+1} d((delta_t)_* nu)`` for ``nu = W dmu``, using the
    Jacobian ``phi_{1/t}^n``.  The integral is adapted in the grid size.

    Returns
    -------
    value : float
    converged : bool
    """
    from .geometry import adaptive_integrate
    pushed = pushforward_density(density, t, n)
    val, _, ok = adaptive_integrate(lambda th: np.cos(th) * pushed(th), n,
                                    K0=K0, Kmax=Kmax, rtol=0.0, atol=1e-13)
    return val, ok


def balance_parameter(density, n, tol=1e-10, log_range=18.0, K=512):
    """Dilation parameter that centres a radial measure.

    Parameters
    ----------
    density : callable
        ``theta -> W(theta) >= 0`` with respect to the round volume.
    n : int
        Sphere dimension.
    tol : float
        Required ``|CoM|`` of the pushed-forward measure.
    log_range : float
        Search interval ``log t in [-log_range, log_range]``.
    K : int
        Grid for the bracketing stage.

    Returns
    -------
    t : float
    com : float
        Residual centre of mass at ``t``.

    Raises
    ------
    RuntimeError
        If the centre of mass does not change sign over the search interval
        (all mass at one pole) or the refined residual exceeds ``tol``.

    Notes
    -----
    ``t -> CoM(t)`` is strictly decreasing.  A first root is located with the
    centre of mass written in the original frame, which stays well
    conditioned for extreme ``t``.  The root is then polished in the
    pushed-forward frame, where the density is nearly balanced and smooth
    and the residual is what the caller asks about.
    """
    from scipy.optimize import brentq

    def coarse(s):
        return _com_original(density, np.exp(s), n, K)

    lo, hi = -log_range, log_range
    flo, fhi = coarse(lo), coarse(hi)
    if not (flo > 0 > fhi):
        raise RuntimeError("no balancing dilation in the search range; "
                           "the measure looks concentrated at one pole")
    s0 = brentq(coarse, lo, hi, xtol=1e-12, rtol=1e-14)

    def fine(s):
        return center_of_mass_axis(density, n, np.exp(s))[0]

    width = 1e-3
    a, b = s0 - width, s0 + width
    fa, fb = fine(a), fine(b)
    while not (fa >= 0 >= fb):
        width *= 4
        if width > 2 * log_range:
            raise RuntimeError("failed to bracket the balancing root")
        a, b = s0 - width, s0 + width
        fa, fb = fine(a), fine(b)
    s = brentq(fine, a, b, xtol=1e-15, rtol=1e-15) if fa != 0 and fb != 0 else (a if fa == 0 else b)
    t = float(np.exp(s))
    com, _ = center_of_mass_axis(density, n, t)
    if abs(com) > tol:
        raise RuntimeError(f"balancing residual {com:.3e} exceeds tolerance {tol:.1e}")
    return t, com
