"""Rescaling of concentrating conformal factors.

Around a maximum point ``x0`` of ``u`` one zooms in with the scale
``mu = (max u)^{-2/(n-4)}``: the rescaled factor is
``v(s) = mu^{(n-4)/2} u(exp_{x0}(mu s))`` and the rescaled round metric in
geodesic polar coordinates is

    h = ds^2 + (sin(mu s) / mu)^2 g_{S^{n-1}} = ds^2 + a(s) s^2 g_{S^{n-1}},

with ``a(s) = (sin(mu s) / (mu s))^2``.  On the sphere the exponential chart
is explicit, so no metric discretisation is involved.  Radii ``r`` passed to
this module are measured in the rescaled variable ``s``; the corresponding
geodesic radius on the sphere is ``mu r``.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .conformal import ConformalFactor, volume
from .geometry import LD, RadialField, make_grid, sphere_volume
from .kernels import gauss_legendre

POLE_TOL = 1e-12


def _as_theta_func(f):
    if isinstance(f, RadialField):
        return lambda th: np.asarray(f(np.asarray(th, dtype=LD)), dtype=float)
    if callable(f):
        return lambda th: np.asarray(f(np.asarray(th, dtype=float)), dtype=float)
    value = float(f)
    return lambda th: np.full(np.shape(th), value)


def _graded_panels(a, b, first=1.0):
    # panels [0, first], [first, 2 first], ... doubling up to b
    edges = [a]
    step = first
    while edges[-1] + step < b:
        edges.append(edges[-1] + step)
        step *= 2
    edges.append(b)
    return edges


def _composite(edges, order):
    x, w = gauss_legendre(order)
    pts, wts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts.append(lo + (hi - lo) * (x + 1) / 2)
        wts.append(w * (hi - lo) / 2)
    return np.concatenate(pts), np.concatenate(wts)


@dataclass
class RescaledProfile:
    """Zoomed-in view of a factor around its maximum.

    Attributes
    ----------
    mu : float
        Scale ``(max u)^{-2/d}`` with ``d`` the convention denominator.
    r : float
        Radius of the rescaled ball (in ``s``).
    n : int
    s : ndarray
        Sample points on ``[0, r]``.
    v : ndarray
        Samples of the rescaled factor; ``v(0) = 1``.
    metric_coeff : ndarray
        Samples of ``a(s)``.
    flipped : bool
        True when the maximum sits at the south pole and ``u`` was reflected.
    """

    mu: float
    r: float
    n: int
    s: np.ndarray
    v: np.ndarray
    metric_coeff: np.ndarray
    flipped: bool
    factor: ConformalFactor = field(repr=False)

    @property
    def denominator(self):
        return self.factor.denominator

    def v_at(self, s):
        """Rescaled factor at arbitrary ``s``."""
        s = np.asarray(s, dtype=float)
        return self.mu ** (self.denominator / 2) * np.asarray(
            self.factor(self.mu * s), dtype=float)

    def a_at(self, s):
        """Angular coefficient ``a(s)``."""
        x = self.mu * np.asarray(s, dtype=float)
        return np.sinc(x / math.pi) ** 2

    def area_element(self, s):
        """``sigma_{n-1} (sin(mu s)/mu)^{n-1}``, so ``dV_h = area_element ds``."""
        s = np.asarray(s, dtype=float)
        return sphere_volume(self.n - 1) * (np.sinc(self.mu * s / math.pi) * s) ** (self.n - 1)

    def theta(self, s):
        """Colatitude on the sphere of the rescaled point ``s``."""
        th = self.mu * np.asarray(s, dtype=float)
        return math.pi - th if self.flipped else th


def rescale(u, r, samples=257):
    """Rescale ``u`` around its maximum.

    Parameters
    ----------
    u : ConformalFactor
        Radial factor whose maximum is at a pole.
    r : float
        Radius in rescaled coordinates; requires ``mu r <= pi``.

    Returns
    -------
    RescaledProfile

    Raises
    ------
    ValueError
        If the maximum is not attained at a pole, or ``mu r > pi``.
    """
    n = u.n
    grid = make_grid(n, 256)
    vals = np.asarray(u.field(grid), dtype=float)
    top = float(np.max(vals))
    north = float(u(np.array([0.0]))[0])
    south = float(u(np.array([math.pi]))[0])
    peak = max(north, south)
    if peak < top * (1 - POLE_TOL):
        raise ValueError("maximum of u is not attained at a pole")
    flipped = south > north
    base = u
    if flipped:
        func = u.func
        base = ConformalFactor(lambda th: func(math.pi - th), n, u.convention,
                               f"reflect({u.label})")
    mu = peak ** (-2 / u.denominator)
    if mu * r > math.pi * (1 + 1e-12):
        raise ValueError(f"rescaled radius too large: mu*r = {mu * r:.6g} > pi")
    r = min(r, math.pi / mu)
    s = np.linspace(0.0, r, samples)
    prof = RescaledProfile(mu=mu, r=float(r), n=n, s=s, v=np.empty(0),
                           metric_coeff=np.empty(0), flipped=flipped, factor=base)
    prof.v = prof.v_at(s)
    prof.metric_coeff = prof.a_at(s)
    return prof


@dataclass(frozen=True)
class TransferCheck:
    lhs: float
    rhs: float
    residual: float


def transfer_check(u, f, r, order=40):
    """Compare both sides of the change of variables into rescaled coordinates.

    ``lhs`` integrates ``(f o psi) v^{2n/d} dV_h`` in ``s`` over ``B(0, r)``;
    ``rhs`` integrates ``f u^{2n/d} dV`` in ``theta`` over the geodesic ball
    of radius ``mu r``.  The two sides use different variables and
    different panel layouts.

    Parameters
    ----------
    u : ConformalFactor
    f : RadialField, callable of theta, or float
    r : float
        Rescaled radius with ``mu r <= pi``.
    """
    prof = rescale(u, r)
    n, mu, r = prof.n, prof.mu, prof.r
    ve = prof.factor.volume_exponent
    fth = _as_theta_func(f)

    s, ws = _composite(_graded_panels(0.0, r, first=min(1.0, r)), order)
    lhs = np.sum(ws * fth(prof.theta(s)) * prof.v_at(s) ** ve * prof.area_element(s))

    Theta = mu * r
    edges = [0.0] + list(Theta * 2.0 ** -np.arange(30, -1, -1))
    th, wt = _composite(edges, order + 8)
    dens = np.asarray(prof.factor(th), dtype=float) ** ve
    ftheta = fth(math.pi - th if prof.flipped else th)
    rhs = sphere_volume(n - 1) * np.sum(wt * ftheta * dens * np.sin(th) ** (n - 1))
    return TransferCheck(float(lhs), float(rhs), float(abs(lhs - rhs)))


def captured_volume(u, R, order=40):
    """``int_{B(0,R)} v^{2n/d} dV_h``; ``R`` is clamped to ``pi / mu``."""
    mu = rescale(u, 0.0).mu
    R_eff = min(R, math.pi / mu)
    return transfer_check(u, 1.0, R_eff, order=order).lhs, R_eff


def volume_capture(family, R_list):
    """Volume captured by rescaled balls along a family.

    Parameters
    ----------
    family : sequence of ConformalFactor
    R_list : sequence of float
        Rescaled radii; each is clamped to ``pi / mu`` for its member, in
        which case the entry is the total volume.

    Returns
    -------
    list of dict
        Rows with ``label``, ``mu``, ``R``, ``R_effective``, ``captured`` and
        ``total`` (the volume of ``g_u``), in input order.
    """
    rows = []
    for u in family:
        total = volume(u)
        for R in R_list:
            captured, R_eff = captured_volume(u, R)
            rows.append({"label": u.label, "mu": rescale(u, 0.0).mu, "R": float(R),
                         "R_effective": float(R_eff), "captured": captured, "total": total})
    return rows


@dataclass(frozen=True)
class RadialBump:
    """``(1 - (s/s0)^2)^power`` for ``s < s0`` and 0 beyond, with derivative."""

    s0: float
    power: int = 4

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        z = np.clip(1 - (s / self.s0) ** 2, 0.0, None)
        return z ** self.power

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        z = np.clip(1 - (s / self.s0) ** 2, 0.0, None)
        return self.power * z ** (self.power - 1) * (-2 * s / self.s0 ** 2)


@dataclass
class LimitRayleighReport:
    """Rescaled quotients along a family.

    ``quotients[k]`` belongs to ``family[k]``; ``c`` are the renormalising
    constants; ``differences`` the successive changes; ``limit`` is the
    Euclidean quotient of the limiting profile when one was supplied.
    """

    quotients: list
    c: list
    mu: list
    differences: list
    limit: Optional[float]
    converged: bool


def _rescaled_quotient(weight_v, a_elem, phi, dphi, eta, s, ws, ve, ge):
    vol = ws * a_elem
    B = weight_v ** ve
    A = weight_v ** ge
    c = np.sum(phi * B * vol) / np.sum(eta[0] * B * vol)
    f = phi - c * eta[0]
    df = dphi - c * eta[1]
    return float(np.sum(df ** 2 * A * vol) / np.sum(f ** 2 * B * vol)), float(c)


def limit_rayleigh_check(family, phi, s0, eta=None, v_limit: Optional[Callable] = None,
                         cauchy_tol=1e-3, order=48):
    """Rescaled Rayleigh quotients of a fixed test function along a family.

    Parameters
    ----------
    family : sequence of ConformalFactor
        Members with their maxima at a pole and ``mu s0 < pi``.
    phi : callable
        Radial test function of ``s`` supported in ``[0, s0]``; must provide
        ``phi.derivative`` (see :class:`RadialBump`).
    s0 : float
        Support radius of ``phi``.
    eta : callable, optional
        Cut-off with support inside that of ``phi`` used for the mean-zero
        correction ``phi - c_k eta``; defaults to ``RadialBump(s0, 3)``.
    v_limit : callable, optional
        Limiting profile; if given the Euclidean quotient is reported.

    Returns
    -------
    LimitRayleighReport
    """
    eta = eta or RadialBump(s0, 3)
    s, ws = _composite(list(np.linspace(0.0, s0, 17)), order)
    ph, dph = phi(s), phi.derivative(s)
    et = (eta(s), eta.derivative(s))
    quotients, cs, mus = [], [], []
    for u in family:
        prof = rescale(u, s0)
        ve, ge = prof.factor.volume_exponent, prof.factor.gradient_exponent
        q, c = _rescaled_quotient(prof.v_at(s), prof.area_element(s), ph, dph, et, s, ws, ve, ge)
        quotients.append(q)
        cs.append(c)
        mus.append(prof.mu)
    diffs = [abs(b - a) for a, b in zip(quotients[:-1], quotients[1:])]
    limit = None
    if v_limit is not None:
        n = family[0].n
        d = family[0].denominator
        elem = sphere_volume(n - 1) * s ** (n - 1)
        limit, _ = _rescaled_quotient(np.asarray(v_limit(s), dtype=float), elem, ph, dph, et,
                                      s, ws, 2 * n / d, 2 * (n - 2) / d)
    converged = bool(diffs) and diffs[-1] <= cauchy_tol
    return LimitRayleighReport(quotients, cs, mus, diffs, limit, converged)


def bubble_limit_profile(n, convention="fourth"):
    """Limit of rescaled bubbles, ``(1 + s^2/4)^{-d/2}``."""
    d = n - 4 if convention == "fourth" else n - 2
    return lambda s: (1 + np.asarray(s, dtype=float) ** 2 / 4) ** (-d / 2)
