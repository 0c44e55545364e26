"""Conformal factors on S^n and their curvature invariants.

A conformal factor ``u > 0`` defines ``g_u = u^{4/(n-4)} g_round`` in the
fourth-order convention or ``g_u = u^{4/(n-2)} g_round`` in the second-order
convention.  Q-curvature follows the covariance law

    P_round(u) = (n-4)/2 * Q_{g_u} * u^{(n+4)/(n-4)}.

Strongly concentrated factors (Moebius bubbles with large parameter) have a
dynamic range that no fixed-precision spectral computation can absorb.  For
those, quantities that are invariant under conformal diffeomorphisms
(Q as a function, the L^p norm of Q, the Paneitz energy) are computed after
pulling ``u`` back by the Moebius dilation that balances its volume measure.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (LD, adaptive_integrate, analyze, check_dimension,
                       make_grid, resolve, sphere_volume, RadialField)
from .moebius import balance_parameter, dilate, dilation_factor, pullback
from .paneitz import paneitz_apply, paneitz_constants

CONVENTIONS = ("fourth", "second")
POSITIVITY_FLOOR = 1e-12
# factors whose expansion is resolved to rounding level by this degree are
# handled directly; the rest are recentred first
DIRECT_DEGREE = 64


class ConformalFactor:
    """A positive radial conformal factor on S^n.

    Parameters
    ----------
    func : callable
        ``theta -> u(theta)``; must accept ``numpy.longdouble`` arrays.
    n : int
        Sphere dimension.
    convention : {"fourth", "second"}
        Exponent family: ``g_u = u^{4/(n-4)} g`` or ``u^{4/(n-2)} g``.
    label : str
        Free-form description used in reports.
    """

    def __init__(self, func, n, convention="fourth", label=""):
        if convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        self.func = func
        self.n = check_dimension(n)
        self.convention = convention
        self.label = label

    def __repr__(self):
        return f"ConformalFactor({self.label or 'custom'}, n={self.n}, {self.convention})"

    def __call__(self, theta):
        return self.func(np.asarray(theta, dtype=LD))

    @property
    def denominator(self):
        """Exponent ``d`` with ``g_u = u^{4/d} g``."""
        return self.n - 4 if self.convention == "fourth" else self.n - 2

    @property
    def volume_exponent(self):
        """Exponent of ``u`` in the volume density, ``2n/d``."""
        return 2 * self.n / self.denominator

    @property
    def gradient_exponent(self):
        """Exponent of ``u`` weighting ``|grad f|^2`` in Dirichlet integrals."""
        return 2 * (self.n - 2) / self.denominator

    @property
    def pullback_exponent(self):
        """Exponent of the Moebius factor in pullbacks, ``d/2``."""
        return self.denominator / 2

    def field(self, grid):
        """Sample on a grid, checking positivity."""
        f = grid.sample(self.func)
        if f.min() <= POSITIVITY_FLOOR:
            raise ValueError(f"conformal factor is not positive (min {f.min():.3e})")
        return f

    def volume_density(self, theta):
        return self(theta) ** LD(self.volume_exponent)

    def gradient_density(self, theta):
        return self(theta) ** LD(self.gradient_exponent)

    def scaled(self, c):
        """The factor ``c * u``."""
        func = self.func
        c = LD(c)
        return ConformalFactor(lambda th: c * func(th), self.n, self.convention,
                               f"{c:.6g}*{self.label}")

    def to_convention(self, convention):
        """Same metric expressed in another exponent family."""
        if convention == self.convention:
            return self
        other = ConformalFactor(lambda th: th, self.n, convention)
        power = LD(other.denominator) / LD(self.denominator)
        func = self.func
        return ConformalFactor(lambda th: func(th) ** power, self.n, convention, self.label)

    def pullback(self, t):
        """Factor of ``delta_t^* g_u`` (an isometric copy of ``g_u``)."""
        func = pullback(self.func, t, LD(self.pullback_exponent))
        return ConformalFactor(func, self.n, self.convention, f"pullback({self.label}, {t:.6g})")


def round_factor(n, convention="fourth"):
    """The factor ``u = 1`` of the round metric."""
    return ConformalFactor(lambda th: np.ones_like(th, dtype=LD), n, convention, "round")


def moebius_factor(t, n=5, convention="fourth"):
    """Factor of the pulled-back round metric ``delta_t^* g = phi_t^2 g``.

    ``u_t = phi_t^{(n-4)/2}`` (fourth order) or ``phi_t^{(n-2)/2}`` (second
    order).  For ``t > 1`` it concentrates at ``theta = 0`` with
    ``max u_t = t^{(n-4)/2}``.
    """
    if not t > 0:
        raise ValueError("dilation parameter must be positive")
    u = round_factor(n, convention)
    e = LD(u.pullback_exponent)
    tt = LD(t)
    return ConformalFactor(lambda th: dilation_factor(th, tt) ** e, n, convention, f"bubble(t={t:g})")


def dumbbell_factor(n=5, a=9.0, b=10.0, convention="fourth", normalize=True):
    """Factor ``1 + a exp(-b sin^2 theta)``, heavy at both poles.

    With ``normalize`` the result is scaled to volume ``sigma_n``.
    """
    if a < 0 or b <= 0:
        raise ValueError("need a >= 0 and b > 0")
    aa, bb = LD(a), LD(b)
    u = ConformalFactor(lambda th: 1 + aa * np.exp(-bb * np.sin(th) ** 2), n, convention,
                        f"dumbbell(a={a:g}, b={b:g})")
    return normalize_volume(u) if normalize else u


def factor_from_field(field, convention="fourth", label="field"):
    """Wrap a :class:`RadialField` (interpolated spectrally) as a factor."""
    coeffs = analyze(field)
    return ConformalFactor(coeffs, field.grid.n, convention, label)


# -- integrals ---------------------------------------------------------------

def _integrate(func, n, what):
    val, err, ok = adaptive_integrate(func, n, K0=64, Kmax=8192, rtol=1e-14)
    if not ok:
        warnings.warn(f"{what}: quadrature not converged (last change {err:.2e})",
                      RuntimeWarning, stacklevel=3)
    return val


def _sign_changes(func, n, samples=4097):
    """Roots of ``func`` in ``(0, pi)`` located by sampling and Brent's method."""
    from scipy.optimize import brentq
    th = np.linspace(0.0, np.pi, samples)
    vals = np.asarray(func(th), dtype=float)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(lambda x: float(func(np.array([x]))[0]), th[i], th[i + 1],
                            xtol=1e-15, rtol=1e-15))
    return roots


def _integrate_piecewise(func, n, breaks, what, rtol=1e-14, order=32, max_panels=4096):
    """Integrate ``func dV_round`` with Gauss-Legendre panels in theta.

    The panel layout respects ``breaks`` (kinks of ``func``) and is refined
    by doubling until two successive values agree to ``rtol``.
    """
    from .kernels import gauss_legendre
    x, w = gauss_legendre(order)
    x = x.astype(LD)
    w = w.astype(LD)
    edges = np.array(sorted({0.0, np.pi, *breaks}), dtype=LD)
    sigma = LD(sphere_volume(n - 1))

    def rule(m):
        total = LD(0)
        for a, b in zip(edges[:-1], edges[1:]):
            sub = np.linspace(a, b, m + 1)
            lo, hi = sub[:-1, None], sub[1:, None]
            th = (lo + (hi - lo) * (x + 1) / 2).ravel()
            wt = ((hi - lo) / 2 * w).ravel()
            total += np.sum(wt * func(th) * np.sin(th) ** (n - 1))
        return sigma * total

    m = 4
    prev = rule(m)
    while m < max_panels:
        m *= 2
        val = rule(m)
        if abs(val - prev) <= rtol * abs(val):
            return float(val)
        prev = val
    warnings.warn(f"{what}: piecewise quadrature not converged", RuntimeWarning, stacklevel=3)
    return float(prev)


def volume(u):
    """Volume of ``g_u``: ``int u^{2n/d} dV_round``, adaptively integrated."""
    u.field(make_grid(u.n, 64))
    return _integrate(u.volume_density, u.n, "volume")


def normalize_volume(u):
    """Scale ``u`` so that ``g_u`` has the volume of the unit sphere."""
    c = (sphere_volume(u.n) / volume(u)) ** (1 / u.volume_exponent)
    out = u.scaled(c)
    out.label = u.label
    return out


# -- Q-curvature ---------------------------------------------------------------

class SpectralFrame:
    """Zonal expansion of a factor, possibly after Moebius recentring.

    Attributes
    ----------
    u : ConformalFactor
        The original factor (fourth-order convention).
    t : float
        Parameter of the recentring dilation; ``1`` means no recentring.
        The factor actually expanded is ``w = delta_{1/t}^* u``.
    w : ConformalFactor
    coeffs, p_coeffs : ZonalCoeffs
        Expansion of ``w`` and of ``P(w)``.
    converged : bool
        Whether the expansion reached rounding level.
    """

    def __init__(self, u, recentre="auto"):
        u = u.to_convention("fourth")
        u.field(make_grid(u.n, 64))
        self.u = u
        direct_ok = False
        if recentre in ("auto", False):
            kmax = DIRECT_DEGREE if recentre == "auto" else 2048
            coeffs, direct_ok = resolve(u.func, u.n, K0=64, Kmax=kmax)
            if recentre is False:
                if not direct_ok:
                    warnings.warn("factor not resolved at K=2048", RuntimeWarning,
                                  stacklevel=2)
                self.converged = direct_ok
                direct_ok = True
        elif recentre is not True:
            raise ValueError("recentre must be True, False or 'auto'")
        if direct_ok:
            self.converged = getattr(self, "converged", True)
            self.t = 1.0
            self.w = u
            self.coeffs = coeffs
        else:
            self.t, _ = balance_parameter(u.volume_density, u.n)
            self.w = u.pullback(1.0 / self.t)
            self.coeffs, ok = resolve(self.w.func, u.n, K0=64, Kmax=2048)
            self.converged = ok
            if not ok:
                warnings.warn("recentred factor not resolved at K=2048", RuntimeWarning,
                              stacklevel=2)
        self.p_coeffs = paneitz_apply(self.coeffs)

    def q_frame(self, theta):
        """Q of ``g_w`` at ``theta``."""
        n = self.u.n
        theta = np.asarray(theta, dtype=LD)
        w = self.w(theta)
        return LD(2) / (n - 4) * w ** (-LD(n + 4) / (n - 4)) * self.p_coeffs(theta)

    def q(self, theta):
        """Q of ``g_u`` at ``theta``; equals ``Q_w(delta_t theta)``."""
        theta = np.asarray(theta, dtype=LD)
        if self.t == 1.0:
            return self.q_frame(theta)
        return self.q_frame(dilate(theta, LD(self.t)))


def q_curvature(u, grid=None, recentre="auto"):
    """Q-curvature of ``g_u`` sampled on a grid.

    Parameters
    ----------
    u : ConformalFactor
        Positive factor; a second-order factor is converted to the
        fourth-order convention first (same metric).
    grid : RadialGrid, optional
        Output grid, default ``make_grid(u.n, 128)``.
    recentre : {"auto", True, False}
        ``False`` applies P to ``u`` itself.  ``True`` first pulls ``u`` back
        by the dilation that balances its volume measure and uses
        ``Q_u = Q_w o delta_t``.  ``"auto"`` recentres only when ``u`` is not
        resolved to rounding level by degree 64.

    Returns
    -------
    RadialField
    """
    grid = grid or make_grid(u.n, 128)
    frame = SpectralFrame(u, recentre)
    return RadialField(grid, frame.q(grid.theta))


def lp_norm_q(u, p, recentre="auto"):
    """``(int |Q_{g_u}|^p dV_{g_u})^{1/p}``.

    The integral is invariant under pullback by conformal diffeomorphisms,
    so it is evaluated in the frame chosen by :class:`SpectralFrame`.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    frame = SpectralFrame(u, recentre)
    w = frame.w
    vexp = LD(w.volume_exponent)
    # |Q|^p has kinks where Q changes sign; splitting there restores
    # spectral convergence of the panel rule
    kinks = _sign_changes(frame.q_frame, u.n)
    val = _integrate_piecewise(lambda th: np.abs(frame.q_frame(th)) ** LD(p) * w(th) ** vexp,
                               u.n, kinks, "lp_norm_q")
    return val ** (1.0 / p)


def energy(u, recentre="auto"):
    """Paneitz energy ``int u P(u) dV_round`` via Parseval.

    The energy is invariant under Moebius pullback, so it is summed from the
    coefficients of whichever frame resolves ``u``.
    """
    frame = SpectralFrame(u, recentre)
    c = frame.coeffs.coeffs
    m = paneitz_constants(u.n).multipliers(len(c) - 1)
    sigma = make_grid(u.n, 8).sigma
    return float(sigma * np.sum(m * c * c))


def l2_norm_squared(u):
    """``int u^2 dV_round``."""
    return _integrate(lambda th: u(th) ** 2, u.n, "l2 norm")


# -- covariance ----------------------------------------------------------------

def moebius_covariance_residual(t, phi, relative=True):
    """Residual of the Paneitz covariance law under a Moebius dilation.

    Compares ``P(u_t * (phi o delta_t))`` with
    ``u_t^{(n+4)/(n-4)} * (P phi) o delta_t`` on the nodes of ``phi``'s
    grid, where ``u_t`` is :func:`moebius_factor`.  The left side is
    expanded adaptively (long double, up to degree 2048) before P is applied.

    Parameters
    ----------
    t : float
        Dilation parameter.
    phi : RadialField
        Band-limited test function.
    relative : bool
        Divide the sup-norm difference by ``max(1, sup |rhs|)``.  The right
        side grows like ``t^{(n+4)/2}``, so an absolute residual would ask
        for more digits than the arithmetic carries.

    Returns
    -------
    float
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if t == 1:
        return 0.0
    grid = phi.grid
    n = grid.n
    pc = analyze(phi)
    ppc = paneitz_apply(pc)
    tt = LD(t)
    e = LD(n - 4) / 2

    def product(th):
        return dilation_factor(th, tt) ** e * pc(dilate(th, tt))

    coeffs, ok = resolve(product, n, K0=64, Kmax=2048)
    if not ok:
        warnings.warn("covariance: product not resolved at K=2048", RuntimeWarning,
                      stacklevel=2)
    th = grid.theta
    lhs = paneitz_apply(coeffs)(th)
    rhs = dilation_factor(th, tt) ** (LD(n + 4) / 2) * ppc(dilate(th, tt))
    diff = float(np.max(np.abs(lhs - rhs)))
    if relative:
        diff /= max(1.0, float(np.max(np.abs(rhs))))
    return diff


# -- the class E_{Lambda,p} ----------------------------------------------------------

@dataclass(frozen=True)
class ClassReport:
    """Outcome of :func:`class_membership`.

    ``is_member`` is the conjunction of ``volume_ok``, ``q_norm_ok`` and
    ``gap_ok``.  ``paneitz_nonnegative`` records whether ``P(u) >= 0`` on the
    sampled nodes; it is reported but does not enter ``is_member``.
    """

    volume: float
    q_lp_norm: float
    lambda1: float
    is_member: bool
    p: float
    Lambda: float
    volume_ok: bool
    q_norm_ok: bool
    gap_ok: bool
    paneitz_nonnegative: bool


def class_membership(u, p, Lambda, lmax=8, vol_tol=1e-8, eig_tol=1e-8):
    """Check the three defining conditions of the class ``E_{Lambda,p}``.

    Conditions: ``|vol - sigma_n| <= vol_tol * sigma_n``,
    ``||Q||_{L^p} <= Lambda`` and ``lambda_1 >= n + 1/Lambda - eig_tol``.
    """
    n = u.n
    if not p > n / 4:
        raise ValueError("p must exceed n/4")
    if not Lambda > 0:
        raise ValueError("Lambda must be positive")
    from .spectrum import lambda1_sphere
    sigma = sphere_volume(n)
    vol = volume(u)
    qn = lp_norm_q(u, p)
    lam = lambda1_sphere(u, lmax=lmax).lambda1
    frame = SpectralFrame(u)
    grid = make_grid(n, 128)
    pu = frame.p_coeffs(grid.theta if frame.t == 1.0 else dilate(grid.theta, LD(frame.t)))
    vol_ok = abs(vol - sigma) <= vol_tol * sigma
    q_ok = qn <= Lambda
    gap_ok = lam >= n + 1.0 / Lambda - eig_tol
    return ClassReport(volume=vol, q_lp_norm=qn, lambda1=lam,
                       is_member=bool(vol_ok and q_ok and gap_ok), p=float(p),
                       Lambda=float(Lambda), volume_ok=bool(vol_ok), q_norm_ok=bool(q_ok),
                       gap_ok=bool(gap_ok), paneitz_nonnegative=bool(np.all(pu >= 0)))
