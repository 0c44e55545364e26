"""Centre of mass, balancing dilations and the Hersch upper bound.

A finite measure ``nu`` on S^n can be moved by a conformal map so that its
Euclidean centre of mass vanishes.  The coordinate functions then become
admissible test functions for ``lambda_1`` and yield ``lambda_1 <= n`` when
``nu`` has the volume of the round sphere.  For radial measures the
balancing map is an axis dilation and the problem is one-dimensional.

The quotient of the coordinate test functions is evaluated on R^n with the
logarithmic cut-off ``eta_R``, in the variable ``s = log |y|``.  In this
variable the round metric is ``sech^2(s) (ds^2 + g_{S^{n-1}})``, the
dilation ``delta_t`` is the shift ``s -> s + log t`` and the axis coordinate
is ``-tanh(s)``, so every ingredient is explicit.
"""
import math
from dataclasses import dataclass

import numpy as np

from .conformal import ConformalFactor, factor_from_field, moebius_factor, volume
from .geometry import LD, RadialField, analyze, sphere_volume
from .kernels import gauss_legendre
from .moebius import MoebiusMap, balance_parameter, pushforward_density
from .spectrum import gradient_n_integral_closed, lambda1_sphere

__all__ = ["MoebiusMap", "moebius_factor", "CenterOfMass", "center_of_mass",
           "balance", "HerschReport", "hersch_quotient", "hersch_bound_check"]

T_RANGE = 1e8


@dataclass(frozen=True)
class CenterOfMass:
    """Centre of mass of a radial measure.

    Attributes
    ----------
    axis : float
        ``int x_{n+1} d nu`` with ``x_{n+1} = cos(theta)``.
    mass : float
        ``nu(S^n)``.
    n : int
    """

    axis: float
    mass: float
    n: int

    @property
    def vector(self):
        """Full vector in R^{n+1}; off-axis components vanish by symmetry."""
        v = np.zeros(self.n + 1)
        v[-1] = self.axis
        return v

    def __abs__(self):
        return abs(self.axis)


def _density(weight, n=None):
    if isinstance(weight, RadialField):
        return analyze(weight), weight.grid.n
    if isinstance(weight, ConformalFactor):
        return weight.volume_density, weight.n
    if n is None:
        raise TypeError("a callable weight needs the dimension n")
    return weight, n


def center_of_mass(weight, n=None):
    """Centre of mass of ``weight * dV`` (unnormalised moment).

    Parameters
    ----------
    weight : RadialField, ConformalFactor or callable
        Non-negative density; a conformal factor contributes its volume
        density.  Callables need ``n``.

    Raises
    ------
    ValueError
        For a measure of zero total mass.
    """
    from .geometry import adaptive_integrate
    density, n = _density(weight, n)
    mass = adaptive_integrate(density, n, Kmax=8192)[0]
    if not mass > 0:
        raise ValueError("weight has zero total mass")
    axis = adaptive_integrate(lambda th: np.cos(th) * density(th), n, Kmax=8192,
                              rtol=0.0, atol=1e-14 * mass)[0]
    return CenterOfMass(float(axis), float(mass), n)


def balance(weight, tol=1e-10, n=None):
    """Axis dilation that centres the measure ``weight * dV``.

    Returns
    -------
    MoebiusMap
        ``delta_t`` whose pushforward of the measure has ``|CoM| <= tol``.

    Raises
    ------
    RuntimeError
        When no dilation with ``t in [1e-8, 1e8]`` balances the measure.
    """
    density, n = _density(weight, n)
    t, _ = balance_parameter(density, n, tol=tol, log_range=math.log(T_RANGE))
    return MoebiusMap(t)


def pushed_center_of_mass(weight, t, n=None):
    """Centre of mass of the pushforward of ``weight * dV`` under ``delta_t``."""
    density, n = _density(weight, n)
    return center_of_mass(pushforward_density(density, t, n), n)


@dataclass(frozen=True)
class HerschReport:
    """Outcome of :func:`hersch_bound_check`.

    Attributes
    ----------
    lambda1 : float
        First eigenvalue from the sector solver.
    bound_satisfied : bool
        ``lambda1 <= n + tol`` and ``lambda1`` does not exceed the test
        function quotient.
    t_star : float
        Balancing dilation.
    com : float
        Residual centre of mass after balancing.
    quotient : float
        Quotient of the cut-off coordinate test functions at ``log_ratio``.
    quotient_limit : float
        Its limit as the cut-off radius grows,
        ``n int U^2 phi^2 dV / sigma_n <= n``.
    log_ratio : float
        ``log(R/r)`` of the cut-off that was used (``r = 1``).
    c_axis : float
        The renormalising constant of the axis coordinate.
    """

    lambda1: float
    bound_satisfied: bool
    t_star: float
    com: float
    quotient: float
    quotient_limit: float
    log_ratio: float
    c_axis: float
    n: int
    tol: float


def _s_nodes(lo, hi, breaks, order=24):
    x, w = gauss_legendre(order)
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    edges = []
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil(b - a)))
        edges.extend(np.linspace(a, b, m + 1)[:-1])
    edges.append(hi)
    s, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s.append(a + (b - a) * (x + 1) / 2)
        ws.append(w * (b - a) / 2)
    return np.concatenate(s), np.concatenate(ws)


def hersch_quotient(U, t_star, L, window=None):
    """Quotient of the test functions ``f_i = eta_R (x_i o psi - c_i)``.

    Parameters
    ----------
    U : ConformalFactor
        Second-order factor of the metric on the sphere.
    t_star : float
        Dilation defining ``psi``.
    L : float or inf
        ``log(R/r)`` with ``r = 1``; ``inf`` gives the limit quotient.
    window : float, optional
        Half-width of the ``s`` interval carrying the measure.

    Returns
    -------
    quotient : float
    c : float
        Renormalising constant of the axis coordinate.

    Notes
    -----
    Summing over all ``n+1`` coordinates, ``sum (x_i - c_i)^2 = 1 - 2cF + c^2``
    with ``F`` the axis coordinate, ``sum |grad x_i o psi|^2 = n phi^2`` and
    the cross terms collapse to ``-c grad F``.  The horizontal constants vanish
    by symmetry.
    """
    n = U.n
    shift = math.log(t_star)
    window = window or 60.0 + abs(shift)
    s, ws = _s_nodes(-window, window, [0.0, -shift] + ([L] if np.isfinite(L) else []))
    theta = 2 * np.arctan(np.exp(s))
    sech = 1 / np.cosh(s)
    dV = sphere_volume(n - 1) * ws * sech ** n
    Uv = np.asarray(U(np.asarray(theta, dtype=LD)), dtype=float)
    A = Uv ** 2
    B = Uv ** (2 * n / (n - 2))
    F = -np.tanh(s + shift)
    Fs = -1 / np.cosh(s + shift) ** 2
    phi = np.cosh(s) / np.cosh(s + shift)
    if np.isfinite(L):
        eta = np.clip(1 - s / L, 0.0, 1.0)
        eta_s = np.where((s > 0) & (s < L), -1 / L, 0.0)
    else:
        eta = np.ones_like(s)
        eta_s = np.zeros_like(s)
    nu = B * dV
    c = np.sum(eta * F * nu) / np.sum(eta * nu)
    spread = 1 - 2 * c * F + c * c
    den = np.sum(eta ** 2 * spread * nu)
    cosh2 = np.cosh(s) ** 2
    num = np.sum(A * dV * (eta_s ** 2 * cosh2 * spread + n * eta ** 2 * phi ** 2
                           - 2 * c * eta * eta_s * cosh2 * Fs))
    return float(num / den), float(c)


def hersch_bound_check(weight, tol=1e-3, lmax=8, K=64, change_tol=1e-4, max_doublings=40):
    """Verify ``lambda_1 <= n`` for a volume-normalised radial weight.

    Parameters
    ----------
    weight : ConformalFactor or RadialField
        Factor of the metric, either convention; a ``RadialField`` is read as
        a second-order factor.  Its volume must equal ``sigma_n``.
    tol : float
        Slack in ``lambda_1 <= n + tol``.
    change_tol : float
        The cut-off ratio ``L = log(R/r)`` is doubled, starting where
        ``sigma_{n-1} L^{1-n}`` drops below ``change_tol``, until the test
        quotient is within ``change_tol`` of its limit.

    Returns
    -------
    HerschReport

    Raises
    ------
    ValueError
        If the weight is not volume normalised.
    RuntimeError
        From the balancing step, or if the cut-off quotient does not settle.
    """
    if isinstance(weight, RadialField):
        weight = factor_from_field(weight, convention="second", label="weight")
    n = weight.n
    sigma = sphere_volume(n)
    vol = volume(weight)
    if abs(vol - sigma) > 1e-8 * sigma:
        raise ValueError(f"weight must have volume sigma_n = {sigma:.12g} (got {vol:.12g})")
    U = weight.to_convention("second")
    t_star, com = balance_parameter(U.volume_density, n, tol=1e-10,
                                    log_range=math.log(T_RANGE))
    limit, _ = hersch_quotient(U, t_star, math.inf)
    L = (sphere_volume(n - 1) / change_tol) ** (1 / (n - 1))
    assert gradient_n_integral_closed(1.0, math.exp(L), n) <= change_tol * (1 + 1e-12)
    for _ in range(max_doublings):
        quotient, c = hersch_quotient(U, t_star, L)
        if abs(quotient - limit) < change_tol:
            break
        L *= 2
    else:
        raise RuntimeError("cut-off quotient did not approach its limit")
    lam = lambda1_sphere(weight, lmax=lmax, K=K).lambda1
    ok = lam <= n + tol and lam <= quotient + 1e-8 * n
    return HerschReport(lambda1=lam, bound_satisfied=bool(ok), t_star=t_star, com=float(com),
                        quotient=quotient, quotient_limit=limit, log_ratio=float(L),
                        c_axis=c, n=n, tol=tol)
