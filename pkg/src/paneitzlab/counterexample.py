"""Collapsing factors with bounded Q-curvature in L^p.

The family ``u_eps = 1 - eps cos(theta)`` consists of degree-one zonal
functions, so the round Paneitz operator acts on it by
``P u = c_n u - n(n + a_n)`` and the Q-curvature of ``g_eps = u^{4/(n-4)} g``
is explicit.  As ``eps -> 1`` the factor vanishes at the north pole while
``||Q||_{L^p(g_eps)}`` stays bounded for ``p`` in the window
``(n/4, n^2/(2(n+4)))``.

All integrals are computed with composite Gauss-Legendre rules on panels
that halve towards the pole, which resolves the scale ``sqrt(1 - eps)`` of
the collapse and the integrable endpoint singularity at ``eps = 1``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .conformal import ConformalFactor
from .geometry import check_dimension, sphere_volume
from .kernels import gauss_legendre
from .paneitz import paneitz_constants

REFINE_RTOL = 1e-9
FAIL_RTOL = 5e-3


def _u(n, eps, theta):
    # equal to 1 - eps cos(theta) without cancellation near the pole
    return (1 - eps) + 2 * eps * np.sin(theta / 2) ** 2


def u_eps(n, eps):
    """The factor ``1 - eps cos(theta)``.

    Parameters
    ----------
    n : int
    eps : float
        In ``[0, 1)``; ``eps = 0`` gives the round metric.

    Raises
    ------
    ValueError
        For ``eps`` outside ``[0, 1)``.
    """
    n = check_dimension(n)
    eps = float(eps)
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    return ConformalFactor(lambda th: _u(n, eps, th), n, "fourth", f"u_eps({eps:g})")


def paneitz_of_u_eps(n, eps, theta):
    """``P u_eps = c_n u_eps - n (n + a_n)`` on the round sphere."""
    k = paneitz_constants(n)
    return k.c * _u(n, eps, theta) - n * (n + k.a)


def q_from_u(n, u):
    """Q-curvature of ``g_eps`` expressed through the value ``u`` of ``u_eps``."""
    k = paneitz_constants(n)
    u = np.asarray(u, dtype=float)
    return 2 / (n - 4) * (k.c * u ** (-8 / (n - 4)) - n * (n + k.a) * u ** (-(n + 4) / (n - 4)))


def q_closed_form(n, eps, theta):
    """Closed-form Q-curvature of ``g_eps`` at colatitude ``theta``.

    Examples
    --------
    >>> float(q_closed_form(5, 0.5, np.pi / 2))
    13.125
    """
    n = check_dimension(n)
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    return q_from_u(n, _u(n, eps, np.asarray(theta, dtype=float)))


def admissible_p_window(n):
    """Open interval ``(n/4, n^2/(2(n+4)))`` of exponents with bounded norms."""
    n = check_dimension(n)
    return n / 4, n * n / (2 * (n + 4))


def volume_lower_bound(n):
    """``(1/2)^{2n/(n-4)} V(S^n minus B(pole, pi/3))``.

    On the complement of the cap ``u_eps >= 1/2`` for every ``eps``.
    """
    n = check_dimension(n)
    x, w = gauss_legendre(64)
    th = math.pi / 3 + (math.pi - math.pi / 3) * (x + 1) / 2
    cap_free = sphere_volume(n - 1) * np.sum(w * (math.pi / 3) * np.sin(th) ** (n - 1))
    return 0.5 ** (2 * n / (n - 4)) * float(cap_free)


def q_zero_angle(n, eps):
    """Colatitude where ``Q_eps`` changes sign, or ``None``.

    ``Q`` vanishes exactly where ``u = n (n + a_n) / c_n``.
    """
    k = paneitz_constants(n)
    u0 = n * (n + k.a) / k.c
    if eps == 0:
        return None
    s2 = (u0 - (1 - eps)) / (2 * eps)
    if not 0 < s2 < 1:
        return None
    return 2 * math.asin(math.sqrt(s2))


def _graded_rule(depth, order, extra=()):
    # panels [pi 2^-(j+1), pi 2^-j] for j < depth plus [0, pi 2^-depth],
    # split at the extra breakpoints (kinks of the integrand)
    x, w = gauss_legendre(order)
    edges = [0.0] + [math.pi * 2.0 ** -j for j in range(depth, -1, -1)]
    edges = sorted(set(edges) | {e for e in extra if 0 < e < math.pi})
    th, wt = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        th.append(a + (b - a) * (x + 1) / 2)
        wt.append(w * (b - a) / 2)
    return np.concatenate(th), np.concatenate(wt)


def _depth_for(eps):
    # resolve the collapse scale sqrt(1 - eps) by ~12 halvings below it
    scale = math.sqrt(max(1 - eps, 1e-300))
    return int(min(60, max(8, math.ceil(math.log2(math.pi / scale)) + 12)))


def _integrate(integrand, eps, rtol=REFINE_RTOL, start_order=24, max_rounds=5, extra=()):
    """Integrate ``integrand(theta)`` over ``[0, pi]`` with graded refinement.

    Returns the value and the relative disagreement of the last refinement.
    """
    depth, order = _depth_for(eps), start_order
    th, wt = _graded_rule(depth, order, extra)
    prev = float(np.sum(wt * integrand(th)))
    rel = math.inf
    for _ in range(max_rounds):
        depth = min(depth + 12, 80) if eps == 1 else depth + 4
        order *= 2 if order < 96 else 1
        th, wt = _graded_rule(depth, order, extra)
        val = float(np.sum(wt * integrand(th)))
        rel = abs(val - prev) / max(abs(val), 1e-300)
        prev = val
        if rel < rtol:
            break
    return prev, rel


def _norm_density(n, eps, p):
    # |Q|^p u^{2n/(n-4)} sin^{n-1} with the powers of u merged, which keeps
    # the eps = 1 integrand finite down to theta ~ 1e-300
    k = paneitz_constants(n)
    d = n - 4
    power = 2 * n / d - p * (n + 4) / d

    def density(th):
        u = _u(n, eps, th)
        return ((2 / d) * np.abs(k.c * u - n * (n + k.a))) ** p * u ** power * np.sin(th) ** (n - 1)
    return density


def _norm_integral(n, eps, p):
    integrand = _norm_density(n, eps, p)

    zero = q_zero_angle(n, eps)
    val, rel = _integrate(integrand, eps, extra=() if zero is None else (zero,))
    return sphere_volume(n - 1) * val, rel


def lp_norm(n, eps, p):
    """``||Q_eps||_{L^p(g_eps)}`` by graded quadrature, ``eps in [0, 1]``.

    Raises
    ------
    RuntimeError
        If successive refinements disagree by more than 0.5%.
    """
    val, rel = _norm_integral(n, eps, p)
    if rel > FAIL_RTOL:
        raise RuntimeError(f"quadrature not converged for eps={eps}, p={p}: "
                           f"refinement disagreement {rel:.2e}")
    return val ** (1 / p)


def limit_lp_norm(n, p):
    """Norm of the ``eps = 1`` endpoint, ``u = 1 - cos(theta)``.

    Raises
    ------
    ValueError
        For ``p`` at or above the upper end of the window, where the integral
        diverges at the pole.
    """
    n = check_dimension(n)
    if p >= admissible_p_window(n)[1]:
        raise ValueError(f"the eps = 1 integral diverges for p >= {admissible_p_window(n)[1]:.6g}")
    return lp_norm(n, 1.0, p)


def truncated_limit_integral(n, p, theta_min, order=48):
    """``int_{theta > theta_min} |Q|^p dV`` at ``eps = 1``.

    Grows without bound as ``theta_min -> 0`` exactly when ``p`` is at or
    above the window.
    """
    density = _norm_density(n, 1.0, p)
    x, w = gauss_legendre(order)
    depth = max(1, math.ceil(math.log2(math.pi / theta_min)))
    edges = [theta_min] + [math.pi * 2.0 ** -j for j in range(depth - 1, -1, -1)]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        th = a + (b - a) * (x + 1) / 2
        total += np.sum(w * (b - a) / 2 * density(th))
    return float(sphere_volume(n - 1) * total)


def volume_eps(n, eps):
    """Volume of ``g_eps`` by graded quadrature."""
    ve = 2 * n / (n - 4)
    val, _ = _integrate(lambda th: _u(n, eps, th) ** ve * np.sin(th) ** (n - 1), eps)
    return sphere_volume(n - 1) * val


def sup_q(n, eps):
    """``max |Q_eps|``.

    ``Q`` depends on ``theta`` only through ``u``, which sweeps
    ``[1 - eps, 1 + eps]`` monotonically, so the maximum is taken over a fine
    grid in ``u`` including both ends and the interior critical point.
    """
    k = paneitz_constants(n)
    lo, hi = 1 - eps, 1 + eps
    u = np.concatenate([np.geomspace(lo, hi, 4001) if lo > 0 else np.linspace(0, hi, 4001)[1:],
                        [lo, hi]])
    crit = (n + 4) * n * (n + k.a) / (8 * k.c)
    if lo < crit < hi:
        u = np.append(u, crit)
    if lo == 0:
        return math.inf
    return float(np.max(np.abs(q_from_u(n, u))))


@dataclass(frozen=True)
class SweepRow:
    eps: float
    volume: float
    min_u: float
    lp_norm_q: float
    sup_q: float
    lambda1: float = math.nan


def sweep(n, p, eps_list, with_lambda1=False, lmax=8):
    """Tabulate volume, ``min u``, ``||Q||_p`` and ``sup |Q|`` along ``eps``.

    Parameters
    ----------
    n : int
    p : float
    eps_list : sequence of float
        Strictly increasing values in ``(0, 1)``.
    with_lambda1 : bool
        Also report ``lambda_1(g_eps)``.

    Returns
    -------
    list of SweepRow
        In the order of ``eps_list``.
    """
    n = check_dimension(n)
    eps_list = [float(e) for e in eps_list]
    if any(not 0 < e < 1 for e in eps_list):
        raise ValueError("eps values must lie in (0, 1)")
    if any(b <= a for a, b in zip(eps_list[:-1], eps_list[1:])):
        raise ValueError("eps values must be strictly increasing")
    rows = []
    for e in eps_list:
        lam = math.nan
        if with_lambda1:
            from .spectrum import lambda1_sphere
            lam = lambda1_sphere(u_eps(n, e), lmax=lmax).lambda1
        rows.append(SweepRow(eps=e, volume=volume_eps(n, e), min_u=1 - e,
                             lp_norm_q=lp_norm(n, e, p), sup_q=sup_q(n, e), lambda1=lam))
    return rows
