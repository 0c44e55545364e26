"""First positive eigenvalue of radial conformal metrics.

For a radial factor the Laplacian of ``g_u`` commutes with rotations about
the polar axis, so its spectrum splits into harmonic sectors: test functions
``f(theta) Y_l(omega)`` with ``Y_l`` a degree-l spherical harmonic on
``S^{n-1}``.  Each sector gives a one-dimensional weighted problem

    N(f) = int (f'^2 + l(l+n-2) f^2 / sin^2) A sin^{n-1} dtheta,
    M(f) = int f^2 B sin^{n-1} dtheta,

with ``A`` the gradient weight and ``B`` the volume density of ``g_u``.
Sectors are discretised with ``f = sin^l(theta) g(cos theta)`` and ``g`` in
the orthonormal Jacobi basis matched to the sector, which reproduces the
round spectrum exactly.

The module also houses the Euclidean quotient used for weights on R^n, the
logarithmic cut-off functions and the volume-concentration probe.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space

from .conformal import ConformalFactor, normalize_volume, volume
from .geometry import LD, RadialField, analyze, make_grid, sphere_volume
from .kernels import gauss_legendre, jacobi_family
from .moebius import balance_parameter, dilate

TIE_TOL = 1e-7


def sector_multiplicity(l, n):
    """Dimension of degree-l spherical harmonics on ``S^{n-1}``."""
    if l == 0:
        return 1
    return (2 * l + n - 2) * math.comb(l + n - 3, l) // (n - 2)


@dataclass
class SectorProblem:
    """Stiffness and mass matrices of one harmonic sector.

    ``constraint`` is the vector ``int g_i B`` for the mean-zero condition in
    the ``l = 0`` sector and ``None`` otherwise.  ``basis`` evaluates the
    radial basis functions at given colatitudes (rows: basis index).
    """

    l: int
    stiffness: np.ndarray
    mass: np.ndarray
    constraint: Optional[np.ndarray]
    basis: Callable = field(repr=False)

    def reduced(self):
        """Matrices restricted to the constraint subspace, and its basis."""
        if self.constraint is None:
            Z = np.eye(len(self.mass))
        else:
            Z = null_space(self.constraint[None, :])
        return Z.T @ self.stiffness @ Z, Z.T @ self.mass @ Z, Z

    def solve(self, rcond=1e-13):
        """Smallest admissible eigenvalue and its coefficient vector.

        The mass matrix is diagonalised first and directions with relative
        mass below ``rcond`` are discarded, which keeps nearly dependent
        bases (high sectors on short intervals) usable.
        """
        N, M, Z = self.reduced()
        mvals, mvecs = np.linalg.eigh(M)
        keep = mvals > rcond * mvals[-1]
        if not np.any(keep):
            raise np.linalg.LinAlgError(f"sector l={self.l}: mass matrix is numerically zero")
        T = mvecs[:, keep] / np.sqrt(mvals[keep])
        H = T.T @ N @ T
        vals, vecs = np.linalg.eigh(0.5 * (H + H.T))
        return float(vals[0]), Z @ (T @ vecs[:, 0])


def assemble_sector(A, B, n, l, K, quad_K=None):
    """Assemble the sector problem on the sphere.

    Parameters
    ----------
    A, B : callable
        Gradient and volume weights as functions of ``theta``.
    n : int
    l : int
        Sector index.
    K : int
        Number of radial basis functions.
    quad_K : int, optional
        Quadrature truncation; default ``2K + 2l + 64``.
    """
    quad_K = quad_K or 2 * K + 2 * l + 64
    grid = make_grid(n, quad_K)
    x = grid.x
    a = l + (n - 2) / 2
    fam = jacobi_family(a, a, K + 2)
    G = np.asarray(fam.table(x, K - 1), dtype=float)
    Gp = np.asarray(fam.table(x, K - 1, deriv=True), dtype=float)
    xf = np.asarray(x, dtype=float)
    s2 = np.asarray(1 - x * x, dtype=float)
    w = np.asarray(grid.weights, dtype=float) * grid.sigma.astype(float)
    Av = np.asarray(A(grid.theta), dtype=float)
    Bv = np.asarray(B(grid.theta), dtype=float)
    if l == 0:
        WN = w * Av * s2
        N = (Gp * WN) @ Gp.T
    else:
        D = l * xf * G - s2 * Gp
        WN = w * Av * s2 ** (l - 1)
        N = (D * WN) @ D.T + l * (l + n - 2) * (G * WN) @ G.T
    WM = w * Bv * s2 ** l
    M = (G * WM) @ G.T
    constraint = (G @ (w * Bv)) if l == 0 else None

    def basis(theta):
        theta = np.asarray(theta, dtype=LD)
        vals = fam.table(np.cos(theta), K - 1)
        return np.asarray(vals * np.sin(theta) ** l, dtype=float)

    return SectorProblem(l, 0.5 * (N + N.T), 0.5 * (M + M.T), constraint, basis)


@dataclass
class SpectralReport:
    """Result of a first-eigenvalue computation.

    Attributes
    ----------
    lambda1 : float
    sector : int
        Minimising harmonic sector; among numerically tied sectors the one
        with the largest multiplicity.
    multiplicity : int
        Total multiplicity of ``lambda1`` over tied sectors.
    sector_minima : tuple of float
        Smallest admissible eigenvalue of every scanned sector.
    ties : tuple of int
        Sectors within ``TIE_TOL`` (relative) of the minimum.
    lmax : int
    K : int
        Radial basis size.
    refinement_delta : float
        ``|lambda1(K) - lambda1(K/2)|``.
    profile : RadialField or None
        Radial part of the eigenfunction on a 128-degree grid, scaled to
        ``max |f| = 1`` and positive at its largest magnitude.
    t_star : float
        Recentring dilation used (1 if none).
    warning : str or None
    extra : dict
        Method-specific diagnostics.
    """

    lambda1: float
    sector: int
    multiplicity: int
    sector_minima: tuple
    ties: tuple
    lmax: int
    K: int
    refinement_delta: float
    profile: Optional[RadialField] = None
    t_star: float = 1.0
    warning: Optional[str] = None
    extra: dict = field(default_factory=dict)


def _scan(build, lmax, K, n):
    minima = []
    vectors = []
    problems = []
    for l in range(lmax + 1):
        prob = build(l, K)
        lam, vec = prob.solve()
        minima.append(lam)
        vectors.append(vec)
        problems.append(prob)
    lo = min(minima)
    ties = tuple(l for l, v in enumerate(minima) if abs(v - lo) <= TIE_TOL * abs(lo))
    sector = max(ties, key=lambda l: (sector_multiplicity(l, n), -l))
    mult = sum(sector_multiplicity(l, n) for l in ties)
    return lo, sector, mult, tuple(minima), ties, problems[sector], vectors[sector]


def _report(build, lmax, K, n, profile_map, t_star=1.0, extra=None):
    if lmax < 2:
        raise ValueError("lmax must be at least 2")
    lam, sector, mult, minima, ties, prob, vec = _scan(build, lmax, K, n)
    coarse = _scan(build, lmax, max(K // 2, 8), n)[0]
    warning = None
    if sector == lmax or lmax in ties:
        warning = f"minimum attained at the largest scanned sector l={lmax}"
        warnings.warn(warning, RuntimeWarning, stacklevel=3)
    profile = profile_map(prob, vec) if profile_map else None
    return SpectralReport(lambda1=lam, sector=sector, multiplicity=mult, sector_minima=minima,
                          ties=ties, lmax=lmax, K=K, refinement_delta=abs(lam - coarse),
                          profile=profile, t_star=t_star, warning=warning, extra=extra or {})


def _normalise_profile(vals):
    vals = np.asarray(vals, dtype=float)
    i = int(np.argmax(np.abs(vals)))
    if vals[i] == 0:
        return vals
    return vals / vals[i]


def lambda1_sphere(u, lmax=8, K=64, recentre=True):
    """First positive eigenvalue of ``(S^n, g_u)``.

    Parameters
    ----------
    u : ConformalFactor
        Positive factor in either convention.
    lmax : int
        Largest sector scanned, at least 2.
    K : int
        Radial basis size per sector (matrices are at most ``K x K``).
    recentre : bool
        Pull ``u`` back by the dilation that balances its volume measure
        before assembling.  This is an isometry, so the spectrum is unchanged,
        and it keeps the weights of concentrated factors well resolved.

    Returns
    -------
    SpectralReport
    """
    if K > 512:
        raise ValueError("basis size is limited to 512")
    n = u.n
    u.field(make_grid(n, 64))
    t_star = 1.0
    w = u
    if recentre:
        t_star, _ = balance_parameter(u.volume_density, n)
        w = u.pullback(1.0 / t_star)
    ge, ve = LD(w.gradient_exponent), LD(w.volume_exponent)

    def A(th):
        return w(th) ** ge

    def B(th):
        return w(th) ** ve

    def build(l, k):
        return assemble_sector(A, B, n, l, k)

    out_grid = make_grid(n, 128)

    def profile_map(prob, vec):
        th = out_grid.theta
        if t_star != 1.0:
            th = dilate(th, LD(t_star))
        return RadialField(out_grid, _normalise_profile(vec @ prob.basis(th)))

    return _report(build, lmax, K, n, profile_map, t_star)


def rayleigh_quotient(u, phi):
    """Rayleigh quotient of a zonal test function for the metric ``g_u``.

    ``phi`` is corrected to mean zero with respect to ``dV_{g_u}`` before the
    quotient ``int |grad phi|^2 A / int phi^2 B`` is formed.  Integrals use
    adaptive quadrature with ``phi`` interpolated spectrally.

    Raises
    ------
    ValueError
        If the corrected function vanishes.
    """
    from .geometry import adaptive_integrate
    n = u.n
    c = analyze(phi)
    ge, ve = LD(u.gradient_exponent), LD(u.volume_exponent)

    def integ(f):
        return adaptive_integrate(f, n, K0=64, Kmax=4096, rtol=1e-14)[0]

    mass = integ(lambda th: u(th) ** ve)
    mean = integ(lambda th: c(th) * u(th) ** ve) / mass
    den = integ(lambda th: (c(th) - LD(mean)) ** 2 * u(th) ** ve)
    num = integ(lambda th: c.derivative(th) ** 2 * u(th) ** ge)
    if not den > 1e-28 * mass:
        raise ValueError("test function is constant after the mean-zero correction")
    return num / den


# -- Euclidean quotient ------------------------------------------------------------

def round_weight_euclidean(r, n):
    """Stereographic factor ``(2 / (1 + r^2))^{(n-2)/2}`` of the round metric."""
    r = np.asarray(r)
    return (2 / (1 + r * r)) ** ((n - 2) / 2)


@dataclass
class EuclideanWeight:
    """Radial weight ``w(|y|)`` on R^n for the weighted Euclidean quotient.

    The quotient is ``int w^2 |grad v|^2 dy / int w^{2n/(n-2)} v^2 dy`` over
    compactly supported ``v`` with ``int v w^{2n/(n-2)} dy = 0``.

    Attributes
    ----------
    func : callable
        ``r -> w(r) >= 0``.
    n : int
    label : str
    """

    func: Callable
    n: int
    label: str = ""

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    @classmethod
    def round(cls, n):
        return cls(lambda r: round_weight_euclidean(r, n), n, "round")

    @classmethod
    def from_samples(cls, r, w, n, label="samples"):
        """Cubic-spline weight through samples on ``[0, r_max]``, zero beyond."""
        from scipy.interpolate import CubicSpline
        r = np.asarray(r, dtype=float)
        spline = CubicSpline(r, np.asarray(w, dtype=float))
        rmax = r[-1]

        def func(x):
            x = np.asarray(x, dtype=float)
            return np.where(x <= rmax, np.maximum(spline(np.minimum(x, rmax)), 0.0), 0.0)
        return cls(func, n, label)

    @classmethod
    def from_factor(cls, u):
        """Weight whose metric is the pullback of ``g_u`` by stereographic projection."""
        U = u.to_convention("second")
        n = u.n

        def func(r):
            theta = 2 * np.arctan(np.asarray(r, dtype=float))
            return np.asarray(U(theta), dtype=float) * round_weight_euclidean(r, n)
        return cls(func, n, f"stereo({u.label})")

    def scaled(self, c):
        f = self.func
        return EuclideanWeight(lambda r: c * f(r), self.n, f"{c:g}*{self.label}")

    def mass(self, R):
        """``int_{|y| < R} w^{2n/(n-2)} dy`` computed on the sphere side."""
        n = self.n
        Theta = 2 * math.atan(R)
        th, wq = _legendre_on(0.0, Theta, 256)
        U = self.func(np.tan(th / 2)) / ((1 + np.cos(th)) ** ((n - 2) / 2))
        return float(sphere_volume(n - 1) * np.sum(wq * U ** (2 * n / (n - 2)) * np.sin(th) ** (n - 1)))


def _legendre_on(a, b, N):
    x, w = gauss_legendre(N)
    return a + (b - a) * (x + 1) / 2, w * (b - a) / 2


def _euclidean_sector(weight, n, l, K, Theta):
    xT = math.cos(Theta)
    Nq = 2 * K + 2 * l + 96
    th, wq = _legendre_on(0.0, Theta, Nq)
    x = np.cos(th)
    s = np.sin(th)
    U = weight(np.tan(th / 2)) / ((1 + x) ** ((n - 2) / 2))
    A = U * U
    B = U ** (2 * n / (n - 2))
    xi = 2 * (x - xT) / (1 - xT) - 1
    fam = jacobi_family(l + (n - 2) / 2, 2.0, K + 2)
    q = np.asarray(fam.table(np.asarray(xi, dtype=LD), K - 1), dtype=float)
    qp = np.asarray(fam.table(np.asarray(xi, dtype=LD), K - 1, deriv=True), dtype=float)
    qp = qp * (2 / (1 - xT))
    h = (x - xT) * q
    hp = q + (x - xT) * qp
    # f = sin^l h(x); f' = l sin^{l-1} cos h - sin^{l+1} h'
    fp = (l * s ** (l - 1) * x if l > 0 else 0.0) * h - s ** (l + 1) * hp
    f = s ** l * h
    vol = wq * s ** (n - 1) * sphere_volume(n - 1)
    N = (fp * vol * A) @ fp.T
    if l > 0:
        N += l * (l + n - 2) * ((f / s) * vol * A) @ (f / s).T
    M = (f * vol * B) @ f.T
    constraint = (f @ (vol * B)) if l == 0 else None

    def basis(theta):
        theta = np.asarray(theta, dtype=float)
        xx = np.cos(theta)
        z = 2 * (xx - xT) / (1 - xT) - 1
        qq = np.asarray(fam.table(np.asarray(z, dtype=LD), K - 1), dtype=float)
        out = np.sin(theta) ** l * (xx - xT) * qq
        return np.where(theta <= Theta, out, 0.0)

    return SectorProblem(l, 0.5 * (N + N.T), 0.5 * (M + M.T), constraint, basis)


def lambda1_euclidean(w, lmax=8, R_max=50.0, K=48):
    """Weighted first eigenvalue on R^n for a radial weight.

    The problem is transported to the sphere by stereographic projection
    (``|y| = tan(theta/2)``) and solved sector by sector on the cap
    ``|y| <= R_max`` with a zero boundary value built into the basis.  The
    computation is repeated with ``2 R_max``.

    Returns
    -------
    SpectralReport
        ``extra`` holds ``lambda1_2R``, ``R_max`` and the weight masses
        ``mass_R`` and ``mass_2R``.

    Raises
    ------
    RuntimeError
        If the values at ``R_max`` and ``2 R_max`` differ by more than 1%.
    """
    n = w.n
    reports = []
    for R in (R_max, 2 * R_max):
        Theta = 2 * math.atan(R)

        def build(l, k, Theta=Theta):
            return _euclidean_sector(w, n, l, k, Theta)

        reports.append(_report(build, lmax, K, n, None))
    first, second = reports
    rel = abs(first.lambda1 - second.lambda1) / abs(second.lambda1)
    if rel > 0.01:
        raise RuntimeError(f"Euclidean eigenvalue not converged in R_max: "
                           f"{first.lambda1:.6g} vs {second.lambda1:.6g}")
    first.extra = {"lambda1_2R": second.lambda1, "R_max": float(R_max),
                   "relative_change": rel, "mass_R": w.mass(R_max),
                   "mass_2R": w.mass(2 * R_max)}
    return first


# -- cut-off functions -------------------------------------------------------------

def cutoff_eta_R(r, R):
    """Logarithmic cut-off on R^n: 1 for ``|y| < r``, 0 for ``|y| > R``.

    Returns a callable of ``|y|``.
    """
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    L = math.log(r / R)

    def eta(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            mid = np.log(np.maximum(s, 1e-300) / R) / L
        return np.where(s < r, 1.0, np.where(s > R, 0.0, mid))
    return eta


def gradient_n_integral_closed(r, R, n):
    """``sigma_{n-1} log(R/r)^{1-n}``."""
    return sphere_volume(n - 1) * math.log(R / r) ** (1 - n)


def gradient_n_integral(r, R, n, panels=None, order=32):
    """Quadrature of ``int_{R^n} |grad eta_R|^n dy``.

    The integrand ``sigma_{n-1} |eta'(s)|^n s^{n-1}`` lives on the annulus
    ``r < s < R`` and is integrated by composite Gauss-Legendre on
    geometrically graded panels; compare with
    :func:`gradient_n_integral_closed`.
    """
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    L = math.log(R / r)
    panels = panels or max(8, int(math.ceil(math.log2(R / r))) * 2)
    edges = r * (R / r) ** (np.arange(panels + 1) / panels)
    x, wq = gauss_legendre(order)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = a + (b - a) * (x + 1) / 2
        grad = 1.0 / (s * L)
        total += np.sum(wq * (b - a) / 2 * grad ** n * s ** (n - 1))
    return float(sphere_volume(n - 1) * total)


def cutoff_eta_rR_sphere(r, R, grid):
    """Sample the geodesic cut-off ``eta_{r,R}`` centred at the north pole."""
    if not 0 < r < R < math.pi:
        raise ValueError("need 0 < r < R < pi")
    th = np.asarray(grid.theta, dtype=float)
    L = math.log(r / R)
    with np.errstate(divide="ignore"):
        mid = np.log(th / R) / L
    vals = np.where(th < r, 1.0, np.where(th > R, 0.0, mid))
    return RadialField(grid, vals)


def _pieces(breaks, order=64):
    x, wq = gauss_legendre(order)
    th, ww = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        th.append(a + (b - a) * (x + 1) / 2)
        ww.append(wq * (b - a) / 2)
    return np.concatenate(th), np.concatenate(ww)


def _cap_breaks(radius):
    # panels halving towards the pole resolve densities concentrated there
    return [0.0] + list(radius * 2.0 ** -np.arange(40, -1, -1))


def sphere_cutoff_gradient_n(r, R, n):
    """``int_{S^n} |grad eta_{r,R}|^n dV`` by quadrature on ``[r, R]``."""
    L = math.log(R / r)
    th, wq = _pieces(list(np.geomspace(r, R, 17)))
    return float(sphere_volume(n - 1) * np.sum(wq * (1 / (th * L)) ** n * np.sin(th) ** (n - 1)))


def ball_volume(u, radius):
    """``V_{g_u}(B(pole, radius))`` with ``radius`` measured in the round metric."""
    n = u.n
    if radius >= math.pi:
        return volume(u)
    th, wq = _pieces(_cap_breaks(radius))
    dens = np.asarray(u.volume_density(th), dtype=float)
    return float(sphere_volume(n - 1) * np.sum(wq * dens * np.sin(th) ** (n - 1)))


def alpha_rR(u, r, R):
    """``int eta_{r,R} dV_{g_u}`` for the geodesic cut-off at the north pole."""
    n = u.n
    L = math.log(r / R)
    inner = ball_volume(u, r)
    th, wq = _pieces(list(np.geomspace(r, R, 9)))
    dens = np.asarray(u.volume_density(th), dtype=float)
    ann = sphere_volume(n - 1) * np.sum(wq * np.log(th / R) / L * dens * np.sin(th) ** (n - 1))
    return float(inner + ann)


def dirichlet_cutoff_energy(u, r, R):
    """``int A |grad eta_{r,R}|^2 dV`` with ``A`` the gradient weight of ``u``."""
    n = u.n
    L = math.log(R / r)
    th, wq = _pieces(list(np.geomspace(r, R, 17)))
    A = np.asarray(u.gradient_density(th), dtype=float)
    return float(sphere_volume(n - 1) * np.sum(wq * A / (th * L) ** 2 * np.sin(th) ** (n - 1)))


@dataclass(frozen=True)
class VolumeProbe:
    """One row of the volume-concentration probe.

    ``bound`` is the explicit constant
    ``sigma_n^{2 + (n-2)/n} sigma_{n-1}^{2/n} / lambda1`` obtained from the
    Rayleigh quotient of ``eta - alpha/sigma_n`` and Hoelder's inequality;
    ``energy_bound`` is the intermediate estimate
    ``sigma_n^2 / lambda1 * int A |grad eta|^2``.
    """

    r: float
    R: float
    v_r: float
    v_R: float
    alpha: float
    lhs: float
    normalized_ratio: float
    energy_bound: float
    bound: float
    lambda1: float
    gap_ok: Optional[bool] = None


def volume_inequality_probe(u, r, R, Lambda=None, lambda1=None, lmax=8):
    """Evaluate both sides of the volume-concentration inequality.

    Parameters
    ----------
    u : ConformalFactor
        Factor with volume ``sigma_n`` (checked to 1e-8).
    r, R : float
        Radii with ``0 < r < R < pi``.
    Lambda : float, optional
        Gap parameter; when given, ``gap_ok`` records whether
        ``lambda1 >= n + 1/Lambda`` (the strict-gap hypothesis).  The bound
        itself only uses ``lambda1 > 0``.
    lambda1 : float, optional
        First eigenvalue of ``g_u``; computed when omitted.

    Returns
    -------
    VolumeProbe
    """
    if not 0 < r < R < math.pi:
        raise ValueError("need 0 < r < R < pi")
    n = u.n
    sigma = sphere_volume(n)
    vol = volume(u)
    if abs(vol - sigma) > 1e-8 * sigma:
        raise ValueError(f"factor must have volume sigma_n (got {vol:.12g})")
    if lambda1 is None:
        lambda1 = lambda1_sphere(u, lmax=lmax).lambda1
    v_r = ball_volume(u, r)
    v_R = ball_volume(u, R)
    lhs = v_r ** 2 * (sigma - v_R)
    L = math.log(R / r)
    ratio = lhs * L ** (2 * (n - 1) / n)
    bound = sigma ** (2 + (n - 2) / n) * sphere_volume(n - 1) ** (2 / n) / lambda1
    energy = sigma ** 2 / lambda1 * dirichlet_cutoff_energy(u, r, R)
    return VolumeProbe(r=float(r), R=float(R), v_r=v_r, v_R=v_R, alpha=alpha_rR(u, r, R),
                       lhs=lhs, normalized_ratio=ratio, energy_bound=energy, bound=bound,
                       lambda1=float(lambda1),
                       gap_ok=None if Lambda is None else bool(lambda1 >= n + 1 / Lambda))
