"""Grids, quadrature and zonal transforms on the round sphere S^n.

Radial (zonal) functions on S^n depend on the colatitude ``theta`` only.
With ``x = cos(theta)`` the volume element reduces to
``sigma_{n-1} (1 - x^2)^{(n-2)/2} dx``, so Gauss-Jacobi rules with
``alpha = beta = (n-2)/2`` integrate radial functions and the matching
orthonormal Jacobi (Gegenbauer) polynomials are the zonal harmonics.

Nodes, weights and coefficients are stored in ``numpy.longdouble``.
Functions that return a single number return a Python ``float``.
"""
from functools import lru_cache

import mpmath
import numpy as np

from .kernels import LD, jacobi_family, gauss_jacobi, to_ld

MIN_DIMENSION = 5
MIN_TRUNCATION = 8


def check_dimension(n):
    """Validate a sphere dimension and return it as ``int``."""
    if int(n) != n or n < MIN_DIMENSION:
        raise ValueError(f"dimension must be an integer >= {MIN_DIMENSION}, got {n}")
    return int(n)


@lru_cache(maxsize=None)
def sphere_volume_ld(n):
    """Volume of the unit n-sphere in long double precision."""
    with mpmath.workdps(40):
        val = 2 * mpmath.pi ** (mpmath.mpf(n + 1) / 2) / mpmath.gamma(mpmath.mpf(n + 1) / 2)
    return to_ld(val)


def sphere_volume(n):
    """Volume of the unit round sphere S^n.

    Parameters
    ----------
    n : int
        Sphere dimension, ``n >= 1``.

    Returns
    -------
    float
        ``2 pi^{(n+1)/2} / Gamma((n+1)/2)``.

    Examples
    --------
    >>> round(sphere_volume(5), 5)
    31.00628
    """
    if int(n) != n or n < 1:
        raise ValueError("sphere_volume needs an integer n >= 1")
    return float(sphere_volume_ld(int(n)))


def eigenvalue(k, n):
    """Laplace eigenvalue ``k (k + n - 1)`` of degree-k zonal harmonics."""
    k = np.asarray(k)
    return k * (k + n - 1)


class RadialGrid:
    """Gauss-Gegenbauer grid for zonal functions on S^n.

    Use :func:`make_grid` rather than calling the constructor directly; it
    caches grids per ``(n, K)``.

    Attributes
    ----------
    n : int
        Sphere dimension.
    K : int
        Spectral truncation; the grid has ``K + 1`` nodes.
    theta : ndarray of longdouble
        Colatitudes, strictly increasing in ``(0, pi)``.
    x : ndarray of longdouble
        ``cos(theta)``.
    weights : ndarray of longdouble
        Weights for ``sin^{n-1}(theta) d theta``; ``sigma_{n-1} * sum(weights)``
        equals ``sigma_n``.
    family : JacobiFamily
        Orthonormal zonal polynomials used by the transforms.
    """

    def __init__(self, n, K):
        self.n = check_dimension(n)
        if int(K) != K or K < MIN_TRUNCATION:
            raise ValueError(f"truncation K must be an integer >= {MIN_TRUNCATION}, got {K}")
        self.K = int(K)
        alpha = (self.n - 2) / 2
        x, w = gauss_jacobi(alpha, alpha, self.K + 1)
        x = np.array(x[::-1])
        w = np.array(w[::-1])
        self.x = x
        self.weights = w
        self.theta = np.arccos(x)
        self.family = jacobi_family(alpha, alpha, self.K + 2)
        self.sigma = sphere_volume_ld(self.n - 1)
        for arr in (self.x, self.weights, self.theta):
            arr.setflags(write=False)

    def __repr__(self):
        return f"RadialGrid(n={self.n}, K={self.K})"

    @property
    def size(self):
        return self.K + 1

    def integrate(self, values):
        """Integrate node values over S^n, returning a long double."""
        values = np.asarray(values, dtype=LD)
        return self.sigma * np.dot(self.weights, values)

    def sample(self, func):
        """Evaluate a callable of ``theta`` at the nodes."""
        return RadialField(self, func(self.theta))


@lru_cache(maxsize=32)
def make_grid(n, K=128):
    """Build (or fetch from cache) the radial grid for ``(n, K)``.

    Parameters
    ----------
    n : int
        Sphere dimension, at least 5.
    K : int, optional
        Spectral truncation, at least 8.  Quadrature is exact for
        polynomials in ``cos(theta)`` of degree ``2K + 1``.

    Raises
    ------
    ValueError
        If ``K < 8`` or ``n < 5``.
    """
    return RadialGrid(n, K)


class RadialField:
    """Point values of a zonal function on a :class:`RadialGrid`.

    Supports elementwise arithmetic with scalars and fields on the same grid,
    evaluation at arbitrary colatitudes by spectral interpolation, and
    differentiation in ``theta``.
    """

    __array_priority__ = 100

    def __init__(self, grid, values):
        values = np.array(values, dtype=LD)
        if values.shape != (grid.size,):
            raise ValueError(f"expected {grid.size} node values, got shape {values.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"RadialField({self.grid!r})"

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype or float)

    def _other(self, other):
        if isinstance(other, RadialField):
            if other.grid is not self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return RadialField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RadialField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return RadialField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return RadialField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RadialField(self.grid, self.values / self._other(other))

    def __rtruediv__(self, other):
        return RadialField(self.grid, self._other(other) / self.values)

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def __pow__(self, p):
        return RadialField(self.grid, self.values ** p)

    def map(self, func):
        """Apply ``func`` to the node values."""
        return RadialField(self.grid, func(self.values))

    def __call__(self, theta):
        """Interpolate spectrally at colatitudes ``theta``."""
        return analyze(self)(theta)

    def derivative(self):
        """Return ``d/dtheta`` of the interpolant as a field on the same grid."""
        return analyze(self).derivative_field(self.grid)

    def max(self):
        return float(np.max(self.values))

    def min(self):
        return float(np.min(self.values))


class ZonalCoeffs:
    """Coefficients in the orthonormal zonal basis.

    The degree-k basis function ``p_k(cos theta)`` is orthonormal for
    ``sin^{n-1}(theta) d theta`` on ``[0, pi]`` and satisfies
    ``Delta p_k = k (k + n - 1) p_k`` for the positive Laplacian.

    Parameters
    ----------
    n : int
        Sphere dimension.
    coeffs : array_like
        Coefficients for degrees ``0 .. len(coeffs) - 1``.
    grid : RadialGrid, optional
        Default grid for :func:`synthesize`.
    """

    def __init__(self, n, coeffs, grid=None):
        self.n = check_dimension(n)
        coeffs = np.array(coeffs, dtype=LD)
        if coeffs.ndim != 1 or len(coeffs) == 0:
            raise ValueError("coefficients must be a non-empty vector")
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.grid = grid

    def __repr__(self):
        return f"ZonalCoeffs(n={self.n}, degree={self.degree})"

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def _family(self):
        alpha = (self.n - 2) / 2
        size = max(self.degree + 2, 16)
        # round the size up so that the cache is shared between callers
        size = 1 << (size - 1).bit_length()
        return jacobi_family(alpha, alpha, size)

    def with_coeffs(self, coeffs):
        return ZonalCoeffs(self.n, coeffs, self.grid)

    def __call__(self, theta):
        """Evaluate the expansion at colatitudes ``theta`` (long double)."""
        theta = np.asarray(theta, dtype=LD)
        shape = theta.shape
        vals = self._family().evaluate(self.coeffs, np.cos(theta).ravel())
        return vals.reshape(shape)

    def derivative(self, theta):
        """Evaluate ``d/dtheta`` of the expansion at ``theta``."""
        theta = np.asarray(theta, dtype=LD)
        shape = theta.shape
        th = theta.ravel()
        dx = self._family().evaluate(self.coeffs, np.cos(th), deriv=True)
        return (-np.sin(th) * dx).reshape(shape)

    def derivative_field(self, grid=None):
        grid = grid or self.grid
        return RadialField(grid, self.derivative(grid.theta))

    def tail(self, fraction=0.25):
        """Largest magnitude among the top ``fraction`` of degrees."""
        m = max(1, int(round(fraction * len(self.coeffs))))
        return float(np.max(np.abs(self.coeffs[-m:])))

    def chopped(self, rtol):
        """Zero coefficients below ``rtol * max|c|`` and trim the tail."""
        c = np.array(self.coeffs)
        scale = np.max(np.abs(c))
        c[np.abs(c) < rtol * scale] = 0
        nz = np.nonzero(c)[0]
        last = nz[-1] if len(nz) else 0
        return self.with_coeffs(c[: last + 1])


def integrate_sphere(f, grid=None):
    """Integrate a radial function over S^n.

    Parameters
    ----------
    f : RadialField or callable
        Field on a grid, or a callable of ``theta`` (then ``grid`` is
        required).
    grid : RadialGrid, optional
        Grid to sample a callable on.

    Returns
    -------
    float
        ``sigma_{n-1} * sum_j w_j f(theta_j)``.
    """
    if isinstance(f, RadialField):
        return float(f.grid.integrate(f.values))
    if grid is None:
        raise ValueError("a grid is needed to integrate a callable")
    return float(grid.integrate(f(grid.theta)))


def analyze(f):
    """Project a field onto zonal harmonics of degree ``0 .. K``."""
    g = f.grid
    c = g.family.project(g.x, g.weights * f.values, g.K)
    return ZonalCoeffs(g.n, c, g)


def synthesize(c, grid=None):
    """Evaluate zonal coefficients at the nodes of ``grid`` (default: ``c.grid``)."""
    grid = grid or c.grid
    if grid is None:
        raise ValueError("no grid given and coefficients carry none")
    if grid.n != c.n:
        raise ValueError("dimension mismatch between grid and coefficients")
    return RadialField(grid, c(grid.theta))


def zonal_basis(n, k, grid):
    """Field of the orthonormal degree-k zonal harmonic on ``grid``."""
    c = np.zeros(k + 1, dtype=LD)
    c[k] = 1
    return synthesize(ZonalCoeffs(n, c, grid), grid)


def resolve(func, n, K0=64, Kmax=2048, tail_tol=1e-17, chop=1e-18):
    """Adaptively expand a callable of ``theta`` in zonal harmonics.

    The truncation is doubled from ``K0`` until the top quarter of the
    coefficients falls below ``tail_tol`` relative to the largest one.
    Coefficients below ``chop`` (relative) are then zeroed, so that rounding
    noise is not amplified by high-order operators.

    Returns
    -------
    coeffs : ZonalCoeffs
    converged : bool
        False when ``Kmax`` was reached without meeting ``tail_tol``.
    """
    K = K0
    while True:
        grid = make_grid(n, K)
        c = analyze(grid.sample(func))
        scale = float(np.max(np.abs(c.coeffs)))
        ok = scale == 0 or c.tail() <= tail_tol * scale
        if ok or K >= Kmax:
            return c.chopped(chop), ok
        K *= 2


def adaptive_integrate(func, n, K0=64, Kmax=4096, rtol=1e-14, atol=0.0):
    """Integrate a callable of ``theta`` over S^n with grid doubling.

    The truncation is doubled until two consecutive Gauss rules agree to
    ``max(rtol * |I|, atol)``.

    Returns
    -------
    value : float
        Integral from the finest rule used.
    error : float
        Difference between the last two rules.
    converged : bool
    """
    K = K0
    prev = make_grid(n, K).integrate(func(make_grid(n, K).theta))
    while True:
        K *= 2
        grid = make_grid(n, K)
        cur = grid.integrate(func(grid.theta))
        err = abs(cur - prev)
        if err <= max(rtol * abs(cur), atol):
            return float(cur), float(err), True
        if K >= Kmax:
            return float(cur), float(err), False
        prev = cur
