"""Orthonormal Jacobi recurrences and Gauss rules in extended precision.

The hot loops live in a compiled extension (``_kernels_c``).  When it is
missing, or when the environment variable ``PANEITZLAB_PURE`` is set to a
non-empty value other than ``0``, the numpy implementation in
``_kernels_py`` is used instead.  ``BACKEND`` records which one is active.

All arithmetic is carried out in ``numpy.longdouble``.  On x86-64 Linux this
is the 80-bit extended format (machine epsilon about 1.1e-19), which leaves
three spare digits when fourth-order operators are applied spectrally.
"""
import os
from functools import lru_cache

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

LD = np.longdouble

if os.environ.get("PANEITZLAB_PURE", "") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl
        BACKEND = "python"

project = _impl.project
evaluate = _impl.evaluate
table = _impl.table
christoffel = _impl.christoffel
polish_nodes = _impl.polish_nodes


def to_ld(value):
    """Convert an mpmath number (or anything printable) to long double."""
    return LD(mpmath.nstr(mpmath.mpf(value), 30, strip_zeros=False))


class JacobiFamily:
    """Orthonormal polynomials for the weight ``(1-x)^alpha (1+x)^beta``.

    Parameters
    ----------
    alpha, beta : float
        Jacobi exponents, both greater than -1.  Half-integers and integers
        are represented exactly.
    size : int
        Number of recurrence coefficients to precompute.  Polynomials up to
        degree ``size - 1`` can be evaluated.

    Attributes
    ----------
    a, b : ndarray of longdouble
        Recurrence coefficients; ``b[0]`` is unused and set to 1.
    p0 : longdouble
        The constant polynomial ``1 / sqrt(mu0)``.
    mu0 : longdouble
        Total mass of the weight.
    """

    def __init__(self, alpha, beta, size):
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.size = int(size)
        al = mpmath.mpf(alpha)
        be = mpmath.mpf(beta)
        with mpmath.workdps(40):
            mu0 = (mpmath.mpf(2) ** (al + be + 1) * mpmath.gamma(al + 1)
                   * mpmath.gamma(be + 1) / mpmath.gamma(al + be + 2))
        self.mu0 = to_ld(mu0)
        self.p0 = 1 / np.sqrt(self.mu0)
        A = LD(self.alpha)
        B = LD(self.beta)
        k = np.arange(size + 1, dtype=LD)
        s = 2 * k + A + B
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (B * B - A * A) / (s * (s + 2))
            b2 = 4 * k * (k + A) * (k + B) * (k + A + B) / (s * s * (s + 1) * (s - 1))
        a[0] = (B - A) / (A + B + 2)
        b2[1] = 4 * (1 + A) * (1 + B) / ((2 + A + B) ** 2 * (3 + A + B))
        b = np.sqrt(b2)
        b[0] = 1
        self.a = a
        self.b = b

    def project(self, x, wf, K):
        return project(x, wf, self.a, self.b, self.p0, K)

    def evaluate(self, c, x, deriv=False):
        if len(c) > self.size:
            raise ValueError("coefficient vector longer than the family")
        return evaluate(c, np.atleast_1d(x), self.a, self.b, self.p0, deriv)

    def table(self, x, K, deriv=False):
        return table(np.atleast_1d(x), self.a, self.b, self.p0, K, deriv)

    def gauss(self, N):
        """Return the ``N``-point Gauss rule ``(x, w)``, ``x`` ascending.

        Nodes start from the symmetric tridiagonal eigenvalues in double
        precision and receive three Newton steps on ``p_N`` in long double;
        weights are the reciprocal Christoffel sums, which are free of
        cancellation.
        """
        if N + 1 > self.size:
            raise ValueError("family too small for this rule")
        x0 = eigh_tridiagonal(np.asarray(self.a[:N], dtype=float),
                              np.asarray(self.b[1:N], dtype=float),
                              eigvals_only=True)
        x = polish_nodes(np.asarray(x0, dtype=LD), self.a, self.b, self.p0, N, 3)
        w = 1 / christoffel(x, self.a, self.b, self.p0, N)
        return x, w


@lru_cache(maxsize=64)
def jacobi_family(alpha, beta, size):
    """Cached :class:`JacobiFamily` constructor."""
    return JacobiFamily(alpha, beta, size)


@lru_cache(maxsize=64)
def gauss_jacobi(alpha, beta, N):
    """Cached long double Gauss-Jacobi rule with ``N`` nodes."""
    fam = jacobi_family(alpha, beta, N + 1)
    x, w = fam.gauss(N)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_legendre(N):
    """Double precision Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(N)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
