"""Pure numpy fallback for the three-term recurrence kernels.

Every routine works on ``numpy.longdouble`` arrays and follows the
orthonormal recurrence

    b[k+1] p[k+1](x) = (x - a[k]) p[k](x) - b[k] p[k-1](x),

with ``p[0] = p0`` constant and ``b[0]`` ignored.  The compiled module
``_kernels_c`` exposes the same functions with the same signatures.
"""
import numpy as np

LD = np.longdouble


def project(x, wf, a, b, p0, K):
    """Return ``c[k] = sum_j wf[j] p_k(x[j])`` for ``k = 0..K``."""
    x = np.asarray(x, dtype=LD)
    wf = np.asarray(wf, dtype=LD)
    out = np.empty(K + 1, dtype=LD)
    pm = np.zeros_like(x)
    p = np.full_like(x, p0)
    out[0] = np.dot(wf, p)
    for k in range(K):
        pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1]
        pm, p = p, pn
        out[k + 1] = np.dot(wf, p)
    return out


def evaluate(c, x, a, b, p0, deriv=False):
    """Evaluate ``sum_k c[k] p_k(x)`` (or its x-derivative)."""
    x = np.asarray(x, dtype=LD)
    c = np.asarray(c, dtype=LD)
    K = len(c) - 1
    pm = np.zeros_like(x)
    p = np.full_like(x, p0)
    dpm = np.zeros_like(x)
    dp = np.zeros_like(x)
    s = c[0] * p
    ds = np.zeros_like(x)
    for k in range(K):
        pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1]
        dpn = (p + (x - a[k]) * dp - b[k] * dpm) / b[k + 1]
        pm, p = p, pn
        dpm, dp = dp, dpn
        s += c[k + 1] * p
        ds += c[k + 1] * dp
    return ds if deriv else s


def table(x, a, b, p0, K, deriv=False):
    """Return the ``(K+1, len(x))`` table of ``p_k(x)`` (or derivatives)."""
    x = np.asarray(x, dtype=LD)
    P = np.empty((K + 1, len(x)), dtype=LD)
    D = np.empty((K + 1, len(x)), dtype=LD)
    P[0] = p0
    D[0] = 0
    pm = np.zeros_like(x)
    dpm = np.zeros_like(x)
    for k in range(K):
        P[k + 1] = ((x - a[k]) * P[k] - b[k] * pm) / b[k + 1]
        D[k + 1] = (P[k] + (x - a[k]) * D[k] - b[k] * dpm) / b[k + 1]
        pm = P[k]
        dpm = D[k]
    return D if deriv else P


def christoffel(x, a, b, p0, N):
    """Return ``sum_{k<N} p_k(x)^2`` at every point."""
    x = np.asarray(x, dtype=LD)
    pm = np.zeros_like(x)
    p = np.full_like(x, p0)
    s = p * p
    for k in range(N - 1):
        pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1]
        pm, p = p, pn
        s += p * p
    return s


def polish_nodes(x, a, b, p0, N, iters):
    """Newton-refine approximate zeros of ``p_N`` in place and return them."""
    x = np.array(x, dtype=LD)
    for _ in range(iters):
        pm = np.zeros_like(x)
        p = np.full_like(x, p0)
        dpm = np.zeros_like(x)
        dp = np.zeros_like(x)
        for k in range(N):
            pn = ((x - a[k]) * p - b[k] * pm) / b[k + 1]
            dpn = (p + (x - a[k]) * dp - b[k] * dpm) / b[k + 1]
            pm, p = p, pn
            dpm, dp = dp, dpn
        x -= p / dp
    return x
