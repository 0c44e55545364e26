# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled long double recurrence kernels.

Same functions and signatures as ``paneitzlab._kernels_py``; see that module
for the recurrence convention.
"""
import numpy as np

LD = np.longdouble


cdef long double _scalar(value):
    # Going through a Python float would truncate to double precision.
    cdef const long double[::1] v = np.asarray([value], dtype=LD)
    return v[0]


def project(x, wf, a, b, p0, Py_ssize_t K):
    cdef const long double[::1] xv = np.ascontiguousarray(x, dtype=LD)
    cdef const long double[::1] wv = np.ascontiguousarray(wf, dtype=LD)
    cdef const long double[::1] av = np.ascontiguousarray(a, dtype=LD)
    cdef const long double[::1] bv = np.ascontiguousarray(b, dtype=LD)
    out = np.zeros(K + 1, dtype=LD)
    cdef long double[::1] ov = out
    cdef long double q0 = _scalar(p0)
    cdef Py_ssize_t j, k, m = xv.shape[0]
    cdef long double pm, p, pn, xj, wj
    for j in range(m):
        xj = xv[j]
        wj = wv[j]
        pm = 0.0
        p = q0
        ov[0] += wj * p
        for k in range(K):
            pn = ((xj - av[k]) * p - bv[k] * pm) / bv[k + 1]
            pm = p
            p = pn
            ov[k + 1] += wj * p
    return out


def evaluate(c, x, a, b, p0, bint deriv=False):
    cdef const long double[::1] cv = np.ascontiguousarray(c, dtype=LD)
    cdef const long double[::1] xv = np.ascontiguousarray(x, dtype=LD)
    cdef const long double[::1] av = np.ascontiguousarray(a, dtype=LD)
    cdef const long double[::1] bv = np.ascontiguousarray(b, dtype=LD)
    cdef Py_ssize_t m = xv.shape[0]
    cdef Py_ssize_t K = cv.shape[0] - 1
    out = np.empty(m, dtype=LD)
    cdef long double[::1] ov = out
    cdef long double q0 = _scalar(p0)
    cdef Py_ssize_t j, k
    cdef long double pm, p, pn, dpm, dp, dpn, s, ds, xj
    for j in range(m):
        xj = xv[j]
        pm = 0.0
        p = q0
        dpm = 0.0
        dp = 0.0
        s = cv[0] * p
        ds = 0.0
        for k in range(K):
            pn = ((xj - av[k]) * p - bv[k] * pm) / bv[k + 1]
            dpn = (p + (xj - av[k]) * dp - bv[k] * dpm) / bv[k + 1]
            pm = p
            p = pn
            dpm = dp
            dp = dpn
            s += cv[k + 1] * p
            ds += cv[k + 1] * dp
        ov[j] = ds if deriv else s
    return out


def table(x, a, b, p0, Py_ssize_t K, bint deriv=False):
    cdef const long double[::1] xv = np.ascontiguousarray(x, dtype=LD)
    cdef const long double[::1] av = np.ascontiguousarray(a, dtype=LD)
    cdef const long double[::1] bv = np.ascontiguousarray(b, dtype=LD)
    cdef Py_ssize_t m = xv.shape[0]
    out = np.empty((K + 1, m), dtype=LD)
    cdef long double[:, ::1] ov = out
    cdef long double q0 = _scalar(p0)
    cdef Py_ssize_t j, k
    cdef long double pm, p, pn, dpm, dp, dpn, xj
    for j in range(m):
        xj = xv[j]
        pm = 0.0
        p = q0
        dpm = 0.0
        dp = 0.0
        ov[0, j] = dp if deriv else p
        for k in range(K):
            pn = ((xj - av[k]) * p - bv[k] * pm) / bv[k + 1]
            dpn = (p + (xj - av[k]) * dp - bv[k] * dpm) / bv[k + 1]
            pm = p
            p = pn
            dpm = dp
            dp = dpn
            ov[k + 1, j] = dp if deriv else p
    return out


def christoffel(x, a, b, p0, Py_ssize_t N):
    cdef const long double[::1] xv = np.ascontiguousarray(x, dtype=LD)
    cdef const long double[::1] av = np.ascontiguousarray(a, dtype=LD)
    cdef const long double[::1] bv = np.ascontiguousarray(b, dtype=LD)
    cdef Py_ssize_t m = xv.shape[0]
    out = np.empty(m, dtype=LD)
    cdef long double[::1] ov = out
    cdef long double q0 = _scalar(p0)
    cdef Py_ssize_t j, k
    cdef long double pm, p, pn, s, xj
    for j in range(m):
        xj = xv[j]
        pm = 0.0
        p = q0
        s = p * p
        for k in range(N - 1):
            pn = ((xj - av[k]) * p - bv[k] * pm) / bv[k + 1]
            pm = p
            p = pn
            s += p * p
        ov[j] = s
    return out


def polish_nodes(x, a, b, p0, Py_ssize_t N, int iters):
    out = np.array(x, dtype=LD)
    cdef long double[::1] xv = out
    cdef const long double[::1] av = np.ascontiguousarray(a, dtype=LD)
    cdef const long double[::1] bv = np.ascontiguousarray(b, dtype=LD)
    cdef Py_ssize_t m = xv.shape[0]
    cdef long double q0 = _scalar(p0)
    cdef Py_ssize_t j, k
    cdef int it
    cdef long double pm, p, pn, dpm, dp, dpn, xj
    for j in range(m):
        xj = xv[j]
        for it in range(iters):
            pm = 0.0
            p = q0
            dpm = 0.0
            dp = 0.0
            for k in range(N):
                pn = ((xj - av[k]) * p - bv[k] * pm) / bv[k + 1]
                dpn = (p + (xj - av[k]) * dp - bv[k] * dpm) / bv[k + 1]
                pm = p
                p = pn
                dpm = dp
                dp = dpn
            xj = xj - p / dp
        xv[j] = xj
    return out
