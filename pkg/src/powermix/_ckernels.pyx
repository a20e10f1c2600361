# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, log, exp, fabs, fmin

cnp.import_array()

cdef double SMALL_ARG = 1e-8


def monotone_slopes(x, y):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    out = np.empty(n)
    cdef double[::1] m = out
    cdef double hl, hr, dl, dr, par, lim
    if n == 2:
        m[0] = m[1] = (yv[1] - yv[0]) / (xv[1] - xv[0])
        return out
    for k in range(1, n - 1):
        hl = xv[k] - xv[k - 1]
        hr = xv[k + 1] - xv[k]
        dl = (yv[k] - yv[k - 1]) / hl
        dr = (yv[k + 1] - yv[k]) / hr
        if dl * dr <= 0.0:
            m[k] = 0.0
            continue
        par = (hr * dl + hl * dr) / (hl + hr)
        lim = 3.0 * fmin(fabs(dl), fabs(dr))
        if fabs(par) > lim:
            par = lim if par > 0.0 else -lim
        m[k] = par
    m[0] = _end_slope(xv[1] - xv[0], xv[2] - xv[1],
                      (yv[1] - yv[0]) / (xv[1] - xv[0]),
                      (yv[2] - yv[1]) / (xv[2] - xv[1]))
    m[n - 1] = _end_slope(xv[n - 1] - xv[n - 2], xv[n - 2] - xv[n - 3],
                          (yv[n - 1] - yv[n - 2]) / (xv[n - 1] - xv[n - 2]),
                          (yv[n - 2] - yv[n - 3]) / (xv[n - 2] - xv[n - 3]))
    return out


cdef double _end_slope(double h0, double h1, double d0, double d1) nogil:
    cdef double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
    if s * d0 <= 0.0:
        return 0.0
    if fabs(s) > 3.0 * fabs(d0):
        return 3.0 * d0
    return s


cdef inline Py_ssize_t _locate(const double[::1] x, double u) nogil:
    cdef Py_ssize_t lo = 0, hi = x.shape[0] - 1, mid
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if x[mid] <= u:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline double _hermite(const double[::1] x, const double[::1] y,
                            const double[::1] m, double u) nogil:
    cdef Py_ssize_t k = _locate(x, u)
    cdef double h = x[k + 1] - x[k]
    cdef double t = (u - x[k]) / h
    cdef double t2 = t * t
    cdef double t3 = t2 * t
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * y[k]
            + h * ((t3 - 2.0 * t2 + t) * m[k] + (t3 - t2) * m[k + 1])
            + (-2.0 * t3 + 3.0 * t2) * y[k + 1])


def hermite_eval(x, y, m, xq):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    xq_arr = np.asarray(xq, dtype=np.float64)
    flat = np.ascontiguousarray(xq_arr.ravel())
    cdef const double[::1] q = flat
    out = np.empty(flat.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(q.shape[0]):
            o[i] = _hermite(xv, yv, mv, q[i])
    return out.reshape(xq_arr.shape)


def sigma_sum(x, c, m, double scale, s, t, w, double mu, double m2, bint clamp):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t ns = sv.shape[0], nt = tv.shape[0], i, k
    out = np.empty(ns)
    cdef double[::1] o = out
    cdef double xend = xv[xv.shape[0] - 1], ylast = yv[yv.shape[0] - 1]
    cdef double acc, q, u, g, term
    cdef long n_out = 0
    with nogil:
        for i in range(ns):
            acc = 0.0
            for k in range(nt):
                q = tv[k] * sv[i]
                if scale * q < SMALL_ARG:
                    term = sv[i] * (mu - 0.5 * m2 * q)
                else:
                    u = log1p(scale * q)
                    if u > xend * (1.0 + 1e-12):
                        n_out += 1
                        g = ylast if clamp else _hermite(xv, yv, mv, xend)
                    elif u >= xend:
                        g = _hermite(xv, yv, mv, xend)
                    else:
                        g = _hermite(xv, yv, mv, u)
                    term = g / tv[k]
                acc += wv[k] * term
            o[i] = acc
    return out, n_out


def zeta_partial(x, Py_ssize_t nterms, int order):
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    cdef const double[::1] xv = np.ascontiguousarray(xa)
    logn_arr = np.log(np.arange(1, nterms, dtype=np.float64))
    cdef const double[::1] logn = logn_arr
    cdef Py_ssize_t nx = xv.shape[0], i, j
    out = np.empty(nx)
    cdef double[::1] o = out
    cdef double acc, lw
    with nogil:
        for i in range(nx):
            acc = 0.0
            for j in range(logn.shape[0]):
                if order == 0:
                    lw = 1.0
                elif order == 1:
                    lw = logn[j]
                else:
                    lw = logn[j] * logn[j]
                acc += lw * exp(-xv[i] * logn[j])
            o[i] = acc
    return out
