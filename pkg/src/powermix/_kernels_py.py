"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one-for-one and are used whenever the compiled
extension is unavailable (or ``POWERMIX_PURE=1`` is set).
"""

import numpy as np

# below this dimensionless argument the (1 - F(ts))/t integrand uses its
# two-term expansion instead of the interpolant
SMALL_ARG = 1e-8


def monotone_slopes(x, y):
    """Node slopes for a shape-preserving cubic Hermite interpolant.

    Three-point (parabolic) slope estimates, passed through the Hyman filter
    so that |m_k| <= 3 min(|d_{k-1}|, |d_k|) and the slope is zero wherever
    the data has a local extremum or a flat segment.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = np.diff(x)
    d = np.diff(y) / h
    m = np.empty(n)
    if n == 2:
        m[:] = d[0]
        return m
    hl, hr = h[:-1], h[1:]
    dl, dr = d[:-1], d[1:]
    par = (hr * dl + hl * dr) / (hl + hr)
    lim = 3.0 * np.minimum(np.abs(dl), np.abs(dr))
    mid = np.sign(par) * np.minimum(np.abs(par), lim)
    mid[dl * dr <= 0.0] = 0.0
    m[1:-1] = mid
    m[0] = _end_slope(h[0], h[1], d[0], d[1])
    m[-1] = _end_slope(h[-1], h[-2], d[-1], d[-2])
    return m


def _end_slope(h0, h1, d0, d1):
    s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
    if s * d0 <= 0.0:
        return 0.0
    if abs(s) > 3.0 * abs(d0):
        return 3.0 * d0
    return s


def hermite_eval(x, y, m, xq):
    """Evaluate the cubic Hermite interpolant with node slopes ``m`` at ``xq``.

    ``xq`` must lie within ``[x[0], x[-1]]``; the caller checks ranges.
    """
    xq = np.asarray(xq, dtype=float)
    k = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
    h = x[k + 1] - x[k]
    t = (xq - x[k]) / h
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y[k] + h * (h10 * m[k] + h11 * m[k + 1]) + h01 * y[k + 1]


def sigma_sum(x, c, m, scale, s, t, w, mu, m2, clamp):
    """Quadrature sum  sum_k w_k (1 - F(t_k s_i)) / t_k  for every ``s_i``.

    ``c`` holds node values of the complement ``1 - F`` and ``m`` its slopes;
    it is interpolated on coordinates ``u = log1p(scale * s)``.
    All ``t_k`` must be positive (atoms at zero are handled by the caller).
    Returns ``(sigma, n_out)`` where ``n_out`` counts arguments beyond the
    last node; with ``clamp`` they take the last node value, otherwise the
    caller must treat ``n_out > 0`` as a range error.
    """
    s = np.asarray(s, dtype=float)
    q = np.multiply.outer(s, t)
    u = np.log1p(scale * q)
    xend = x[-1]
    out = u > xend * (1.0 + 1e-12)
    n_out = int(out.sum())
    u = np.minimum(u, xend)
    g = hermite_eval(x, c, m, u)
    if clamp and n_out:
        g[out] = c[-1]
    term = g / t
    small = scale * q < SMALL_ARG
    if small.any():
        ss = np.broadcast_to(s[:, None], q.shape)[small]
        term[small] = ss * (mu - 0.5 * m2 * q[small])
    return term @ w, n_out


def zeta_partial(x, nterms, order):
    """Partial sums  sum_{n=1}^{nterms-1} (log n)^order n^{-x}  for each ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    logn = np.log(np.arange(1, nterms, dtype=float))
    e = np.exp(-np.multiply.outer(x, logn))
    return e @ (logn ** order)
