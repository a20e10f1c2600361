"""Riemann zeta function and its first two derivatives for real arguments > 1.

Each of ``zeta``, ``zeta'`` and ``zeta''`` is summed from its own Dirichlet
series (``sum (-log n)^k / n^a``) up to ``NTERMS - 1`` terms, and the tail is
replaced by its Euler-Maclaurin expansion through the B4 term. The tails of
the derivative series are the analytic ``a``-derivatives of the zeta tail.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError

NTERMS = 200
_MIN_ARG = 1.0 + 1e-6


@dataclass(frozen=True)
class ZetaValues:
    a: float
    zeta: float
    dzeta: float
    d2zeta: float
    truncation_error_bound: float


def _check(a):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > _MIN_ARG)):
        raise DomainError(f"zeta argument must exceed 1 + 1e-6, got {a.min()!r}")
    return a


def _tail(a, order, nterms=NTERMS):
    """Euler-Maclaurin tail  sum_{n>=N} (-log n)^order n^{-a}."""
    N = float(nterms)
    L = np.log(N)
    c = a - 1.0
    e1 = np.exp(-c * L)
    na = np.exp(-a * L)
    na1 = na / N
    na3 = na / N ** 3
    P = a * (a + 1.0) * (a + 2.0)
    dP = 3.0 * a * a + 6.0 * a + 2.0
    d2P = 6.0 * a + 6.0
    if order == 0:
        return e1 / c + na / 2.0 + a * na1 / 12.0 - P * na3 / 720.0
    if order == 1:
        return (-e1 * (L / c + 1.0 / c ** 2) - L * na / 2.0
                + na1 * (1.0 - a * L) / 12.0 - (dP - L * P) * na3 / 720.0)
    if order == 2:
        return (e1 * (L * L / c + 2.0 * L / c ** 2 + 2.0 / c ** 3)
                + L * L * na / 2.0 + na1 * (a * L * L - 2.0 * L) / 12.0
                - (d2P - 2.0 * L * dP + L * L * P) * na3 / 720.0)
    raise ValueError("order must be 0, 1 or 2")


def _tail_bound(a, nterms=NTERMS):
    # magnitude of the first omitted (B6) term, widened for the log factors
    N = float(nterms)
    L = np.log(N)
    q = a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0)
    em = 2.0 * q / (42.0 * 720.0) * N ** (-a - 5.0) * (1.0 + L) ** 2
    # rounding in the second-derivative tail, which grows like 2 / (a-1)^3
    c = a - 1.0
    rnd = 16.0 * np.finfo(float).eps * (2.0 / c ** 3 + L * L / c + 10.0)
    return em + rnd


def zeta(a, order=0):
    """``order``-th derivative of the Riemann zeta function at real ``a`` > 1.

    Vectorized over ``a``; returns a float for scalar input.
    """
    arr = _check(a)
    flat = np.atleast_1d(arr).ravel()
    sign = -1.0 if order == 1 else 1.0
    val = sign * _kernels.zeta_partial(flat, NTERMS, order) + _tail(flat, order)
    val = val.reshape(arr.shape)
    return float(val) if val.ndim == 0 else val


def zeta_triple(a):
    """Return ``ZetaValues`` (zeta, zeta', zeta'') at ``a`` > 1."""
    a = float(_check(a))
    return ZetaValues(
        a=a,
        zeta=zeta(a, 0),
        dzeta=zeta(a, 1),
        d2zeta=zeta(a, 2),
        truncation_error_bound=float(_tail_bound(a)),
    )


def zeta_transform(a, s):
    """Transform ``zeta(a + s) / zeta(a)`` of the Riemann-zeta distribution."""
    _check(a)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("zeta_transform requires s >= 0")
    out = zeta(a + s) / zeta(a)
    return out


def zeta_drop(a, x):
    """``zeta(a) - zeta(a + x)`` for ``x >= 0`` without cancellation at small ``x``."""
    a = float(_check(a))
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("zeta_drop requires x >= 0")
    logn = np.log(np.arange(2, NTERMS, dtype=float))
    head = -np.expm1(-np.multiply.outer(x, logn)) @ np.exp(-a * logn)
    out = head + (_tail(a, 0) - _tail(a + x, 0))
    return float(out) if out.ndim == 0 else out
