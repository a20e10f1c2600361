"""Moments from transforms, and length-biased / equilibrium constructions.

Moments are read off the small-``s`` behaviour of a transform,

    (1 - F(s)) / s             -> E[X]
    (F(s) - 1 + mu s) / s^2    -> E[X^2] / 2,

by Richardson extrapolation over ``s = s0 * 2^-k``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import CapabilityError, DomainError, ExtractionError
from .mixing import MixingDistribution
from .transforms import (Degenerate, ExpMixtureWithAtom, Exponential, Gamma,
                         Transform, TwoPoint, _out)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    levels: int
    error: float

    def __float__(self):
        return self.value


def richardson(values, ratio=2.0, noise=0.0):
    """Extrapolate ``values[k] = g(h0 ratio^-k)`` to ``h -> 0``.

    ``g(h) = L + c1 h + c2 h^2 + ...``. Returns ``(estimate, error, levels)``
    where the estimate is the tableau diagonal with the smallest error
    estimate. Raises ``ExtractionError`` if the error estimate grows at two
    consecutive levels while above ``noise``.
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise ExtractionError("Richardson extrapolation needs at least two values")
    if not all(map(math.isfinite, vals)):
        raise ExtractionError("non-finite value in Richardson tableau")
    prev = vals[:]
    diag = [vals[0]]
    for j in range(1, len(vals)):
        f = ratio ** j
        cur = [None] * len(vals)
        for k in range(j, len(vals)):
            cur[k] = prev[k] + (prev[k] - prev[k - 1]) / (f - 1.0)
        diag.append(cur[j])
        prev = cur
    errs = [abs(diag[j] - diag[j - 1]) for j in range(1, len(diag))]
    grow = 0
    for a, b in zip(errs, errs[1:]):
        grow = grow + 1 if (b > a and b > noise) else 0
        if grow >= 2:
            raise ExtractionError(
                f"Richardson tableau diverges (error estimates {errs!r})")
    best = int(np.argmin(errs))
    return diag[best + 1], errs[best], best + 2


def _scale_of(t, scale):
    if scale is not None:
        return float(scale)
    mu = getattr(t, "mean", None)
    return float(mu) if mu else 1.0


def _eval_error(t):
    # absolute accuracy of one evaluation; sets the tableau noise floor
    return float(getattr(t, "eval_error", 4.0 * _EPS))


def _start(s0, levels):
    if not (s0 > 0 and math.isfinite(s0)) or levels < 1:
        raise DomainError("Richardson start needs s0 > 0 and at least one level")
    return float(s0)


def mean_from_transform(t, s0=None, levels=6, scale=None):
    """First moment as the limit of ``(1 - F(s)) / s``."""
    sc = _scale_of(t, scale)
    s0 = _start(1e-2 / sc if s0 is None else s0, levels)
    h = s0 * 2.0 ** -np.arange(levels + 1)
    g = np.asarray(t.one_minus(h), dtype=float) / h
    noise = 16.0 * _eval_error(t) / h[-1]
    val, err, used = richardson(g, noise=noise)
    return MomentEstimate(val, used, err)


def second_moment_from_transform(t, mu, s0=None, levels=6, scale=None):
    """Second moment as twice the limit of ``(F(s) - 1 + mu s) / s^2``."""
    sc = _scale_of(t, scale if scale is not None else mu)
    s0 = _start(1e-2 / sc if s0 is None else s0, levels)
    h = s0 * 2.0 ** -np.arange(levels + 1)
    g = (mu * h - np.asarray(t.one_minus(h), dtype=float)) / h ** 2
    noise = 16.0 * _eval_error(t) / h[-1] ** 2
    val, err, used = richardson(g, noise=noise)
    return MomentEstimate(2.0 * val, used, 2.0 * err)


# --- laws given by a mixing distribution --------------------------------------

@dataclass(frozen=True, eq=False)
class LawTransform(Transform):
    """Transform view of a ``MixingDistribution``."""

    law: MixingDistribution

    @property
    def mean(self):
        return self.law.moment(1)

    @property
    def m2(self):
        return self.law.moment(2)

    def evaluate(self, s):
        return self.law.lst(s)

    def one_minus(self, s):
        s_arr = np.asarray(s, dtype=float)
        t, w = self.law.nodes()
        val = -np.expm1(-np.multiply.outer(s_arr, t)) @ w
        return _out(s, val)

    def moment(self, k):
        return self.law.moment(k) if k else 1.0

    def sample(self, n, rng):
        return self.law.sample(n, rng)


def as_transform(d):
    if isinstance(d, MixingDistribution):
        return LawTransform(d)
    if isinstance(d, Transform):
        return d
    raise CapabilityError(f"cannot view {type(d).__name__} as a transform")


# --- length-biased law ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LengthBiased(Transform):
    """Law with density ``x f(x) / mu``; transform ``-F'(s) / mu``."""

    base: Transform
    mu: float

    @property
    def eval_error(self):
        # finite differences are accurate to about 1e-9; analytic ones to rounding
        return 4.0 * _EPS if hasattr(self.base, "derivative") else 1e-9

    @property
    def mean(self):
        return self.base.moment(2) / self.mu

    @property
    def m2(self):
        try:
            return self.base.moment(3) / self.mu
        except CapabilityError:
            return None

    def moment(self, k):
        return self.base.moment(k + 1) / self.mu if k else 1.0

    def evaluate(self, s):
        if isinstance(self.base, LawTransform):
            t, w = self.base.law.nodes()
            return (np.exp(-np.multiply.outer(s, t)) @ (w * t)) / self.mu
        if hasattr(self.base, "derivative"):
            return -np.asarray(self.base.derivative(s)) / self.mu
        # five-point central difference, one-sided near zero
        h = 1e-3 * np.maximum(s, 1e-3 / _scale_of(self.base, None))
        lo = np.maximum(s - 2 * h, 0.0)
        fwd = lo == 0.0
        F = self.base
        cen = (F(s - 2 * h * ~fwd) - 8 * F(s - h * ~fwd) + 8 * F(s + h) - F(s + 2 * h)) / (12 * h)
        one = (-25 * F(s) + 48 * F(s + h) - 36 * F(s + 2 * h) + 16 * F(s + 3 * h)
               - 3 * F(s + 4 * h)) / (12 * h)
        return -np.where(fwd, one, cen) / self.mu

    def sample(self, n, rng):
        if hasattr(self.base, "sample_length_biased"):
            return self.base.sample_length_biased(n, rng)
        if isinstance(self.base, LawTransform):
            return _biased_rejection(self.base.law, n, rng)
        raise CapabilityError(f"no length-biased sampler for {type(self.base).__name__}")


def _biased_rejection(law, n, rng):
    # envelope x f(x) <= x_max f_max over the proposal law itself
    if law.atoms and any(loc > 0 for loc, _ in law.atoms) and law.pieces:
        raise CapabilityError("length-biased sampling of mixed atom/density laws")
    if not law.pieces:
        locs = np.array([l for l, _ in law.atoms])
        mass = np.array([m for _, m in law.atoms]) * locs
        return locs[rng.choice(locs.size, size=n, p=mass / mass.sum())]
    xmax = law.t_max
    out = np.empty(0)
    while out.size < n:
        m = 2 * (n - out.size) + 16
        x = law.sample(m, rng)
        keep = rng.random(m) < x / xmax
        out = np.concatenate([out, x[keep]])
    return out[:n]


def length_biased(d, mu=None):
    """Length-biased law of ``d`` (density ``x f(x) / mu``).

    Closed forms: Exponential -> Gamma(2), Gamma(a, b) -> Gamma(a + 1, b),
    point masses to themselves, and the exponential mixture with an atom at 0
    to Gamma(2, 1/beta). Other laws are wrapped.
    """
    t = as_transform(d)
    mu = t.mean if mu is None else float(mu)
    if mu is None or not mu > 0:
        raise DomainError("length-biased law requires a mean in (0, inf)")
    if isinstance(t, Exponential):
        return Gamma(2.0, t.mu)
    if isinstance(t, Gamma):
        return Gamma(t.a + 1.0, t.b)
    if isinstance(t, Degenerate):
        return Degenerate(t.c)
    if isinstance(t, ExpMixtureWithAtom):
        return Gamma(2.0, 1.0 / t.beta)
    if isinstance(t, TwoPoint):
        return Degenerate(t.location)
    return LengthBiased(t, mu)


# --- equilibrium law ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Equilibrium(Transform):
    """Equilibrium law: density ``(1 - F(x)) / mu``, transform ``(1 - F(s)) / (mu s)``."""

    base: Transform
    mu: float

    @property
    def mean(self):
        return self.moment(1)

    @property
    def m2(self):
        try:
            return self.moment(2)
        except CapabilityError:
            return None

    def moment(self, k):
        if k == 0:
            return 1.0
        return self.base.moment(k + 1) / ((k + 1) * self.mu)

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        safe = np.where(s == 0, 1.0, s)
        val = np.asarray(self.base.one_minus(safe)) / (self.mu * safe)
        return np.where(s == 0, 1.0, val)

    def sample(self, n, rng):
        # X* = U * Z with Z length-biased and U uniform on (0, 1)
        z = length_biased(self.base, self.mu).sample(n, rng)
        return rng.random(n) * z


def equilibrium(d, mu=None):
    """First-order equilibrium law of ``d``."""
    t = as_transform(d)
    mu = t.mean if mu is None else float(mu)
    if mu is None or not mu > 0:
        raise DomainError("equilibrium law requires a mean in (0, inf)")
    return Equilibrium(t, mu)


def equilibrium_iterate(d, k):
    """k-th order equilibrium law; requires the k-th moment of ``d``."""
    t = as_transform(d)
    try:
        mk = t.moment(k)
    except CapabilityError:
        raise DomainError(f"k-th order equilibrium needs m_{k}, which is not available") from None
    if not (mk is not None and math.isfinite(mk) and mk > 0):
        raise DomainError(f"k-th order equilibrium needs finite positive m_{k}")
    out = t
    for _ in range(k):
        out = equilibrium(out)
    return out
