"""Laplace-Stieltjes transforms: closed-form catalog, algebra and diagnostics.

Every transform is a callable ``F(s) = E[exp(-s X)]`` for ``s >= 0``, vectorized
over numpy arrays. Catalog entries are immutable dataclasses that know their
first two moments and, where a direct construction exists, how to draw samples
of the underlying random variable.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special

from . import zeta as _zeta
from .errors import CapabilityError, DomainError

# hyperbolic-family arguments below this use their Taylor expansions
SERIES_CUTOFF = 1e-2
_LOG2 = math.log(2.0)


def _out(s, val):
    val = np.asarray(val, dtype=float)
    return float(val) if np.ndim(s) == 0 else val


def _log_x_over_sinh(x):
    """log(x / sinh x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    sm = x < SERIES_CUTOFF
    xs = x[sm] ** 2
    out[sm] = -xs / 6.0 + xs ** 2 / 180.0 - xs ** 3 / 2835.0
    xl = x[~sm]
    out[~sm] = np.log(xl) - (xl + np.log1p(-np.exp(-2.0 * xl)) - _LOG2)
    return out


def _dlog_x_over_sinh(x):
    """(d/dx log(x / sinh x)) / x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    sm = x < SERIES_CUTOFF
    xs = x[sm] ** 2
    out[sm] = -1.0 / 3.0 + xs / 45.0 - 2.0 * xs ** 2 / 945.0 + xs ** 3 / 4725.0
    xl = x[~sm]
    out[~sm] = (1.0 - xl / np.tanh(xl)) / xl ** 2
    return out


def _dlog_cosh(x):
    """(d/dx log cosh x) / x = tanh(x) / x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    sm = x < SERIES_CUTOFF
    xs = x[sm] ** 2
    out[sm] = 1.0 - xs / 3.0 + 2.0 * xs ** 2 / 15.0 - 17.0 * xs ** 3 / 315.0
    xl = x[~sm]
    out[~sm] = np.tanh(xl) / xl
    return out


class _LogForm:
    """Mixin for transforms given as ``exp(log_value(s))``; supplies an
    accurate complement and the log-derivative used for length-biasing."""

    def evaluate(self, s):
        return np.exp(self.log_value(s))

    def one_minus(self, s):
        arr = np.asarray(s, dtype=float)
        return _out(s, -np.expm1(self.log_value(arr)))

    def derivative(self, s):
        """``F'(s)``."""
        arr = np.asarray(s, dtype=float)
        return _out(s, np.exp(self.log_value(arr)) * self.dlog(arr))


def _log_cosh(x):
    """log(cosh x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    sm = x < SERIES_CUTOFF
    xs = x[sm] ** 2
    out[sm] = xs / 2.0 - xs ** 2 / 12.0 + xs ** 3 / 45.0
    xl = x[~sm]
    out[~sm] = xl + np.log1p(np.exp(-2.0 * xl)) - _LOG2
    return out


class Transform:
    """Base class for LS-transforms.

    Subclasses implement ``evaluate`` on float arrays. ``mean`` and ``m2`` are
    ``None`` when unknown.
    """

    identifier = None
    mean = None
    m2 = None

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        return _out(s, self.evaluate(np.atleast_1d(arr)).reshape(arr.shape))

    def evaluate(self, s):
        raise NotImplementedError

    def one_minus(self, s):
        """``1 - F(s)``; overridden where a cancellation-free form exists."""
        arr = np.asarray(s, dtype=float)
        return _out(s, 1.0 - self.evaluate(np.atleast_1d(arr)).reshape(arr.shape))

    @property
    def covered(self):
        return (0.0, math.inf)

    def moment(self, k):
        """Raw moment ``E[X^k]`` for k = 0, 1, 2 when declared."""
        if k == 0:
            return 1.0
        val = {1: self.mean, 2: self.m2}.get(k)
        if val is None:
            raise CapabilityError(f"{type(self).__name__} has no closed-form moment {k}")
        return val

    def sample(self, n, rng):
        raise CapabilityError(f"{type(self).__name__} is not sampleable")

    def params(self):
        return {}

    def describe(self):
        """Catalog descriptor ``{identifier: params}``."""
        if self.identifier is None:
            raise CapabilityError(f"{type(self).__name__} has no catalog identifier")
        return {self.identifier: self.params()}


@dataclass(frozen=True)
class Degenerate(Transform):
    """Point mass at ``c``: ``exp(-c s)``."""

    c: float
    identifier = "degenerate"

    def __post_init__(self):
        if not self.c >= 0:
            raise DomainError("Degenerate requires c >= 0")

    @property
    def mean(self):
        return self.c

    @property
    def m2(self):
        return self.c ** 2

    def evaluate(self, s):
        return np.exp(-self.c * s)

    def one_minus(self, s):
        return _out(s, -np.expm1(-self.c * np.asarray(s, dtype=float)))

    def moment(self, k):
        return self.c ** k

    def sample(self, n, rng):
        return np.full(n, float(self.c))

    def params(self):
        return {"c": self.c}


@dataclass(frozen=True)
class Exponential(Transform):
    """Exponential law with mean ``mu``: ``1 / (1 + mu s)``."""

    mu: float
    identifier = "exponential"

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("Exponential requires mu > 0")

    @property
    def mean(self):
        return self.mu

    @property
    def m2(self):
        return 2.0 * self.mu ** 2

    def evaluate(self, s):
        return 1.0 / (1.0 + self.mu * s)

    def one_minus(self, s):
        s = np.asarray(s, dtype=float)
        return _out(s, self.mu * s / (1.0 + self.mu * s))

    def moment(self, k):
        return math.factorial(k) * self.mu ** k

    def sample(self, n, rng):
        return rng.exponential(self.mu, n)

    def params(self):
        return {"mu": self.mu}


@dataclass(frozen=True)
class Gamma(Transform):
    """Gamma law with shape ``a`` and scale ``b``: ``(1 + b s)^(-a)``."""

    a: float
    b: float
    identifier = "gamma"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("Gamma requires a > 0 and b > 0")

    @property
    def mean(self):
        return self.a * self.b

    @property
    def m2(self):
        return self.a * (self.a + 1.0) * self.b ** 2

    def evaluate(self, s):
        return np.exp(-self.a * np.log1p(self.b * s))

    def one_minus(self, s):
        s = np.asarray(s, dtype=float)
        return _out(s, -np.expm1(-self.a * np.log1p(self.b * s)))

    def moment(self, k):
        return self.b ** k * math.exp(math.lgamma(self.a + k) - math.lgamma(self.a))

    def sample(self, n, rng):
        return rng.gamma(self.a, self.b, n)

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class ExpMixtureWithAtom(Transform):
    """Atom of mass ``p`` at zero plus an exponential with rate ``beta``.

    Transform ``p + (1 - p) / (1 + s / beta)``; the mean ``(1 - p) / beta`` is
    stored alongside so that callers built from ``from_mean`` see the exact
    ``mu`` they asked for.
    """

    p: float
    beta: float
    mu: float = field(default=None)
    identifier = "exp_mixture_atom"

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0 and self.beta > 0):
            raise DomainError("ExpMixtureWithAtom requires 0 <= p < 1 and beta > 0")
        if self.mu is None:
            object.__setattr__(self, "mu", (1.0 - self.p) / self.beta)

    @classmethod
    def from_mean(cls, p, mu):
        if not mu > 0:
            raise DomainError("mean must be positive")
        return cls(p=p, beta=(1.0 - p) / mu, mu=mu)

    @property
    def mean(self):
        return self.mu

    @property
    def m2(self):
        return 2.0 * (1.0 - self.p) / self.beta ** 2

    def evaluate(self, s):
        return self.p + (1.0 - self.p) / (1.0 + s / self.beta)

    def one_minus(self, s):
        s = np.asarray(s, dtype=float)
        return _out(s, (1.0 - self.p) * (s / self.beta) / (1.0 + s / self.beta))

    def moment(self, k):
        return (1.0 - self.p) * math.factorial(k) / self.beta ** k

    def sample(self, n, rng):
        x = rng.exponential(1.0 / self.beta, n)
        x[rng.random(n) < self.p] = 0.0
        return x

    def params(self):
        return {"p": self.p, "beta": self.beta}


@dataclass(frozen=True)
class TwoPoint(Transform):
    """Two-point law on {0, m2/m1} with first two moments ``m1``, ``m2``.

    Its transform ``1 - m1^2/m2 + (m1^2/m2) exp(-(m2/m1) s)`` is the sharp upper
    envelope of all transforms with those two moments.
    """

    m1: float
    m2: float
    identifier = "two_point"

    def __post_init__(self):
        if not self.m1 > 0:
            raise DomainError("TwoPoint requires m1 > 0")
        if not self.m2 >= self.m1 ** 2:
            raise DomainError(
                f"TwoPoint requires m2 >= m1^2 (got m1={self.m1!r}, m2={self.m2!r})")

    @property
    def mean(self):
        return self.m1

    @property
    def weight(self):
        return self.m1 ** 2 / self.m2

    @property
    def location(self):
        return self.m2 / self.m1

    def evaluate(self, s):
        return 1.0 - self.weight + self.weight * np.exp(-self.location * s)

    def one_minus(self, s):
        s = np.asarray(s, dtype=float)
        return _out(s, -self.weight * np.expm1(-self.location * s))

    def moment(self, k):
        return self.weight * self.location ** k if k else 1.0

    def sample(self, n, rng):
        return np.where(rng.random(n) < self.weight, self.location, 0.0)

    def params(self):
        return {"m1": self.m1, "m2": self.m2}


def two_point_bound(m1, m2):
    """Two-point transform with moments ``m1``, ``m2`` (requires m2 >= m1^2)."""
    return TwoPoint(float(m1), float(m2))


# --- hyperbolic families --------------------------------------------------

def _gamma_series(rng, n, shape, weights, tail_mean, tail_var, biased=False):
    """Draw  sum_k w_k G_k + R  with G_k ~ Gamma(shape) and a moment-matched
    gamma remainder R.  With ``biased`` one summand (chosen proportionally to
    its mean) is replaced by its size-biased version, which size-biases the sum.
    """
    K = len(weights)
    g = rng.gamma(shape, 1.0, (n, K))
    x = g @ weights
    r_shape = tail_mean ** 2 / tail_var
    r_scale = tail_var / tail_mean
    r = rng.gamma(r_shape, r_scale, n)
    if biased:
        means = np.append(shape * weights, tail_mean)
        pick = rng.choice(K + 1, size=n, p=means / means.sum())
        rows = np.flatnonzero(pick < K)
        k = pick[rows]
        x[rows] += weights[k] * (rng.gamma(shape + 1.0, 1.0, rows.size) - g[rows, k])
        rows = np.flatnonzero(pick == K)
        r[rows] = rng.gamma(r_shape + 1.0, r_scale, rows.size)
    return x + r


SERIES_TERMS = 64


def _series_params(t, offset):
    # weights 2 / (pi^2 (k - offset)^2); tail sums via polygamma
    K = SERIES_TERMS
    k = np.arange(1, K + 1) - offset
    c = 2.0 / math.pi ** 2
    w = c / k ** 2
    z = K + 1 - offset
    tail_mean = t * c * special.polygamma(1, z)
    tail_var = t * c ** 2 * special.polygamma(3, z) / 6.0
    return w, float(tail_mean), float(tail_var)


@dataclass(frozen=True)
class SinhFamily(_LogForm, Transform):
    """``S_t``: ``(sqrt(2s) / sinh sqrt(2s))^t``."""

    t: float
    identifier = "sinh_t"

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("SinhFamily requires t > 0")

    @property
    def mean(self):
        return self.t / 3.0

    @property
    def m2(self):
        return 2.0 * self.t / 45.0 + self.t ** 2 / 9.0

    def log_value(self, s):
        return self.t * _log_x_over_sinh(np.sqrt(2.0 * s))

    def dlog(self, s):
        return self.t * _dlog_x_over_sinh(np.sqrt(2.0 * s))

    def sample(self, n, rng):
        w, m, v = _series_params(self.t, 0.0)
        return _gamma_series(rng, n, self.t, w, m, v)

    def sample_length_biased(self, n, rng):
        w, m, v = _series_params(self.t, 0.0)
        return _gamma_series(rng, n, self.t, w, m, v, biased=True)

    def params(self):
        return {"t": self.t}


@dataclass(frozen=True)
class CoshFamily(_LogForm, Transform):
    """``C_t``: ``(1 / cosh sqrt(2s))^t``."""

    t: float
    identifier = "cosh_t"

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("CoshFamily requires t > 0")

    @property
    def mean(self):
        return self.t

    @property
    def m2(self):
        return 2.0 * self.t / 3.0 + self.t ** 2

    def log_value(self, s):
        return -self.t * _log_cosh(np.sqrt(2.0 * s))

    def dlog(self, s):
        return -self.t * _dlog_cosh(np.sqrt(2.0 * s))

    def sample(self, n, rng):
        w, m, v = _series_params(self.t, 0.5)
        return _gamma_series(rng, n, self.t, w, m, v)

    def sample_length_biased(self, n, rng):
        w, m, v = _series_params(self.t, 0.5)
        return _gamma_series(rng, n, self.t, w, m, v, biased=True)

    def params(self):
        return {"t": self.t}


@dataclass(frozen=True)
class TanhFamily(_LogForm, Transform):
    """``T_t``: ``(tanh sqrt(2s) / sqrt(2s))^t``."""

    t: float
    identifier = "tanh_t"

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("TanhFamily requires t > 0")

    @property
    def mean(self):
        return 2.0 * self.t / 3.0

    @property
    def m2(self):
        return 28.0 * self.t / 45.0 + 4.0 * self.t ** 2 / 9.0

    def log_value(self, s):
        x = np.sqrt(2.0 * s)
        return -self.t * (_log_x_over_sinh(x) + _log_cosh(x))

    def dlog(self, s):
        x = np.sqrt(2.0 * s)
        return -self.t * (_dlog_x_over_sinh(x) + _dlog_cosh(x))

    def params(self):
        return {"t": self.t}


@dataclass(frozen=True)
class ScaledSinhSolution(_LogForm, Transform):
    """``3 mu s / (sinh sqrt(3 mu s))^2``, the law of ``(3 mu / 2) S_2``."""

    mu: float
    identifier = "scaled_sinh"

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("ScaledSinhSolution requires mu > 0")

    @property
    def mean(self):
        return self.mu

    @property
    def m2(self):
        return 1.2 * self.mu ** 2

    def log_value(self, s):
        return 2.0 * _log_x_over_sinh(np.sqrt(3.0 * self.mu * s))

    def dlog(self, s):
        return 3.0 * self.mu * _dlog_x_over_sinh(np.sqrt(3.0 * self.mu * s))

    def sample(self, n, rng):
        return 1.5 * self.mu * SinhFamily(2.0).sample(n, rng)

    def sample_length_biased(self, n, rng):
        return 1.5 * self.mu * SinhFamily(2.0).sample_length_biased(n, rng)

    def params(self):
        return {"mu": self.mu}


@dataclass(frozen=True)
class ScaledCoshSquared(_LogForm, Transform):
    """``(1 / cosh sqrt(mu s))^2``, the law of ``(mu / 2) C_2``."""

    mu: float
    identifier = "cosh2_scaled"

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("ScaledCoshSquared requires mu > 0")

    @property
    def mean(self):
        return self.mu

    @property
    def m2(self):
        return 4.0 * self.mu ** 2 / 3.0

    def log_value(self, s):
        return -2.0 * _log_cosh(np.sqrt(self.mu * s))

    def dlog(self, s):
        return -self.mu * _dlog_cosh(np.sqrt(self.mu * s))

    def sample(self, n, rng):
        return 0.5 * self.mu * CoshFamily(2.0).sample(n, rng)

    def sample_length_biased(self, n, rng):
        return 0.5 * self.mu * CoshFamily(2.0).sample_length_biased(n, rng)

    def params(self):
        return {"mu": self.mu}


@dataclass(frozen=True)
class ZetaDist(Transform):
    """Riemann-zeta distribution: ``zeta(a + s) / zeta(a)``, law of ``log N``."""

    a: float
    identifier = "zeta"

    def __post_init__(self):
        if not self.a > 1.0 + 1e-6:
            raise DomainError("ZetaDist requires a > 1")

    @property
    def mean(self):
        z = _zeta.zeta_triple(self.a)
        return -z.dzeta / z.zeta

    @property
    def m2(self):
        z = _zeta.zeta_triple(self.a)
        return z.d2zeta / z.zeta

    def evaluate(self, s):
        return _zeta.zeta(self.a + s) / _zeta.zeta(self.a)

    def one_minus(self, s):
        return _out(s, _zeta.zeta_drop(self.a, s) / _zeta.zeta(self.a))

    def sample(self, n, rng):
        return np.log(rng.zipf(self.a, n).astype(float))

    def params(self):
        return {"a": self.a}


@dataclass(frozen=True)
class Product(Transform):
    """Pointwise product: the transform of a sum of independent variables."""

    first: Transform
    second: Transform

    @property
    def mean(self):
        if self.first.mean is None or self.second.mean is None:
            return None
        return self.first.mean + self.second.mean

    @property
    def m2(self):
        a, b = self.first, self.second
        if None in (a.mean, b.mean, a.m2, b.m2):
            return None
        return a.m2 + b.m2 + 2.0 * a.mean * b.mean

    @property
    def covered(self):
        lo1, hi1 = self.first.covered
        lo2, hi2 = self.second.covered
        return (max(lo1, lo2), min(hi1, hi2))

    def evaluate(self, s):
        return np.asarray(self.first(s)) * np.asarray(self.second(s))

    def sample(self, n, rng):
        return self.first.sample(n, rng) + self.second.sample(n, rng)


def product(t1, t2):
    return Product(t1, t2)


CATALOG = {
    cls.identifier: cls
    for cls in (Degenerate, Exponential, Gamma, ExpMixtureWithAtom, TwoPoint,
                SinhFamily, CoshFamily, TanhFamily, ZetaDist,
                ScaledSinhSolution, ScaledCoshSquared)
}

CATALOG_SCHEMA = {
    "degenerate": {"c": "real >= 0"},
    "exponential": {"mu": "real > 0"},
    "gamma": {"a": "shape > 0", "b": "scale > 0"},
    "exp_mixture_atom": {"p": "atom mass in [0, 1)", "beta": "rate > 0"},
    "two_point": {"m1": "real > 0", "m2": "real >= m1^2"},
    "sinh_t": {"t": "real > 0"},
    "cosh_t": {"t": "real > 0"},
    "tanh_t": {"t": "real > 0"},
    "zeta": {"a": "real > 1"},
    "scaled_sinh": {"mu": "real > 0"},
    "cosh2_scaled": {"mu": "real > 0"},
}


def from_descriptor(desc):
    """Build a catalog transform from ``{identifier: {param: value}}``."""
    if not isinstance(desc, dict) or len(desc) != 1:
        raise DomainError(f"catalog descriptor must be a one-key mapping, got {desc!r}")
    (name, params), = desc.items()
    if name not in CATALOG:
        raise DomainError(f"unknown catalog identifier {name!r}")
    params = params or {}
    if name == "exp_mixture_atom" and "mu" in params and "beta" not in params:
        return ExpMixtureWithAtom.from_mean(params["p"], params["mu"])
    try:
        return CATALOG[name](**params)
    except TypeError as exc:
        raise DomainError(f"{name}: {exc}") from None


def eval_transform(t, s):
    """Evaluate transform ``t`` at ``s >= 0`` (scalar or array)."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("transform argument must be a nonnegative real")
    return t(s)


@dataclass(frozen=True)
class CMReport:
    """Sign-alternation diagnostics of divided differences, per order."""

    orders: tuple
    worst: tuple
    violations: tuple
    tolerance_factor: float

    @property
    def passed(self):
        return all(v == 0 for v in self.violations)

    @property
    def first_violated_order(self):
        for k, v in zip(self.orders, self.violations):
            if v:
                return k
        return None


def check_complete_monotonicity(f, grid, max_order=4, tol=1e-9):
    """Check that divided differences of order k have sign (-1)^k on ``grid``.

    A divided difference of order k of a completely monotone function equals
    ``f^(k)(xi) / k!`` for some xi, so ``(-1)^k`` times it must be nonnegative.
    A violation is counted where it falls below ``-tol * scale`` with ``scale``
    the rounding amplification ``max|f| * sum |weights|`` of that stencil.
    ``worst`` holds the largest scaled violation per order (0 if none).
    """
    x = np.asarray(grid, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise DomainError("grid must be strictly increasing")
    if x.size < max_order + 1:
        raise DomainError("grid needs at least max_order + 1 points")
    y = np.asarray(f(x), dtype=float)
    fmax = np.max(np.abs(y))
    orders, worst, counts = [], [], []
    for k in range(1, max_order + 1):
        m = x.size - k
        dd = np.zeros(m)
        wsum = np.zeros(m)
        for j in range(k + 1):
            denom = np.ones(m)
            for i in range(k + 1):
                if i != j:
                    denom *= x[j:j + m] - x[i:i + m]
            dd += y[j:j + m] / denom
            wsum += 1.0 / np.abs(denom)
        signed = (-1) ** k * dd
        scale = tol * fmax * wsum
        bad = signed < -scale
        orders.append(k)
        counts.append(int(bad.sum()))
        rel = np.where(bad, -signed / np.maximum(fmax * wsum, 1e-300), 0.0)
        worst.append(float(rel.max()) if m else 0.0)
    return CMReport(tuple(orders), tuple(worst), tuple(counts), tol)
