"""Grid-backed transforms: the solver's iterate.

Node values are interpolated by a shape-preserving cubic Hermite rule on the
coordinate ``u = log(1 + scale * s)``, with ``scale`` the reciprocal of the
natural length ``1/mu``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, GridRangeError
from .transforms import Transform, _out


@dataclass(frozen=True)
class GridSpec:
    """Node layout: ``s = 0`` plus ``nodes`` log-spaced points on
    ``[s_min, s_max]``, extended geometrically to ``s_max * t_max`` when the
    mixing law reaches beyond 1. ``None`` bounds default to ``1e-6/mu`` and
    ``50/mu``.
    """

    nodes: int = 512
    s_max: float = None
    s_min: float = None

    def __post_init__(self):
        if self.nodes < 8:
            raise DomainError("grid needs at least 8 nodes")

    def resolve(self, mu):
        s_max = 50.0 / mu if self.s_max is None else float(self.s_max)
        s_min = 1e-6 / mu if self.s_min is None else float(self.s_min)
        if not 0 < s_min < s_max:
            raise DomainError("grid requires 0 < s_min < s_max")
        return s_min, s_max

    def build(self, mu, t_max=1.0):
        """Return ``(s_nodes, n_core)``; the first ``n_core`` nodes cover [0, s_max]."""
        s_min, s_max = self.resolve(mu)
        core = np.geomspace(s_min, s_max, self.nodes)
        nodes = [np.zeros(1), core]
        if t_max > 1.0:
            ratio = core[-1] / core[-2]
            n_ext = int(np.ceil(np.log(t_max) / np.log(ratio)))
            nodes.append(s_max * ratio ** np.arange(1, n_ext + 1))
            nodes[-1][-1] = max(nodes[-1][-1], s_max * t_max)
        s = np.concatenate(nodes)
        return s, self.nodes + 1


@dataclass(frozen=True, eq=False)
class GridTransform(Transform):
    """Transform sampled on a fixed node set with monotone cubic interpolation.

    The interpolant is built on the complement ``1 - F``, which keeps full
    relative precision near ``s = 0`` where ``F`` is close to 1. ``comp`` may
    be supplied when it is known more accurately than ``1 - values``.
    ``mean`` is the declared first moment (the one the iteration preserves).
    ``eval_error`` is the assumed absolute accuracy of interpolated values.
    """

    eval_error = 1e-12

    s: np.ndarray
    values: np.ndarray
    scale: float
    mean: float = None
    m2: float = None
    comp: np.ndarray = None
    u: np.ndarray = field(init=False, repr=False)
    slopes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.ascontiguousarray(self.s, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if s.shape != v.shape or s.ndim != 1 or s.size < 3:
            raise DomainError("grid nodes and values must be 1-D arrays of equal length >= 3")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise DomainError("grid must start at s = 0 and increase strictly")
        c = 1.0 - v if self.comp is None else np.ascontiguousarray(self.comp, dtype=float)
        if c.shape != v.shape:
            raise DomainError("complement values must match the node values")
        u = np.log1p(self.scale * s)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "comp", c)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "slopes", _kernels.monotone_slopes(u, c))

    @property
    def covered(self):
        return (0.0, float(self.s[-1]))

    def _interp(self, s):
        hi = self.s[-1]
        bad = (s < 0) | (s > hi * (1.0 + 1e-12))
        if np.any(bad):
            raise GridRangeError(float(s[bad][0]), 0.0, float(hi))
        u = np.minimum(np.log1p(self.scale * s), self.u[-1])
        return _kernels.hermite_eval(self.u, self.comp, self.slopes, u)

    def evaluate(self, s):
        return 1.0 - self._interp(np.asarray(s, dtype=float))

    def one_minus(self, s):
        arr = np.asarray(s, dtype=float)
        return _out(s, self._interp(np.atleast_1d(arr)).reshape(arr.shape))

    def with_values(self, values, comp=None, **kw):
        """Same nodes, new values."""
        return GridTransform(self.s, values, self.scale,
                             kw.get("mean", self.mean), kw.get("m2", self.m2), comp)

    def monotone_violation(self):
        """Largest ascent between consecutive node values (0 if nonincreasing)."""
        return float(max(0.0, np.max(np.diff(self.values))))


def to_grid(t, s, scale=None):
    """Tabulate a transform on nodes ``s`` as a ``GridTransform``."""
    mean = t.mean
    if scale is None:
        scale = mean if mean else 1.0
    s = np.asarray(s, dtype=float)
    return GridTransform(s, np.asarray(t(s), dtype=float), float(scale), mean, t.m2,
                         np.asarray(t.one_minus(s), dtype=float))


def sup_distance(f, g, s):
    """max |f(s) - g(s)| over the nodes ``s``."""
    return float(np.max(np.abs(np.asarray(f(s)) - np.asarray(g(s)))))
