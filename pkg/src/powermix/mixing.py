"""Mixing laws for T, A, B, Lambda and the Bernstein functions built from them.

A ``MixingDistribution`` is a finite set of atoms plus density pieces, each
piece carrying a fixed Gauss-Legendre rule (optionally after the change of
variable ``t = lo + (hi - lo) u^2`` that removes an integrable endpoint
singularity). Every law declares a finite support bound ``t_max``; laws with
unbounded support are truncated at a far quantile and the discarded mass is
recorded in ``truncated_mass``.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import CapabilityError, DomainError, GridRangeError
from .grid import GridTransform

GL_NODES = 64
MASS_TOL = 1e-10


@dataclass(frozen=True)
class DensityPiece:
    """Density ``density(t)`` on ``[lo, hi]`` integrated with ``nodes`` GL points.

    ``change`` is ``None``, ``"square_lo"`` (singularity at ``lo``) or
    ``"square_hi"`` (singularity at ``hi``); the substitution is
    ``t = lo + (hi - lo) u^power`` (mirrored for ``hi``). ``edge_density``,
    when given, is the density as a function of the distance to the singular
    endpoint, which avoids cancellation in ``hi - t``.
    """

    lo: float
    hi: float
    density: object
    nodes: int = GL_NODES
    change: str = None
    power: int = 2
    edge_density: object = None

    def quadrature(self):
        xi, wi = np.polynomial.legendre.leggauss(self.nodes)
        width = self.hi - self.lo
        if self.change is None:
            t = self.lo + 0.5 * width * (xi + 1.0)
            w = 0.5 * width * wi * self.density(t)
        elif self.change in ("square_lo", "square_hi"):
            k = self.power
            u = 0.5 * (xi + 1.0)
            d = width * u ** k
            t = self.lo + d if self.change == "square_lo" else self.hi - d
            dens = self.edge_density(d) if self.edge_density is not None else self.density(t)
            w = 0.5 * wi * k * width * u ** (k - 1) * dens
        else:
            raise DomainError(f"unknown variable change {self.change!r}")
        return t, w


@dataclass(frozen=True, eq=False)
class MixingDistribution:
    """Nonnegative law given by atoms and density pieces.

    ``m1``/``m2`` are the declared (exact) moments when known. ``lst_closed``,
    ``cdf_closed`` and ``sampler`` are optional closed forms.
    """

    atoms: tuple = ()
    pieces: tuple = ()
    m1: float = None
    m2: float = None
    t_max: float = None
    truncated_mass: float = 0.0
    name: str = "custom"
    descriptor: object = None
    lst_closed: object = field(default=None, repr=False)
    lst_comp_closed: object = field(default=None, repr=False)
    cdf_closed: object = field(default=None, repr=False)
    sampler: object = field(default=None, repr=False)

    def __post_init__(self):
        for loc, mass in self.atoms:
            if loc < 0 or not 0 < mass <= 1:
                raise DomainError(f"invalid atom ({loc!r}, {mass!r})")
        for p in self.pieces:
            if p.lo < 0 or p.hi <= p.lo:
                raise DomainError(f"invalid density piece [{p.lo!r}, {p.hi!r}]")
        if self.t_max is None:
            hi = [loc for loc, _ in self.atoms] + [p.hi for p in self.pieces]
            object.__setattr__(self, "t_max", float(max(hi)))
        if not math.isfinite(self.t_max):
            raise DomainError("mixing law needs a finite support bound; truncate it")
        total = self.total_mass()
        if abs(total + self.truncated_mass - 1.0) > MASS_TOL:
            raise DomainError(f"total mass {total!r} differs from 1")

    @cached_property
    def _nodes(self):
        ts, ws = [], []
        for loc, mass in self.atoms:
            ts.append(np.array([float(loc)]))
            ws.append(np.array([float(mass)]))
        for p in self.pieces:
            t, w = p.quadrature()
            ts.append(t)
            ws.append(w)
        return np.concatenate(ts), np.concatenate(ws)

    def nodes(self):
        """Quadrature nodes and weights, atoms included."""
        return self._nodes

    def total_mass(self):
        return float(np.sum(self._nodes[1]))

    def quadrature_moment(self, k):
        t, w = self._nodes
        return float(np.sum(w * t ** k))

    def moment(self, k):
        if k == 1 and self.m1 is not None:
            return self.m1
        if k == 2 and self.m2 is not None:
            return self.m2
        return self.quadrature_moment(k)

    @property
    def is_degenerate(self):
        return len(self.atoms) == 1 and not self.pieces

    def lst(self, x):
        """Laplace transform ``E[exp(-x T)]`` of the law itself."""
        x = np.asarray(x, dtype=float)
        if self.lst_closed is not None:
            return self.lst_closed(x)
        t, w = self._nodes
        return np.exp(-np.multiply.outer(x, t)) @ w

    def lst_complement(self, x):
        """``1 - E[exp(-x T)]`` without cancellation at small ``x``."""
        x = np.asarray(x, dtype=float)
        if self.lst_comp_closed is not None:
            return self.lst_comp_closed(x)
        if self.lst_closed is not None and self.truncated_mass > 0:
            return 1.0 - self.lst_closed(x)
        t, w = self._nodes
        return -np.expm1(-np.multiply.outer(x, t)) @ w

    def cdf(self, p):
        if self.cdf_closed is None:
            raise CapabilityError(f"{self.name} has no closed-form CDF")
        return float(self.cdf_closed(float(p)))

    def sample(self, n, rng):
        if self.sampler is None:
            return _rejection_sample(self, n, rng)
        return self.sampler(n, rng)


def _rejection_sample(mix, n, rng):
    if mix.truncated_mass or any(p.change for p in mix.pieces):
        raise CapabilityError(f"{mix.name} has no sampler")
    masses = [m for _, m in mix.atoms] + [
        float(np.sum(p.quadrature()[1])) for p in mix.pieces]
    which = rng.choice(len(masses), size=n, p=np.array(masses) / sum(masses))
    out = np.empty(n)
    for i, (loc, _) in enumerate(mix.atoms):
        out[which == i] = loc
    for j, p in enumerate(mix.pieces):
        idx = np.flatnonzero(which == len(mix.atoms) + j)
        grid = np.linspace(p.lo, p.hi, 2049)
        fmax = 1.05 * float(np.max(p.density(grid)))
        got = np.empty(0)
        while got.size < idx.size:
            m = 2 * (idx.size - got.size) + 16
            x = rng.uniform(p.lo, p.hi, m)
            keep = rng.uniform(0.0, fmax, m) < p.density(x)
            got = np.concatenate([got, x[keep]])
        out[idx] = got[:idx.size]
    return out


# --- constructors ------------------------------------------------------------

def atom(loc, mass=1.0):
    """Unit point mass at ``loc`` (``mass`` must be 1 for a stand-alone law)."""
    return atoms([(loc, mass)])


def atoms(pairs):
    pairs = tuple((float(l), float(m)) for l, m in pairs)
    locs = np.array([l for l, _ in pairs])
    mass = np.array([m for _, m in pairs])
    desc = {"atom": list(pairs[0])} if len(pairs) == 1 else {"atoms": [list(p) for p in pairs]}

    def sampler(n, rng):
        if len(pairs) == 1:
            return np.full(n, locs[0])
        return locs[rng.choice(len(pairs), size=n, p=mass / mass.sum())]

    return MixingDistribution(
        atoms=pairs,
        m1=float(mass @ locs), m2=float(mass @ locs ** 2),
        name="atoms", descriptor=desc,
        lst_closed=lambda x: np.exp(-np.multiply.outer(x, locs)) @ mass,
        cdf_closed=lambda p: float(mass[locs <= p].sum()),
        sampler=sampler,
    )


def uniform(lo=0.0, hi=1.0):
    lo, hi = float(lo), float(hi)
    if not 0 <= lo < hi:
        raise DomainError("uniform requires 0 <= lo < hi")
    dens = 1.0 / (hi - lo)

    def lst(x):
        x = np.asarray(x, dtype=float)
        safe = np.where(x == 0, 1.0, x)
        val = (np.exp(-lo * safe) * -np.expm1(-(hi - lo) * safe)) / ((hi - lo) * safe)
        return np.where(x == 0, 1.0, val)

    return MixingDistribution(
        pieces=(DensityPiece(lo, hi, lambda t: np.full_like(t, dens)),),
        m1=(lo + hi) / 2.0, m2=(lo * lo + lo * hi + hi * hi) / 3.0,
        name="uniform", descriptor={"uniform": [lo, hi]},
        lst_closed=lst,
        cdf_closed=lambda p: min(1.0, max(0.0, (p - lo) / (hi - lo))),
        sampler=lambda n, rng: rng.uniform(lo, hi, n),
    )


def beta_tail(a):
    """Law on (0, 1) with ``P[T <= x] = 1 - (1 - x)^a``."""
    a = float(a)
    if not a > 0:
        raise DomainError("beta_tail requires a > 0")

    def dens(t):
        return a * (1.0 - t) ** (a - 1.0)

    if a == int(a):
        pieces = (DensityPiece(0.0, 1.0, dens),)
    else:
        # smooth on [0, 1/2]; graded substitution for the endpoint behaviour at 1
        k = max(2, math.ceil(3.0 / a))
        pieces = (DensityPiece(0.0, 0.5, dens),
                  DensityPiece(0.5, 1.0, dens, change="square_hi", power=k,
                               edge_density=lambda d: a * d ** (a - 1.0)))
    return MixingDistribution(
        pieces=pieces,
        m1=1.0 / (a + 1.0), m2=2.0 / ((a + 1.0) * (a + 2.0)),
        name="beta_tail", descriptor={"beta_tail": a},
        cdf_closed=lambda p: 1.0 - (1.0 - min(max(p, 0.0), 1.0)) ** a,
        sampler=lambda n, rng: 1.0 - (1.0 - rng.random(n)) ** (1.0 / a),
    )


def example2d():
    """Density ``1/sqrt(t) - 1`` on (0, 1)."""
    def sampler(n, rng):
        u = 1.0 - np.sqrt(1.0 - rng.random(n))
        return u * u

    return MixingDistribution(
        pieces=(DensityPiece(0.0, 1.0, lambda t: 1.0 / np.sqrt(t) - 1.0, change="square_lo"),),
        m1=1.0 / 6.0, m2=1.0 / 15.0,
        name="example2d", descriptor="example2d",
        cdf_closed=lambda p: 2.0 * math.sqrt(min(max(p, 0.0), 1.0)) - min(max(p, 0.0), 1.0),
        sampler=sampler,
    )


def usquared():
    """Law of ``U^2`` with ``U`` uniform on [0, 1]."""
    return MixingDistribution(
        pieces=(DensityPiece(0.0, 1.0, lambda t: 0.5 / np.sqrt(t), change="square_lo"),),
        m1=1.0 / 3.0, m2=1.0 / 5.0,
        name="usquared", descriptor="usquared",
        cdf_closed=lambda p: math.sqrt(min(max(p, 0.0), 1.0)),
        sampler=lambda n, rng: rng.random(n) ** 2,
    )


def exponential(mu, truncation=1e-12):
    """Exponential law with mean ``mu``, truncated at its ``1 - truncation`` quantile.

    The closed-form transform and sampler refer to the untruncated law.
    """
    mu = float(mu)
    if not mu > 0:
        raise DomainError("exp requires mu > 0")
    t_max = -mu * math.log(truncation)
    edges = [0.0] + [mu * e for e in (0.5, 1.5, 3.0, 6.0, 12.0) if mu * e < t_max] + [t_max]
    pieces = tuple(DensityPiece(lo, hi, lambda t: np.exp(-t / mu) / mu)
                   for lo, hi in zip(edges[:-1], edges[1:]))
    return MixingDistribution(
        pieces=pieces, m1=mu, m2=2.0 * mu * mu, t_max=t_max,
        truncated_mass=truncation, name="exp", descriptor={"exp": mu},
        lst_closed=lambda x: 1.0 / (1.0 + mu * np.asarray(x, dtype=float)),
        lst_comp_closed=lambda x: mu * np.asarray(x, dtype=float) / (1.0 + mu * np.asarray(x, dtype=float)),
        cdf_closed=lambda p: 1.0 - math.exp(-max(p, 0.0) / mu),
        sampler=lambda n, rng: rng.exponential(mu, n),
    )


def from_descriptor(desc):
    """Parse a CLI mixing-law descriptor into a ``MixingDistribution``."""
    if isinstance(desc, MixingDistribution):
        return desc
    if isinstance(desc, str):
        desc = {desc: None}
    if not isinstance(desc, dict) or len(desc) != 1:
        raise DomainError(f"mixing descriptor must be a one-key mapping, got {desc!r}")
    (kind, arg), = desc.items()
    try:
        if kind == "atom":
            loc, mass = (arg if isinstance(arg, (list, tuple)) else (arg, 1.0))
            return atom(loc, mass)
        if kind == "atoms":
            return atoms(arg)
        if kind == "uniform":
            return uniform(*arg)
        if kind == "beta_tail":
            return beta_tail(arg)
        if kind == "example2d":
            return example2d()
        if kind == "usquared":
            return usquared()
        if kind == "exp":
            return exponential(arg)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad {kind} descriptor {arg!r}: {exc}") from None
    raise DomainError(f"unknown mixing law {kind!r}")


def moments_of(mix):
    """Return ``(m1, m2)``: declared when available, quadrature otherwise."""
    return mix.moment(1), mix.moment(2)


# --- Bernstein functions -----------------------------------------------------

def _mean_of(fhat):
    mu = getattr(fhat, "mean", None)
    if mu is None or not mu > 0:
        raise CapabilityError("sigma requires a transform with known positive mean")
    return float(mu)


def sigma(fhat, F_T, s, clamp=False):
    """``int (1 - F(ts)) / t dF_T(t)`` with the t = 0 atom contributing ``mu s``.

    For grid-backed ``fhat`` the fused kernel is used; arguments ``t s`` beyond
    the grid raise ``GridRangeError`` unless ``clamp`` is set, in which case
    they read the last node value.
    """
    mu = _mean_of(fhat)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise DomainError("sigma requires s >= 0")
    t, w = F_T.nodes()
    zero = t == 0.0
    out = mu * s_arr * float(w[zero].sum())
    tp, wp = t[~zero], w[~zero]
    if tp.size:
        if isinstance(fhat, GridTransform):
            m2 = fhat.m2 if fhat.m2 is not None else 0.0
            val, n_out = _kernels.sigma_sum(fhat.u, fhat.comp, fhat.slopes, fhat.scale,
                                            s_arr, tp, wp, mu, m2, clamp)
            if n_out and not clamp:
                bad = float(s_arr.max() * tp.max())
                raise GridRangeError(bad, 0.0, float(fhat.s[-1]))
            out = out + val
        else:
            q = np.multiply.outer(s_arr, tp)
            out = out + (np.asarray(fhat.one_minus(q)) / tp) @ wp
    return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))


def _phi(y):
    # (1 - exp(-y)) / y, equal to 1 at y = 0
    y = np.asarray(y, dtype=float)
    safe = np.where(y == 0, 1.0, y)
    return np.where(y == 0, 1.0, -np.expm1(-safe) / safe)


def sigma_B(F_B, x, method="nodes"):
    """``int_0^x E[exp(-t B)] dt``.

    ``method="nodes"`` integrates in closed form per quadrature node of B
    (``x (1 - e^{-b x}) / (b x)``); ``"adaptive"`` runs adaptive quadrature
    on the transform of B and serves as the independent cross-check.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x_arr < 0):
        raise DomainError("sigma_B requires x >= 0")
    if method == "nodes":
        b, w = F_B.nodes()
        out = x_arr * (_phi(np.multiply.outer(x_arr, b)) @ w)
    elif method == "adaptive":
        out = np.array([
            integrate.quad(lambda t: float(F_B.lst(t)), 0.0, xi, epsabs=1e-14, epsrel=1e-12,
                           limit=200)[0] if xi > 0 else 0.0
            for xi in x_arr])
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


_STAR_GL = np.polynomial.legendre.leggauss(16)


def sigma_star(fhat, F_T, s):
    """``int_0^s mu E[F(x T)] dx`` by composite Gauss-Legendre in ``x``."""
    mu = _mean_of(fhat)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise DomainError("sigma_star requires s >= 0")
    smax = float(s_arr.max())
    if smax == 0.0:
        return float(0.0) if np.ndim(s) == 0 else np.zeros(np.shape(s))
    bp = np.unique(np.concatenate([
        [0.0], s_arr, np.geomspace(min(1e-4 / mu, smax), smax, 96)]))
    t, w = F_T.nodes()
    xi, wi = _STAR_GL
    lo, hi = bp[:-1], bp[1:]
    half = 0.5 * (hi - lo)
    x = (lo + half)[:, None] + half[:, None] * xi[None, :]
    inner = np.asarray(fhat(np.multiply.outer(x, t))) @ w
    pieces = mu * half * (inner @ wi)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    out = cum[np.searchsorted(bp, s_arr)]
    return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))
