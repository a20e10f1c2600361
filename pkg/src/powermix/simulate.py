"""Monte Carlo checks of the distributional equations behind the functional ones.

    example1   Z  =d  X1 + X2 + T Z'
    example2   Z  =d  X + T Z'
    example3   X* =d  X + T X*'
    remark4    Z  =d  X1 + T X2

``Z`` is length-biased and ``X*`` equilibrium with respect to the solution law
``F``. Both sides are sampled independently and compared through empirical
Laplace transforms on a geometric grid of 16 points in ``[0.1/mu, 10/mu]``.
The pass threshold is the 99% quantile of the bootstrapped null distribution
of the max gap.

Every sampler role draws from its own counter-based stream, split further
into per-block substreams, so results do not depend on how blocks are
scheduled.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import mixing
from .errors import CapabilityError, DomainError
from .moments import equilibrium, length_biased
from .transforms import Transform

EQUATIONS = ("example1", "example2", "example3", "remark4")
ROLES = ("lhs", "x1", "x2", "t", "zp", "boot")
GRID_POINTS = 16
MIN_N = 10_000


def default_grid(mu, points=GRID_POINTS):
    return np.geomspace(0.1 / mu, 10.0 / mu, points)


@dataclass(frozen=True, eq=False)
class EquationSpec:
    """One distributional equation with its solution law ``F`` and ``T``."""

    equation: str
    F: Transform
    T: mixing.MixingDistribution
    n: int = 1_000_000
    seed: int = 0
    s: np.ndarray = None
    n_boot: int = 200
    level: float = 0.99
    blocks: int = 1000

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise DomainError(f"unknown equation {self.equation!r}; expected one of {EQUATIONS}")
        if self.n < MIN_N:
            raise DomainError(f"sample size must be at least {MIN_N}")
        mu = self.F.mean
        if mu is None or not mu > 0:
            raise CapabilityError("solution law needs a known positive mean")
        s = default_grid(mu) if self.s is None else np.asarray(self.s, dtype=float)
        if np.any(s < 0) or np.any(s > 10.0 / mu * (1 + 1e-12)):
            raise DomainError("comparison grid must lie within [0, 10/mu]")
        object.__setattr__(self, "s", s)
        if not 0 < self.level < 1 or self.n_boot < 10 or not 2 <= self.blocks <= self.n:
            raise DomainError("need 0 < level < 1, n_boot >= 10 and 2 <= blocks <= n")


@dataclass
class SimReport:
    equation: str
    n: int
    seed: int
    s: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gaps: np.ndarray
    gap: float
    threshold: float
    passed: bool
    elapsed: float = field(default=0.0, compare=False)

    def as_dict(self):
        return {
            "equation": self.equation, "n": self.n, "seed": self.seed,
            "s": self.s.tolist(), "lhs": self.lhs.tolist(), "rhs": self.rhs.tolist(),
            "gaps": self.gaps.tolist(), "gap": self.gap, "threshold": self.threshold,
            "passed": self.passed,
        }


def stream(seed, role, block=0):
    """Philox generator for ``(seed, role, block)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(ROLES.index(role), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def sample_law(law, n, rng):
    """``n`` draws of a catalog transform or mixing law."""
    if n < 1:
        raise DomainError("n must be positive")
    if isinstance(law, (Transform, mixing.MixingDistribution)):
        out = law.sample(n, rng)
    else:
        raise CapabilityError(f"cannot sample {type(law).__name__}")
    return np.asarray(out, dtype=float)


def _sides(spec):
    """Samplers ``(lhs, rhs)``, each a function of ``(block, size)``."""
    F, T, seed = spec.F, spec.T, spec.seed

    def draw(role, law, b, m):
        return sample_law(law, m, stream(seed, role, b))

    if spec.equation == "example3":
        left = equilibrium(F)
    else:
        left = length_biased(F)

    def lhs(b, m):
        return draw("lhs", left, b, m)

    if spec.equation == "example1":
        def rhs(b, m):
            return draw("x1", F, b, m) + draw("x2", F, b, m) + draw("t", T, b, m) * draw("zp", left, b, m)
    elif spec.equation in ("example2", "example3"):
        def rhs(b, m):
            return draw("x1", F, b, m) + draw("t", T, b, m) * draw("zp", left, b, m)
    else:
        def rhs(b, m):
            return draw("x1", F, b, m) + draw("t", T, b, m) * draw("x2", F, b, m)
    return lhs, rhs


def _block_sums(sampler, sizes, s):
    out = np.empty((sizes.size, s.size))
    for b, m in enumerate(sizes):
        x = sampler(b, int(m))
        out[b] = np.exp(-np.multiply.outer(s, x)).sum(axis=1)
    return out


def _fmean(sums, sizes):
    # compensated reduction over blocks
    n = float(sizes.sum())
    return np.array([math.fsum(col) for col in sums.T]) / n


def verify_equation(spec):
    """Compare empirical transforms of both sides; see module docstring."""
    t0 = time.perf_counter()
    base, extra = divmod(spec.n, spec.blocks)
    sizes = np.full(spec.blocks, base, dtype=np.int64)
    sizes[:extra] += 1
    lhs, rhs = _sides(spec)
    L = _block_sums(lhs, sizes, spec.s)
    R = _block_sums(rhs, sizes, spec.s)
    lm, rm = _fmean(L, sizes), _fmean(R, sizes)
    gaps = np.abs(lm - rm)
    gap = float(gaps.max())
    rng = stream(spec.seed, "boot")
    stats = np.empty(spec.n_boot)
    for i in range(spec.n_boot):
        il = rng.integers(0, spec.blocks, spec.blocks)
        ir = rng.integers(0, spec.blocks, spec.blocks)
        lb = L[il].sum(axis=0) / sizes[il].sum() - lm
        rb = R[ir].sum(axis=0) / sizes[ir].sum() - rm
        stats[i] = np.max(np.abs(lb - rb))
    thr = float(np.quantile(stats, spec.level))
    return SimReport(spec.equation, spec.n, spec.seed, spec.s, lm, rm, gaps, gap, thr,
                     gap <= thr, time.perf_counter() - t0)
