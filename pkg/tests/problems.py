"""Problem builders shared by the solver and acceptance suites."""

import numpy as np

from powermix import mixing as M
from powermix import zeta as Z
from powermix.solver import Family, Problem


def random_T(rng):
    kind = rng.integers(4)
    if kind == 0:
        return M.atom(float(rng.uniform(0.0, 0.8)))
    if kind == 1:
        lo = float(rng.uniform(0.0, 0.4))
        return M.uniform(lo, float(rng.uniform(lo + 0.1, 1.0)))
    if kind == 2:
        return M.beta_tail(float(rng.uniform(0.5, 4.0)))
    return M.atoms([(0.0, 0.5), (float(rng.uniform(0.2, 1.2)), 0.5)])


def _mean_law(rng, mean):
    # a law with the given mean, drawn from a few shapes
    kind = rng.integers(3)
    if kind == 0:
        return M.atom(mean)
    if kind == 1:
        d = float(rng.uniform(0.0, 0.9)) * mean
        return M.atoms([(mean - d, 0.5), (mean + d, 0.5)])
    return M.uniform(0.0, 2.0 * mean)


def random_B(rng):
    kind = rng.integers(3)
    if kind == 0:
        return M.atom(0.0)
    if kind == 1:
        return M.atom(float(rng.uniform(0.0, 1.0)))
    return M.uniform(0.0, float(rng.uniform(0.1, 2.0)))


def random_problem(family, seed, **kw):
    rng = np.random.default_rng(seed)
    mu = float(rng.uniform(0.5, 2.0))
    T = random_T(rng)
    fam = Family(family)
    if fam is Family.THEOREM1:
        A = M.exponential(1.0) if rng.random() < 0.25 else _mean_law(rng, 1.0)
        return Problem(fam, T, A=A, B=random_B(rng), mu=mu, **kw)
    if fam is Family.THEOREM4:
        c = float(rng.uniform(0.5, 2.0))
        return Problem(fam, T, A=_mean_law(rng, c), Lam=_mean_law(rng, 1.0 / c),
                       B=random_B(rng), mu=mu, **kw)
    if fam is Family.THEOREM5:
        a = float(rng.uniform(1.5, 4.0))
        z = Z.zeta_triple(a)
        return Problem(fam, T, Lam=_mean_law(rng, -z.zeta / z.dzeta), a=a, mu=mu, **kw)
    raise ValueError(family)
