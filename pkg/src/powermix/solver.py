"""Fixed-point engine for power-mixture functional equations.

Each family maps a transform ``F`` to a new transform through the Bernstein
function ``sigma`` built from ``F`` and the mixing law of ``T``:

    theorem1   int exp(-a sigma_B(sigma(s))) dF_A(a)
    theorem2   int (1 + lam sigma_B(sigma(s)))^-a dF_A(a)         (lam fixed)
    theorem3   int (1 + l sigma_B(sigma(s)))^-a dF_Lam(l)         (a fixed)
    theorem4   int int (1 + l sigma_B(sigma(s)))^-a dF_A dF_Lam
    theorem5   int zeta(a + l sigma(s)) dF_Lam(l) / zeta(a)       (a fixed)

Presets fix some of the laws: ``corollary1`` (B = 0), ``compound_poisson``
(A = 1, B = 0), ``compound_exponential`` (A ~ Exp(1), B = 0) and
``corollary4`` (T = p, B = 0). ``remark4`` has no iteration; only residuals
of ``F = exp(-sigma_*)`` are available for it.

The iteration starts from the sharp two-point bound with the moments the
solution must have, and produces a nonincreasing sequence of transforms.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from . import mixing, zeta as _zeta
from .errors import (CapabilityError, ConditionError, DomainError, ExtractionError,
                     GridRangeError)
from .grid import GridSpec, GridTransform, to_grid
from .moments import mean_from_transform, second_moment_from_transform
from .transforms import Exponential, Transform, TwoPoint

# equality conditions such as E[A] = 1 are checked to this relative tolerance
EQ_TOL = 1e-9
# E[T] closer than this to 1 is rejected
BORDER_TOL = 1e-9


class Family(str, Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    THEOREM3 = "theorem3"
    THEOREM4 = "theorem4"
    THEOREM5 = "theorem5"
    COROLLARY1 = "corollary1"
    COMPOUND_POISSON = "compound_poisson"
    COMPOUND_EXPONENTIAL = "compound_exponential"
    COROLLARY4 = "corollary4"
    REMARK4 = "remark4"

    @property
    def parent(self):
        return _PARENT.get(self, self)


_PARENT = {
    Family.COROLLARY1: Family.THEOREM1,
    Family.COMPOUND_POISSON: Family.THEOREM1,
    Family.COMPOUND_EXPONENTIAL: Family.THEOREM1,
    Family.COROLLARY4: Family.THEOREM1,
}

# laws each parent family reads
_USES = {
    Family.THEOREM1: ("A", "B"),
    Family.THEOREM2: ("A", "B"),
    Family.THEOREM3: ("Lam", "B"),
    Family.THEOREM4: ("A", "Lam", "B"),
    Family.THEOREM5: ("Lam",),
    Family.REMARK4: (),
}


def _preset_laws(family):
    if family is Family.COROLLARY1:
        return {"B": mixing.atom(0.0)}
    if family is Family.COMPOUND_POISSON:
        return {"A": mixing.atom(1.0), "B": mixing.atom(0.0)}
    if family is Family.COMPOUND_EXPONENTIAL:
        return {"A": mixing.exponential(1.0), "B": mixing.atom(0.0)}
    if family is Family.COROLLARY4:
        return {"B": mixing.atom(0.0)}
    return {}


@dataclass(frozen=True, eq=False)
class Problem:
    """A functional equation with its laws, constants and numerical settings.

    ``lam`` is the constant of ``theorem2``; ``a`` the constant of
    ``theorem3`` and ``theorem5``. Laws fixed by a preset are filled in and
    must not be supplied.
    """

    family: Family
    T: mixing.MixingDistribution
    A: mixing.MixingDistribution = None
    B: mixing.MixingDistribution = None
    Lam: mixing.MixingDistribution = None
    mu: float = 1.0
    lam: float = None
    a: float = None
    grid: GridSpec = field(default_factory=GridSpec)
    tol: float = 1e-10
    max_iters: int = 500
    tau_mono: float = 1e-9

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        for name, law in _preset_laws(fam).items():
            if getattr(self, name) is not None:
                raise DomainError(f"{fam.value} fixes law {name}; do not supply it")
            object.__setattr__(self, name, law)
        if fam.parent in (Family.THEOREM1, Family.THEOREM2, Family.THEOREM3,
                          Family.THEOREM4) and self.B is None:
            object.__setattr__(self, "B", mixing.atom(0.0))
        for name in _USES[fam.parent]:
            if getattr(self, name) is None:
                raise DomainError(f"{fam.value} requires law {name}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError("mu must be a positive finite number")
        if self.tol <= 0 or self.max_iters < 1 or self.tau_mono < 0:
            raise DomainError("tol > 0, max_iters >= 1 and tau_mono >= 0 are required")

    def with_(self, **kw):
        """Copy with some fields replaced (preset laws are re-derived)."""
        names = ("family", "T", "A", "B", "Lam", "mu", "lam", "a", "grid", "tol",
                 "max_iters", "tau_mono")
        args = {k: getattr(self, k) for k in names}
        for name in _preset_laws(self.family):
            args[name] = None
        args.update(kw)
        return Problem(**args)


# --- conditions ------------------------------------------------------------------

@dataclass
class ConditionRecord:
    """Outcome of every moment condition: ``(name, passed, detail)`` triples."""

    family: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self):
        return [f"{name} violated ({detail})" for name, ok, detail in self.checks if not ok]

    def require(self):
        if not self.passed:
            raise ConditionError(self.failures)
        return self

    def as_dict(self):
        return {"family": self.family, "passed": self.passed,
                "checks": [{"condition": n, "passed": ok, "detail": d}
                           for n, ok, d in self.checks]}


def _close(x, target):
    return abs(x - target) <= EQ_TOL * max(1.0, abs(target))


def _finite(x):
    return x is not None and math.isfinite(x)


def check_conditions(p):
    fam = p.family
    rec = ConditionRecord(fam.value)
    add = rec.checks.append
    et = p.T.moment(1)
    margin = 1.0 - et
    add(("E[T]<1", margin > BORDER_TOL,
         f"E[T]={et!r}, margin {margin:.3g}"
         + ("" if margin > BORDER_TOL or margin <= 0 else " within borderline tolerance")))
    if fam is Family.COROLLARY4:
        ok = p.T.is_degenerate and 0 < p.T.atoms[0][0] < 1 and p.T.atoms[0][1] == 1.0
        add(("T=p a.s. with p in (0,1)", ok, f"T={p.T.descriptor!r}"))
    par = fam.parent
    if par is Family.THEOREM1:
        ea, ea2 = mixing.moments_of(p.A)
        add(("E[A]=1", _close(ea, 1.0), f"E[A]={ea!r}"))
        add(("E[A^2]<inf", _finite(ea2), f"E[A^2]={ea2!r}"))
    elif par is Family.THEOREM2:
        lam = p.lam
        if lam is None or not lam > 0:
            add(("lambda>0", False, f"lambda={lam!r}"))
        else:
            ea, ea2 = mixing.moments_of(p.A)
            add(("E[A]=1/lambda", _close(ea, 1.0 / lam), f"E[A]={ea!r}, 1/lambda={1 / lam!r}"))
            add(("E[A^2]<inf", _finite(ea2), f"E[A^2]={ea2!r}"))
    elif par is Family.THEOREM3:
        a = p.a
        if a is None or not a > 0:
            add(("a>0", False, f"a={a!r}"))
        else:
            el, el2 = mixing.moments_of(p.Lam)
            add(("E[Lambda]=1/a", _close(el, 1.0 / a), f"E[Lambda]={el!r}, 1/a={1 / a!r}"))
            add(("E[Lambda^2]<inf", _finite(el2), f"E[Lambda^2]={el2!r}"))
    elif par is Family.THEOREM4:
        ea, ea2 = mixing.moments_of(p.A)
        el, el2 = mixing.moments_of(p.Lam)
        add(("E[A Lambda]=1", _close(ea * el, 1.0), f"E[A]E[Lambda]={ea * el!r}"))
        add(("E[A^2]<inf", _finite(ea2), f"E[A^2]={ea2!r}"))
        add(("E[Lambda^2]<inf", _finite(el2), f"E[Lambda^2]={el2!r}"))
    elif par is Family.THEOREM5:
        a = p.a
        if a is None or not a > 1 + 1e-6:
            add(("a>1", False, f"a={a!r}"))
        else:
            z = _zeta.zeta_triple(a)
            target = -z.zeta / z.dzeta
            el, el2 = mixing.moments_of(p.Lam)
            add(("E[Lambda]=-zeta(a)/zeta'(a)", _close(el, target),
                 f"E[Lambda]={el!r}, target {target!r}"))
            add(("E[Lambda^2]<inf", _finite(el2), f"E[Lambda^2]={el2!r}"))
    if p.B is not None and par is not Family.THEOREM5:
        eb = p.B.moment(1)
        add(("E[B]<inf", _finite(eb), f"E[B]={eb!r}"))
    return rec


# --- moments ---------------------------------------------------------------------

def init_moments(p):
    """Initial ``(m1, m2)``: the moments the unique solution must have."""
    mu = p.mu
    et = p.T.moment(1)
    par = p.family.parent
    if par is Family.REMARK4:
        raise CapabilityError("remark4 has no iteration and no initial moments")
    eb = p.B.moment(1) if p.B is not None else 0.0
    if par is Family.THEOREM1:
        num = p.A.moment(2) + eb
    elif par is Family.THEOREM2:
        num = p.lam ** 2 * (p.A.moment(2) + p.A.moment(1)) + eb
    elif par is Family.THEOREM3:
        num = p.a * (p.a + 1.0) * p.Lam.moment(2) + eb
    elif par is Family.THEOREM4:
        # E[A(A+1) Lambda^2] factorizes by independence
        num = (p.A.moment(2) + p.A.moment(1)) * p.Lam.moment(2) + eb
    else:
        z = _zeta.zeta_triple(p.a)
        num = z.d2zeta * p.Lam.moment(2) / z.zeta
    m2 = num / (1.0 - et) * mu * mu
    if m2 < mu * mu * (1.0 - 1e-12):
        raise DomainError(f"initial m2={m2!r} below m1^2={mu * mu!r}; condition check inconsistent")
    return mu, max(m2, mu * mu)


def theoretical_variance(p):
    """Variance of the solution from the family's closed-form identity."""
    mu2 = p.mu ** 2
    et = p.T.moment(1)
    fam = p.family
    eb = p.B.moment(1) if p.B is not None else 0.0

    def var(law):
        return law.moment(2) - law.moment(1) ** 2

    if fam is Family.COMPOUND_POISSON:
        return et / (1.0 - et) * mu2
    if fam is Family.COMPOUND_EXPONENTIAL:
        return (1.0 + et) / (1.0 - et) * mu2
    if fam is Family.COROLLARY1:
        return (var(p.A) + et) / (1.0 - et) * mu2
    if fam is Family.COROLLARY4:
        q = p.T.atoms[0][0]
        return (var(p.A) + q) / (1.0 - q) * mu2
    if fam is Family.THEOREM1:
        return (var(p.A) + eb + et) / (1.0 - et) * mu2
    if fam is Family.THEOREM2:
        lam = p.lam
        return (lam ** 2 * var(p.A) + lam + eb + et) / (1.0 - et) * mu2
    if fam is Family.THEOREM3:
        a = p.a
        return (a ** 2 * var(p.Lam) + a * p.Lam.moment(2) + eb + et) / (1.0 - et) * mu2
    if fam is Family.THEOREM4:
        ea, ea2 = p.A.moment(1), p.A.moment(2)
        el, el2 = p.Lam.moment(1), p.Lam.moment(2)
        var_al = ea2 * el2 - (ea * el) ** 2
        return (var_al + ea * el2 + eb + et) / (1.0 - et) * mu2
    if fam is Family.THEOREM5:
        z = _zeta.zeta_triple(p.a)
        return (z.d2zeta * p.Lam.moment(2) - z.zeta + z.zeta * et) / (z.zeta * (1.0 - et)) * mu2
    raise CapabilityError(f"no variance identity for {fam.value}")


# --- the family map -----------------------------------------------------------------

def _power(logs, a, w):
    # sum_i w_i exp(-a_i logs) and its complement, for logs >= 0
    x = np.multiply.outer(logs, a)
    return np.exp(-x) @ w, -np.expm1(-x) @ w


def family_map_pair(p, sig):
    """Apply the family's outer map to values of ``sigma``.

    Returns ``(F, 1 - F)``, the complement computed without cancellation.
    """
    sig = np.asarray(sig, dtype=float)
    par = p.family.parent
    if par is Family.THEOREM5:
        l, w = p.Lam.nodes()
        z0 = _zeta.zeta(p.a)
        x = np.multiply.outer(sig, l)
        return (_zeta.zeta(p.a + x) @ w) / z0, (_zeta.zeta_drop(p.a, x) @ w) / z0
    if par is Family.REMARK4:
        raise CapabilityError(f"{p.family.value} has no iteration map")
    y = mixing.sigma_B(p.B, sig)
    if par is Family.THEOREM1:
        return (np.asarray(p.A.lst(y), dtype=float),
                np.asarray(p.A.lst_complement(y), dtype=float))
    if par is Family.THEOREM2:
        a, w = p.A.nodes()
        return _power(np.log1p(p.lam * y), a, w)
    if par is Family.THEOREM3:
        l, w = p.Lam.nodes()
        x = p.a * np.log1p(np.multiply.outer(y, l))
        return np.exp(-x) @ w, -np.expm1(-x) @ w
    if par is Family.THEOREM4:
        a, wa = p.A.nodes()
        l, wl = p.Lam.nodes()
        f, c = _power(np.log1p(np.multiply.outer(y, l)), a, wa)
        return f @ wl, c @ wl
    raise CapabilityError(f"{p.family.value} has no iteration map")


def family_map(p, sig):
    """The family's map applied to values of ``sigma``."""
    return family_map_pair(p, sig)[0]


def grid_nodes(p):
    """``(s, n_core)`` for the problem's grid."""
    return p.grid.build(p.mu, p.T.t_max)


def _sigma_on(p, fhat, s):
    """sigma at nodes ``s``; returns ``(values, clamped_node_count)``."""
    if not isinstance(fhat, GridTransform):
        return mixing.sigma(fhat, p.T, s), 0
    reach = s * p.T.t_max <= fhat.s[-1] * (1.0 + 1e-12)
    # only extension nodes (beyond the core range) may read clamped values
    core_end = p.grid.resolve(p.mu)[1] * (1.0 + 1e-12)
    short = ~reach & (s <= core_end)
    if np.any(short):
        bad = float(s[short][0] * p.T.t_max)
        raise GridRangeError(bad, 0.0, float(fhat.s[-1]))
    out = np.empty_like(s)
    out[reach] = mixing.sigma(fhat, p.T, s[reach])
    if np.all(reach):
        return out, 0
    out[~reach] = mixing.sigma(fhat, p.T, s[~reach], clamp=True)
    return out, int(np.count_nonzero(~reach))


def iterate_once(p, prev, s=None, m2=None):
    """One step ``F_n = map(F_{n-1})`` at the grid nodes.

    ``prev`` may be a catalog transform (the initializer) or a grid transform.
    """
    if s is None:
        s = prev.s if isinstance(prev, GridTransform) else grid_nodes(p)[0]
    sig, clamped = _sigma_on(p, prev, s)
    vals, comp = family_map_pair(p, sig)
    m2 = m2 if m2 is not None else getattr(prev, "m2", None)
    out = GridTransform(s, vals, p.mu, p.mu, m2, comp)
    object.__setattr__(out, "clamped_nodes", clamped)
    return out


# --- solve ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    problem: Problem
    final: GridTransform
    initial: Transform
    converged: bool
    iterations: int
    deltas: list
    ascents: list
    mono_violations: int
    mono_worst: float
    m1_trace: list
    m2_trace: list
    m1: float
    m2: float
    m1_init: float
    m2_init: float
    variance: float
    variance_theory: float
    variance_residual: float
    bound_violation: float
    empirical_rate: float
    clamped_nodes: int
    conditions: ConditionRecord
    n_core: int

    @property
    def core_nodes(self):
        return self.final.s[:self.n_core]

    @property
    def core_values(self):
        return self.final.values[:self.n_core]

    def summary(self):
        return {
            "converged": self.converged, "iterations": self.iterations,
            "final_delta": self.deltas[-1] if self.deltas else None,
            "monotone_violations": self.mono_violations,
            "monotone_worst": self.mono_worst,
            "m1": self.m1, "m2": self.m2, "m1_init": self.m1_init, "m2_init": self.m2_init,
            "variance": self.variance, "variance_theory": self.variance_theory,
            "variance_residual": self.variance_residual,
            "bound_violation": self.bound_violation,
            "empirical_rate": self.empirical_rate,
            "clamped_nodes": self.clamped_nodes,
            "truncated_mass_T": p_trunc(self.problem),
        }


def p_trunc(p):
    return p.T.truncated_mass


def _extract(g, mu):
    try:
        m1 = mean_from_transform(g).value
    except ExtractionError:
        m1 = math.nan
    try:
        m2 = second_moment_from_transform(g, mu).value
    except ExtractionError:
        m2 = math.nan
    return m1, m2


def _rate(deltas):
    d = [x for x in deltas if x > 0]
    if len(d) < 3:
        return math.nan
    r = [b / a for a, b in zip(d[-6:-1], d[-5:])]
    return float(np.median(r))


def solve(p, start=None, track_moments=True):
    """Iterate from the two-point initializer (or ``start``) to convergence.

    Non-convergence is reported through ``converged=False``. Nodewise ascent
    beyond ``tau_mono`` is counted, never clamped.
    """
    rec = check_conditions(p).require()
    m1, m2 = init_moments(p)
    s, n_core = grid_nodes(p)
    init = TwoPoint(m1, m2)
    prev = init if start is None else start
    if start is not None and start.mean is not None and abs(start.mean - m1) > 1e-12 * m1:
        raise DomainError(f"alternative start has mean {start.mean!r}, expected {m1!r}")
    prev_vals = np.asarray(prev(s), dtype=float)
    deltas, ascents, m1s, m2s = [], [], [], []
    clamped = 0
    converged = False
    cur = None
    for it in range(1, p.max_iters + 1):
        cur = iterate_once(p, prev, s, m2)
        clamped = max(clamped, cur.clamped_nodes)
        diff = cur.values - prev_vals
        deltas.append(float(np.max(np.abs(diff))))
        ascents.append(float(max(0.0, np.max(diff))))
        if track_moments:
            a, b = _extract(cur, p.mu)
            m1s.append(a)
            m2s.append(b)
        prev, prev_vals = cur, cur.values
        if deltas[-1] <= p.tol:
            converged = True
            break
    mono = [a for a in ascents if a > p.tau_mono]
    fm1, fm2 = (m1s[-1], m2s[-1]) if track_moments else _extract(cur, p.mu)
    var = fm2 - fm1 ** 2
    vth = theoretical_variance(p)
    vres = abs(var - vth) / vth if vth > 0 else abs(var - vth) / p.mu ** 2
    # compared on complements, which carry full relative precision near s = 0
    bound = float(np.max(np.asarray(init.one_minus(s)) - cur.comp))
    return SolveReport(
        problem=p, final=cur, initial=init, converged=converged, iterations=len(deltas),
        deltas=deltas, ascents=ascents, mono_violations=len(mono),
        mono_worst=max(ascents) if ascents else 0.0, m1_trace=m1s, m2_trace=m2s,
        m1=fm1, m2=fm2, m1_init=m1, m2_init=m2, variance=var, variance_theory=vth,
        variance_residual=vres, bound_violation=max(0.0, bound),
        empirical_rate=_rate(deltas), clamped_nodes=clamped, conditions=rec, n_core=n_core)


# --- residuals and probes ---------------------------------------------------------

def residual(p, candidate, s=None):
    """``max |F(s) - map(F)(s)|`` over the core grid nodes.

    For ``remark4`` the map is ``exp(-sigma_*(s))``.
    """
    if getattr(candidate, "mean", None) is None:
        raise CapabilityError("residual requires a candidate with known mean")
    if s is None:
        s, n_core = grid_nodes(p)
        s = s[:n_core]
    s = np.asarray(s, dtype=float)
    f = np.asarray(candidate(s), dtype=float)
    if p.family is Family.REMARK4:
        g = np.exp(-mixing.sigma_star(candidate, p.T, s))
    else:
        g = family_map(p, mixing.sigma(candidate, p.T, s))
    return float(np.max(np.abs(f - g)))


def two_start_uniqueness_probe(p, alt_start):
    """Solve from the canonical and an alternative start; return
    ``(distance, canonical_report, alternative_report)``."""
    r0 = solve(p, track_moments=False)
    r1 = solve(p, start=alt_start, track_moments=False)
    n = r0.n_core
    dist = float(np.max(np.abs(r0.final.values[:n] - r1.final.values[:n])))
    return dist, r0, r1


def remark2_bound(mu, F_T, p):
    """Upper envelope ``1 - mu/lam + (mu/lam)/(1 + lam s)``, ``lam = mu / (F_T(p)(1-p))``.

    Valid for the compound-exponential family with ``T`` in [0, 1].
    """
    if not 0 <= p < 1:
        raise DomainError("remark2 bound needs p in [0, 1)")
    fp = F_T.cdf(p)
    if not 0 < fp <= 1:
        raise DomainError(f"remark2 bound needs F_T(p) in (0, 1], got {fp!r}")
    lam = mu / (fp * (1.0 - p))
    w = mu / lam

    def bound(s):
        return 1.0 - w + w / (1.0 + lam * np.asarray(s, dtype=float))
    return bound


def mixture_solution(mu, p):
    """Closed-form solution ``p + (1-p)/(1 + lam s)``, ``lam = mu/(1-p)``."""
    from .transforms import ExpMixtureWithAtom
    return ExpMixtureWithAtom.from_mean(p, mu) if p > 0 else Exponential(mu)
