import math

import numpy as np
import pytest

from powermix import mixing as M
from powermix import transforms as TR
from powermix.errors import CapabilityError, DomainError
from powermix.simulate import EquationSpec, default_grid, sample_law, stream, verify_equation

SMALL = dict(n=20_000, n_boot=50, blocks=100)


def test_default_grid():
    s = default_grid(2.0)
    assert s.size == 16 and s[0] == pytest.approx(0.05) and s[-1] == pytest.approx(5.0)


def test_spec_validation():
    F, T = TR.Exponential(1.0), M.atom(0.0)
    with pytest.raises(DomainError):
        EquationSpec("example9", F, T)
    with pytest.raises(DomainError):
        EquationSpec("example1", F, T, n=100)
    with pytest.raises(DomainError):
        EquationSpec("example1", F, T, s=[0.5, 20.0])
    with pytest.raises(DomainError):
        EquationSpec("example1", F, T, level=1.5)
    with pytest.raises(CapabilityError):
        verify_equation(EquationSpec("example1", TR.TanhFamily(1.0), T, **SMALL))


def test_streams_are_distinct_and_reproducible():
    a = stream(7, "x1", 3).random(4)
    assert np.array_equal(a, stream(7, "x1", 3).random(4))
    assert not np.array_equal(a, stream(7, "x2", 3).random(4))
    assert not np.array_equal(a, stream(7, "x1", 4).random(4))
    assert not np.array_equal(a, stream(8, "x1", 3).random(4))


def test_deterministic_reports():
    spec = EquationSpec("example1", TR.Exponential(1.0), M.atom(0.0), seed=11, **SMALL)
    a, b = verify_equation(spec), verify_equation(spec)
    assert a.as_dict() == b.as_dict()
    c = verify_equation(EquationSpec("example1", TR.Exponential(1.0), M.atom(0.0), seed=12, **SMALL))
    assert c.gap != a.gap


def test_sample_law_checks(rng):
    assert sample_law(M.atom(0.3), 5, rng).tolist() == [0.3] * 5
    with pytest.raises(DomainError):
        sample_law(M.atom(0.3), 0, rng)
    with pytest.raises(CapabilityError):
        sample_law("exp", 5, rng)


def test_exponential_mean_clt(rng):
    n = 1_000_000
    x = sample_law(TR.Exponential(2.0), n, rng)
    # 4.5 standard errors
    assert abs(x.mean() - 2.0) < 4.5 * 2.0 / math.sqrt(n)


def test_small_positive_and_negative():
    ok = verify_equation(EquationSpec("example3", TR.Exponential(1.0), M.atom(0.0), seed=3, **SMALL))
    assert ok.passed
    bad = verify_equation(EquationSpec("example2", TR.Exponential(1.0), M.atom(0.5), seed=3,
                                       n=100_000, n_boot=50, blocks=100))
    assert not bad.passed and bad.gap > bad.threshold


@pytest.mark.slow
@pytest.mark.parametrize("equation,F,T", [
    ("example1", TR.Exponential(1.0), M.atom(0.0)),
    ("example3", TR.Exponential(1.0), M.atom(0.0)),
    ("example1", TR.ExpMixtureWithAtom.from_mean(0.5, 1.0), M.atom(0.5)),
    ("example3", TR.ExpMixtureWithAtom.from_mean(0.5, 1.0), M.atom(0.5)),
    ("example2", TR.ExpMixtureWithAtom.from_mean(0.5, 1.0), M.uniform(0.5, 1.0)),
    ("example2", TR.Gamma(2.0, 0.5), M.beta_tail(2.0)),
    ("example2", TR.Exponential(1.0), M.uniform()),
    ("remark4", TR.ScaledCoshSquared(1.0), M.usquared()),
], ids=["ex1-exp", "ex3-exp", "ex1-mix", "ex3-mix", "ex2-mix-uniform", "ex2-gamma",
        "ex2-exp-uniform", "remark4-cosh2"])
def test_equations_pass_at_full_size(equation, F, T):
    r = verify_equation(EquationSpec(equation, F, T, seed=2024))
    assert r.passed, r.as_dict()
    assert r.n == 1_000_000 and r.s.size == 16


@pytest.mark.slow
def test_wrong_law_fails_at_full_size():
    r = verify_equation(EquationSpec("example2", TR.Exponential(1.0), M.beta_tail(2.0), seed=2024))
    assert not r.passed
