import math

import numpy as np
import pytest
from scipy import integrate

from powermix import mixing as M
from powermix import transforms as TR
from powermix.errors import CapabilityError, DomainError, GridRangeError
from powermix.grid import to_grid, GridSpec

S = np.array([0.0, 1e-5, 0.01, 0.3, 1.0, 4.0, 20.0])


def quad_sigma(f, density, lo, hi, s, atom0=0.0):
    mu = f.mean
    return mu * s * atom0 + integrate.quad(
        lambda t: (1 - f(t * s)) / t * density(t), lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("law,dens", [
    (M.uniform(), lambda t: 1.0),
    (M.uniform(0.25, 0.75), lambda t: 2.0),
    (M.beta_tail(2.0), lambda t: 2 * (1 - t)),
])
def test_sigma_against_adaptive_quadrature(law, dens):
    f = TR.Exponential(1.0)
    lo, hi = (0.25, 0.75) if law.pieces[0].lo == 0.25 else (0.0, 1.0)
    got = M.sigma(f, law, S[1:])
    ref = [quad_sigma(f, dens, lo, hi, s) for s in S[1:]]
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-15)


def test_sigma_uniform_exponential_is_log1p():
    s = np.geomspace(1e-8, 50, 30)
    assert np.allclose(M.sigma(TR.Exponential(1.0), M.uniform(), s), np.log1p(s), rtol=1e-13)


def test_sigma_atom_zero_is_linear():
    f = TR.Gamma(2.0, 0.75)
    assert np.allclose(M.sigma(f, M.atom(0.0), S), 1.5 * S, rtol=1e-15, atol=0)
    assert M.sigma(f, M.uniform(), 0.0) == 0.0


def test_sigma_atom_one_is_complement():
    f = TR.Exponential(1.0)
    assert np.allclose(M.sigma(f, M.atom(1.0), S), S / (1 + S), rtol=1e-15, atol=0)


def test_sigma_grid_matches_exact():
    f = TR.Exponential(1.0)
    g = to_grid(f, GridSpec().build(1.0)[0])
    s = np.geomspace(1e-5, 40, 50)
    assert np.max(np.abs(M.sigma(g, M.uniform(), s) - np.log1p(s))) < 2e-7


def test_sigma_grid_range_and_clamp():
    f = TR.Exponential(1.0)
    g = to_grid(f, GridSpec().build(1.0)[0])
    with pytest.raises(GridRangeError):
        M.sigma(g, M.atoms([(2.0, 1.0)]), 40.0)
    val = M.sigma(g, M.atoms([(2.0, 1.0)]), 40.0, clamp=True)
    assert np.isfinite(val)


def test_sigma_rejects_negative_and_unknown_mean():
    with pytest.raises(DomainError):
        M.sigma(TR.Exponential(1.0), M.uniform(), -1.0)
    with pytest.raises(CapabilityError):
        M.sigma(lambda s: np.exp(-s), M.uniform(), 1.0)


def test_sigma_concave_increasing():
    s = np.linspace(0, 10, 201)
    v = M.sigma(TR.SinhFamily(2.0), M.beta_tail(0.5), s)
    assert np.all(np.diff(v) > 0)
    assert np.all(np.diff(v, 2) <= 1e-14)


@pytest.mark.parametrize("law,m1,m2", [
    (M.uniform(), 0.5, 1 / 3),
    (M.beta_tail(2.0), 1 / 3, 1 / 6),
    (M.beta_tail(0.5), 2 / 3, 8 / 15),
    (M.example2d(), 1 / 6, 1 / 15),
    (M.usquared(), 1 / 3, 1 / 5),
    (M.exponential(2.0), 2.0, 8.0),
])
def test_quadrature_moments(law, m1, m2):
    assert law.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert law.quadrature_moment(1) == pytest.approx(m1, rel=1e-9)
    assert law.quadrature_moment(2) == pytest.approx(m2, rel=1e-8)
    assert M.moments_of(law) == (pytest.approx(m1), pytest.approx(m2))


def test_bad_mass_rejected():
    with pytest.raises(DomainError):
        M.atoms([(0.5, 0.4), (1.0, 0.4)])
    with pytest.raises(DomainError):
        M.uniform(1.0, 0.5)
    with pytest.raises(DomainError):
        M.beta_tail(0.0)


def test_lst_and_complement():
    law = M.exponential(1.5)
    x = np.array([0.0, 1e-10, 0.2, 5.0])
    assert np.allclose(law.lst(x), 1 / (1 + 1.5 * x), rtol=1e-15)
    assert np.allclose(law.lst_complement(x), 1.5 * x / (1 + 1.5 * x), rtol=1e-15)
    u = M.uniform()
    assert np.allclose(u.lst_complement(x) + u.lst(x), 1.0, atol=1e-15)
    assert u.lst_complement(1e-10) == pytest.approx(0.5e-10, rel=1e-8)


def test_sigma_B_examples():
    x = np.array([0.0, 0.5, 2.0, 10.0])
    assert np.allclose(M.sigma_B(M.atom(0.0), x), x, rtol=1e-15)
    assert np.allclose(M.sigma_B(M.atom(1.0), x), -np.expm1(-x), rtol=1e-15)
    ex = M.exponential(1.0)
    assert np.allclose(M.sigma_B(ex, x), np.log1p(x), rtol=1e-9)


@pytest.mark.parametrize("law", [M.uniform(), M.beta_tail(2.0), M.exponential(0.5),
                                 M.atoms([(0.0, 0.5), (2.0, 0.5)])],
                         ids=["uniform", "beta2", "exp", "atoms"])
def test_sigma_B_nodes_vs_adaptive(law):
    x = np.array([0.1, 1.0, 7.0])
    assert np.allclose(M.sigma_B(law, x), M.sigma_B(law, x, method="adaptive"), rtol=1e-9)


def test_sigma_star_against_nested_quadrature():
    mu = 1.0
    f = TR.ScaledCoshSquared(mu)
    s = np.array([0.05, 0.5, 2.0, 8.0])
    lhs = M.sigma_star(f, M.usquared(), s)
    ref = []
    for si in s:
        ref.append(mu * integrate.quad(lambda x: integrate.quad(
            lambda u: float(f(x * u * u)), 0, 1, epsabs=1e-14)[0], 0, si, epsabs=1e-13)[0])
    assert np.allclose(lhs, ref, rtol=1e-7)


def test_sigma_star_zero():
    assert M.sigma_star(TR.Exponential(1.0), M.uniform(), 0.0) == 0.0


@pytest.mark.parametrize("law", [M.uniform(0.2, 0.9), M.beta_tail(2.0), M.example2d(),
                                 M.usquared(), M.exponential(1.0),
                                 M.atoms([(0.1, 0.3), (0.6, 0.7)])],
                         ids=lambda l: l.name)
def test_samplers_match_lst(law, rng):
    x = law.sample(200_000, rng)
    for v in (0.5, 2.0):
        assert np.mean(np.exp(-v * x)) == pytest.approx(float(law.lst(v)), abs=5 * 0.5 / math.sqrt(x.size))


def test_cdf_and_descriptor():
    assert M.usquared().cdf(0.25) == pytest.approx(0.5)
    assert M.example2d().cdf(1.0) == pytest.approx(1.0)
    for d in ({"uniform": [0, 1]}, {"beta_tail": 2}, "example2d", "usquared", {"exp": 1.0},
              {"atom": 0.5}, {"atoms": [[0, 0.5], [1, 0.5]]}):
        law = M.from_descriptor(d)
        assert law.total_mass() == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(DomainError):
        M.from_descriptor({"weird": 1})
    with pytest.raises(DomainError):
        M.from_descriptor({"uniform": "x"})


def test_exponential_truncation_recorded():
    law = M.exponential(2.0)
    assert law.truncated_mass == 1e-12
    assert law.t_max == pytest.approx(-2.0 * math.log(1e-12))
