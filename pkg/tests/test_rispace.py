import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from besovkit.rearrange import l1_cap_linf, l1_plus_linf, profile_from_values
from besovkit.rispace import (RiSpec, associate, conjugate, convexified_norm, convexify,
                              fundamental_function, fundamental_indices, norm_gradient, parse_ri,
                              ri_norm)


def lz_oracle(spec: RiSpec, values, weights):
    """(int_0^m (s^{1/p} l(s)^{alpha|beta} f*(s))^q ds/s)^{1/q} by adaptive quadrature per step."""
    prof = profile_from_values(values, weights)
    a = 0.0 if math.isinf(spec.p) else 1.0 / spec.p

    def w(s):
        ex = spec.alpha if s < 1 else spec.beta
        return (s**a * (1 + abs(math.log(s))) ** ex) ** spec.q / s

    total = 0.0
    for v, s0, s1 in zip(prof.values, prof.breakpoints[:-1], prof.breakpoints[1:]):
        pts = [1.0] if s0 < 1 < s1 else None
        total += v**spec.q * quad(w, s0, s1, points=pts, limit=200, epsrel=1e-12)[0]
    return total ** (1 / spec.q)


def lorentz_oracle(p, q, values, weights):
    prof = profile_from_values(values, weights)
    total = 0.0
    for v, s0, s1 in zip(prof.values, prof.breakpoints[:-1], prof.breakpoints[1:]):
        total += v**q * quad(lambda s: s ** (q / p - 1), s0, s1, epsrel=1e-13)[0]
    return total ** (1 / q)


def test_lebesgue_indicator():
    prof = profile_from_values(np.ones(4), np.ones(4))
    assert ri_norm(RiSpec.lebesgue(2), prof) == pytest.approx(2.0)
    assert ri_norm(RiSpec.lebesgue(math.inf), prof) == 1.0


def test_lorentz_indicator_closed_form():
    prof = profile_from_values(np.ones(4), np.ones(4))
    # (p/q)^{1/q} m^{1/p} = (2)^{1/2} * 4^{1/4}
    assert ri_norm(RiSpec.lorentz(4, 2), prof) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1),
       st.sampled_from([(2, 1), (3, 2), (1.5, 4), (2, 2)]))
def test_lorentz_matches_quadrature(n, seed, pq):
    rng = np.random.default_rng(seed)
    f, w = rng.normal(size=n), rng.random(n) + 0.05
    val = ri_norm(RiSpec.lorentz(*pq), profile_from_values(f, w))
    assert val == pytest.approx(lorentz_oracle(*pq, f, w), rel=1e-9)


@pytest.mark.parametrize("spec", [RiSpec.lorentz_zygmund(2, 2, 1, 0), RiSpec.lorentz_zygmund(2, 1, -0.5, 1),
                                  RiSpec.lorentz_zygmund(3, 2, 0.5, -0.5), RiSpec.lorentz_zygmund(1, 1, 0, 1)])
def test_lz_matches_quadrature(spec, rng):
    f, w = rng.normal(size=9), rng.random(9) * 0.7 + 0.05
    assert ri_norm(spec, profile_from_values(f, w)) == pytest.approx(lz_oracle(spec, f, w), rel=1e-7)


def test_lz_weak_type_sup():
    spec = RiSpec.lorentz_zygmund(2, math.inf, 1, 0)
    f, w = np.array([1.0]), np.array([0.5])
    s = np.linspace(1e-9, 0.5, 200001)
    brute = np.max(s**0.5 * (1 + np.abs(np.log(s))))
    assert ri_norm(spec, profile_from_values(f, w)) == pytest.approx(brute, rel=1e-8)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, math.inf])
def test_fundamental_duality(p):
    t = np.geomspace(1e-4, 1e4, 20)
    X = RiSpec.lebesgue(p)
    prod = fundamental_function(X, t) * fundamental_function(associate(X), t)
    np.testing.assert_allclose(prod, t, rtol=1e-12)


def test_lz_fundamental_matches_norm_of_indicator():
    spec = RiSpec.lorentz_zygmund(2, 2, 1, 1)
    for m in (0.01, 0.5, 3.0):
        direct = ri_norm(spec, profile_from_values([1.0], [m]))
        assert float(fundamental_function(spec, np.array([m]))[0]) == pytest.approx(direct, rel=1e-9)
    big = np.geomspace(1e-3, 10, 100)
    small = [float(fundamental_function(spec, np.array([m]))[0]) for m in big[::11]]
    np.testing.assert_allclose(fundamental_function(spec, big)[::11], small, rtol=1e-8)


def test_associate_and_conjugate():
    assert conjugate(1) == math.inf and conjugate(math.inf) == 1 and conjugate(2) == 2
    a = associate(RiSpec.lorentz(3, 2))
    assert (a.p, a.q, a.equivalent) == (1.5, 2.0, True)
    with pytest.raises(ValueError):
        associate(RiSpec.lorentz_zygmund(2, 2, 1, 0))


@pytest.mark.parametrize("spec", [RiSpec.lebesgue(1.5), RiSpec.lorentz(2, 3), RiSpec.lorentz_zygmund(2, 2, 1, -1)])
def test_convexify_agrees_with_direct_power(spec, rng):
    prof = profile_from_values(rng.normal(size=10), rng.random(10) + 0.1)
    for r in (1.0, 2.0, 3.5):
        assert ri_norm(convexify(spec, r), prof) == pytest.approx(convexified_norm(spec, prof, r), rel=1e-9)
    with pytest.raises(ValueError):
        convexify(spec, 0.5)


def test_fundamental_indices_of_lebesgue_and_lz():
    lo, hi = fundamental_indices(RiSpec.lebesgue(2))
    assert lo == pytest.approx(0.5, abs=1e-9) and hi == pytest.approx(0.5, abs=1e-9)
    lo, hi = fundamental_indices(RiSpec.lorentz_zygmund(2, 2, 1, 0))
    assert lo == pytest.approx(0.5, abs=0.02) and hi == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("spec", [RiSpec.lebesgue(1), RiSpec.lebesgue(2.5), RiSpec.lorentz(2, 1),
                                  RiSpec.lorentz_zygmund(2, 2, 1, 0)])
def test_norm_gradient_matches_finite_differences(spec, rng):
    g = rng.random(7) + 0.1
    w = rng.random(7) + 0.1
    grad = norm_gradient(spec, g, w)
    h = 1e-7
    for i in range(g.size):
        gp, gm = g.copy(), g.copy()
        gp[i] += h
        gm[i] -= h
        fd = (ri_norm(spec, profile_from_values(gp, w)) - ri_norm(spec, profile_from_values(gm, w))) / (2 * h)
        assert grad[i] == pytest.approx(fd, abs=2e-6)


def test_parse_ri():
    assert parse_ri("Lp:2") == RiSpec.lebesgue(2)
    assert parse_ri("L1") == RiSpec.lebesgue(1)
    assert parse_ri("Linf") == RiSpec.lebesgue(math.inf)
    assert parse_ri("X=Lorentz:2,1") == RiSpec.lorentz(2, 1)
    assert parse_ri("LZ:2,2,1,0").label == "LZ:2,2,1,0"
    for bad in ("Lq:2", "Lorentz:2", "LZ:a,b"):
        with pytest.raises(ValueError):
            parse_ri(bad)


def test_spec_validation():
    with pytest.raises(ValueError):
        RiSpec.lebesgue(0.5)
    with pytest.raises(ValueError):
        RiSpec.lorentz(math.inf, 2)
    with pytest.raises(ValueError):
        RiSpec("orlicz", 2)


FAMILIES = [RiSpec.lebesgue(1), RiSpec.lebesgue(3), RiSpec.lebesgue(math.inf), RiSpec.lorentz(2, 1),
            RiSpec.lorentz(3, 4), RiSpec.lorentz_zygmund(2, 2, 1, 0)]


def _majorised(g, rng, rounds=6):
    """A convex combination of permutations of g: its partial sums of f* never exceed those of g*."""
    lam = rng.dirichlet(np.ones(rounds))
    return sum(l * g[rng.permutation(g.size)] for l in lam)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1), st.sampled_from(FAMILIES))
def test_homogeneity_lattice_and_hardy_domination(n, seed, spec):
    rng = np.random.default_rng(seed)
    w = np.full(n, 1.0 / n)
    g = np.abs(rng.normal(size=n))
    c = rng.uniform(-4, 4)
    pg = profile_from_values(g, w)
    assert ri_norm(spec, profile_from_values(c * g, w)) == pytest.approx(abs(c) * ri_norm(spec, pg), rel=1e-10)
    dominated = g * rng.random(n)
    assert ri_norm(spec, profile_from_values(dominated, w)) <= ri_norm(spec, pg) * (1 + 1e-12)
    f = _majorised(g, rng)
    pf = profile_from_values(f, w)
    r = np.union1d(pf.breakpoints, pg.breakpoints)[1:]
    assert np.all(pf.integral(r) <= pg.integral(r) + 1e-12)
    assert ri_norm(spec, pf) <= ri_norm(spec, pg) * (1 + 1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, math.inf])
def test_holder_with_constant_one(p, rng):
    X = RiSpec.lebesgue(p)
    for _ in range(20):
        w = rng.random(15) + 0.05
        f, g = rng.normal(size=15), rng.normal(size=15)
        lhs = np.sum(np.abs(f * g) * w)
        rhs = ri_norm(X, profile_from_values(f, w)) * ri_norm(associate(X), profile_from_values(g, w))
        assert lhs <= rhs * (1 + 1e-12)


def test_lorentz_associate_holder_constant(rng):
    X = RiSpec.lorentz(4, 2)
    Xa = associate(X)
    assert (Xa.p, Xa.q) == (pytest.approx(4 / 3), 2.0)
    worst = 0.0
    for _ in range(200):
        w = rng.random(12) + 0.05
        f, g = rng.normal(size=12), rng.normal(size=12)
        lhs = np.sum(np.abs(f * g) * w)
        worst = max(worst, lhs / (ri_norm(X, profile_from_values(f, w)) * ri_norm(Xa, profile_from_values(g, w))))
    assert 0 < worst <= 2.0


@pytest.mark.parametrize("pq", [(2, 1), (3, 2), (4, 2)])
def test_lorentz_fundamental_product_is_comparable_to_t(pq):
    X = RiSpec.lorentz(*pq)
    t = np.geomspace(1e-4, 1e4, 20)
    ratio = fundamental_function(X, t) * fundamental_function(associate(X), t) / t
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)
    assert 0.25 <= ratio[0] <= 4.0


@pytest.mark.parametrize("spec", FAMILIES)
def test_between_intersection_and_sum(spec, rng):
    ratios = []
    for _ in range(30):
        n = int(rng.integers(1, 20))
        prof = profile_from_values(rng.normal(size=n) * 3, rng.random(n) * 0.2 + 0.01)
        x = ri_norm(spec, prof)
        ratios += [x / l1_cap_linf(prof), l1_plus_linf(prof) / x]
    assert max(ratios) <= 4.0
