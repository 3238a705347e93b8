import math

import numpy as np
import pytest

from besovkit.besov import (BesovSpec, besov_curve, besov_norm, besov_report, besov_t_grid,
                            classical_besov_circle, norm_from_curve)
from besovkit.mmspace import circle_grid, from_matrix, random_cloud
from besovkit.rearrange import profile_from_values
from besovkit.rispace import RiSpec, ri_norm
from besovkit.svparam import ParamSpec, SVFn, tilde_norm
from conftest import brute_ball_mean_dev

L1, L2 = RiSpec.lebesgue(1), RiSpec.lebesgue(2)


def test_constant_field():
    s = circle_grid(64)
    f = np.full(64, 3.0)
    spec = BesovSpec(0.5, X=L2, E=ParamSpec.lebesgue(2))
    assert besov_norm(s, f, spec) == 0.0
    assert besov_norm(s, f, spec.with_(homogeneous=False)) == pytest.approx(3.0)


def test_spec_contract():
    with pytest.raises(ValueError):
        BesovSpec(0.0)
    with pytest.raises(ValueError):
        BesovSpec(0.5, tsplit=0.0)
    assert BesovSpec(0.5, E=ParamSpec.lebesgue(2, flavor="dt")).E.flavor == "dt_over_t"


def test_arc_against_double_sum_oracle():
    N = 128
    s = circle_grid(N)
    for s0 in (0.125, 0.25):
        f = (np.arange(N) < int(s0 * N)).astype(float)
        spec = BesovSpec(0.5, X=L1, E=ParamSpec.lebesgue(1))
        t = besov_t_grid(s)
        e = np.array([ri_norm(L1, profile_from_values(brute_ball_mean_dev(s, f, r), s.weights))
                      if r <= s.diameter else np.nan for r in t])
        e[np.isnan(e)] = ri_norm(L1, profile_from_values(brute_ball_mean_dev(s, f, 1.5 * s.diameter), s.weights))
        oracle = tilde_norm(spec.E, (t, t**-0.5 * e))
        assert besov_norm(s, f, spec) == pytest.approx(oracle, rel=1e-12)


def test_doubling_arc_keeps_small_scale_part():
    # for radii below both arc lengths the modulus only sees the two jumps
    N = 256
    s = circle_grid(N)
    small = besov_curve(s, (np.arange(N) < 32).astype(float), L1)
    large = besov_curve(s, (np.arange(N) < 64).astype(float), L1)
    m = small.t < 0.1
    np.testing.assert_allclose(small.values[m], large.values[m], rtol=1e-12)


def test_absolute_homogeneity_and_quasi_triangle(rng):
    s = random_cloud(40, seed=5)
    f, g = rng.normal(size=40), rng.normal(size=40)
    spec = BesovSpec(0.6, SVFn(1, 1), L2, ParamSpec.lebesgue(2))
    nf, ng = besov_norm(s, f, spec), besov_norm(s, g, spec)
    assert besov_norm(s, -2.5 * f, spec) == pytest.approx(2.5 * nf, rel=1e-12)
    assert besov_norm(s, f + g, spec) <= 1.01 * (nf + ng)


def test_monotone_in_parameter_space():
    s = circle_grid(256)
    f = np.sin(2 * np.pi * np.arange(256) / 256)
    c = besov_curve(s, f, L2)
    vals = [norm_from_curve(c, BesovSpec(0.5, X=L2, E=ParamSpec.lebesgue(q))) for q in (1, 2, math.inf)]
    assert vals[2] <= 2 * vals[1] and vals[1] <= 2 * vals[0]


def test_vanishing_iff_constant_on_chain_components():
    # two clusters farther apart than the top of the curve grid act as separate components
    d = np.full((4, 4), 1e6)
    d[:2, :2] = d[2:, 2:] = 1.0
    np.fill_diagonal(d, 0.0)
    s = from_matrix(d)
    spec = BesovSpec(0.5, X=L1)
    t = besov_t_grid(s, t_top=10.0)[besov_t_grid(s, t_top=10.0) < 1e5]
    piecewise = np.array([1.0, 1.0, -4.0, -4.0])
    c = besov_curve(s, piecewise, L1, t)
    assert norm_from_curve(c, spec) == 0.0
    c = besov_curve(s, np.array([1.0, 2.0, -4.0, -4.0]), L1, t)
    assert norm_from_curve(c, spec) > 0


@pytest.mark.parametrize("p,q,theta", [(1, 1, 0.5), (2, 2, 0.5), (2, 1, 0.3)])
def test_ratio_to_classical_seminorm_is_bounded(p, q, theta):
    N = 512
    s = circle_grid(N)
    x = np.arange(N) / N
    for f in (np.sin(2 * np.pi * x), (x < 0.3).astype(float)):
        t = besov_t_grid(s)
        ours = besov_norm(s, f, BesovSpec(theta, X=RiSpec.lebesgue(p), E=ParamSpec.lebesgue(q)))
        classical = classical_besov_circle(f, theta, p, q, t[t <= 0.5])
        assert 0.1 < ours / classical < 10


def test_inhomogeneous_split_contract():
    s = circle_grid(32)
    f = np.sin(np.arange(32.0))
    c = besov_curve(s, f, L1)
    with pytest.raises(ValueError, match="tsplit"):
        norm_from_curve(c, BesovSpec(0.5, homogeneous=False, tsplit=1e3), 1.0)
    assert norm_from_curve(c, BesovSpec(0.5, homogeneous=False, tsplit=1e-9), 2.0) == 2.0
    rep = besov_report(s, f, BesovSpec(0.5))
    assert rep["norm"] > 0 and rep["notes"]
