import numpy as np
import pytest

from besovkit.mmspace import from_matrix, from_points


def dyadic_space(n: int, rng: np.random.Generator, dim: int = 2):
    """Random point cloud whose weights are multiples of 1/64, so mass sums are exact."""
    pts = rng.random((n, dim))
    w = rng.integers(1, 9, n) / 64.0
    return from_points(pts, weights=w, name=f"dyadic{n}")


def brute_star(values, weights, s):
    """f*(s) from the definition inf{tau >= 0 : mu{|f| > tau} <= s}."""
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    cands = np.unique(np.concatenate([[0.0], a]))
    out = []
    for si in np.atleast_1d(s):
        ok = [tau for tau in cands if w[a > tau].sum() <= si]
        out.append(min(ok))
    return np.array(out)


def brute_ball_mean_dev(space, f, r, p=1.0):
    """x -> (mean over the open ball B(x, r) of |f(x) - f(y)|^p)^{1/p}, double loop."""
    N = space.point_count
    out = np.empty(N)
    for x in range(N):
        m = space.dist[x] < r
        w = space.weights[m]
        out[x] = (np.sum(np.abs(f[x] - f[m]) ** p * w) / w.sum()) ** (1.0 / p)
    return out


def truncation_scan_K(values, weights, t):
    """K(f, t; L1, Linf) = min over tau in {0} U |f| of int (|f| - tau)_+ + t tau."""
    a = np.abs(values)
    cands = np.unique(np.concatenate([[0.0], a]))
    return min(float(np.sum(np.maximum(a - tau, 0) * weights) + t * tau) for tau in cands)


def brute_bmo(space, f, mass_cut=1.0):
    """Enumerate the N^2 balls B(x, r): every centre, every radius just above one of its distances."""
    N = space.point_count
    w = space.weights
    osc, mean_sup = 0.0, 0.0
    for x in range(N):
        for d in np.unique(space.dist[x]):
            m = space.dist[x] <= d  # the open ball of any radius in (d, next distance]
            mass = w[m].sum()
            avg = np.sum(f[m] * w[m]) / mass
            if mass <= mass_cut * (1 + 1e-12):
                osc = max(osc, np.sum(np.abs(f[m] - avg) * w[m]) / mass)
            else:
                mean_sup = max(mean_sup, abs(avg))
    return osc + mean_sup


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_point():
    return from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.5, 0.5]), name="two")
