"""1-gradients, Hajlasz-Sobolev norms and K-functionals of the Hajlasz couple.

A 1-gradient of f is any g >= 0 with |f(x) - f(y)| <= d(x, y) (g(x) + g(y)).
With c(x, y) = |f(x) - f(y)| / d(x, y) the admissible set is the polyhedron
{g >= 0 : g(x) + g(y) >= c(x, y) for x != y}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .mmspace import MMSpace
from .rearrange import k_classical, profile_from_values
from .rispace import RiSpec, convexify, norm_gradient, ri_norm
from .smoothness import _ball_power_means, modulus
from .svparam import DEFAULT_T_MAX, DEFAULT_T_MIN, ParamSpec, SVFn, grid_nodes, tilde_norm

FEASIBILITY_TOL = 1e-12
LP_MAX_POINTS = 64
PIVOT_MAX_POINTS = 24
METHODS = ("auto", "lp", "descent")


@dataclass(frozen=True, eq=False)
class GradientCertificate:
    g: np.ndarray
    feasible: bool
    slack: float
    method: str

    def to_dict(self) -> dict:
        return {"g": self.g.tolist(), "feasible": self.feasible, "slack": self.slack,
                "method": self.method}


def _quotients(space: MMSpace, f: np.ndarray) -> np.ndarray:
    """c[x, y] = |f(x) - f(y)| / d(x, y) off the diagonal, 0 on it."""
    diff = np.abs(f[:, None] - f[None, :])
    d = space.dist
    off = ~np.eye(space.point_count, dtype=bool)
    if np.any((d == 0) & off & (diff > 0)):
        raise ValueError("no gradient exists: points at distance 0 carry different values")
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(d > 0, diff / d, 0.0)
    return c


def _slack(space: MMSpace, f: np.ndarray, g: np.ndarray) -> float:
    N = space.point_count
    if N < 2:
        return math.inf
    s = space.dist * (g[:, None] + g[None, :]) - np.abs(f[:, None] - f[None, :])
    s[np.eye(N, dtype=bool)] = math.inf
    return float(s.min())


def _certify(space: MMSpace, f: np.ndarray, g: np.ndarray, method: str) -> GradientCertificate:
    g = np.maximum(np.asarray(g, dtype=float), 0.0)
    sl = _slack(space, f, g)
    g.setflags(write=False)
    return GradientCertificate(g=g, feasible=sl >= -FEASIBILITY_TOL, slack=sl, method=method)


def feasible_gradient(space: MMSpace, f) -> GradientCertificate:
    """g(x) = max_{y != x} |f(x) - f(y)| / d(x, y); always admissible."""
    f = np.asarray(f, dtype=float)
    c = _quotients(space, f)
    return _certify(space, f, c.max(axis=1) if c.size else np.zeros(0), "pointwise-sup")


def _raise(c: np.ndarray, g: np.ndarray) -> np.ndarray:
    # each endpoint takes half of its worst deficit: one pass restores feasibility
    deficit = np.maximum(c - g[:, None] - g[None, :], 0.0)
    np.fill_diagonal(deficit, 0.0)
    return g + 0.5 * deficit.max(axis=1)


def _lower(c: np.ndarray, g: np.ndarray, order: np.ndarray) -> np.ndarray:
    # Gauss-Seidel: set each g(x) to the least value its constraints allow
    g = g.copy()
    for x in order:
        need = c[x] - g
        need[x] = 0.0
        g[x] = max(0.0, float(need.max()))
    return g


def _lp_gradient(c: np.ndarray, weights: np.ndarray, X: RiSpec) -> np.ndarray:
    N = c.shape[0]
    iu, ju = np.triu_indices(N, 1)
    mask = c[iu, ju] > 0
    iu, ju, rhs = iu[mask], ju[mask], c[iu, ju][mask]
    m = iu.size
    rows = np.repeat(np.arange(m), 2)
    cols = np.stack([iu, ju], axis=1).ravel()
    A = sparse.csr_matrix((-np.ones(2 * m), (rows, cols)), shape=(m, N))
    if X.family == "lebesgue" and X.p == 1:
        res = linprog(weights, A_ub=A, b_ub=-rhs, bounds=[(0, None)] * N, method="highs")
        if not res.success:
            raise RuntimeError(f"LP failed: {res.message}")
        return res.x
    # epigraph form for the sup norm: minimise s subject to g <= s
    A = sparse.hstack([A, sparse.csr_matrix((m, 1))])
    cap = sparse.hstack([sparse.eye(N), -np.ones((N, 1))])
    res = linprog(np.r_[np.zeros(N), 1.0], A_ub=sparse.vstack([A, cap]).tocsr(),
                  b_ub=np.r_[-rhs, np.zeros(N)], bounds=[(0, None)] * (N + 1), method="highs")
    if not res.success:
        raise RuntimeError(f"LP failed: {res.message}")
    return res.x[:N]


def _lp_legal(X: RiSpec, N: int) -> bool:
    return X.family == "lebesgue" and (X.p == 1 or math.isinf(X.p)) and N <= LP_MAX_POINTS


def _descent(c: np.ndarray, weights: np.ndarray, X: RiSpec, g0: np.ndarray, iters: int,
             seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)

    def value(g):
        return ri_norm(X, profile_from_values(g, weights))

    N = g0.size
    tidy = lambda g: _lower(c, _raise(c, np.maximum(g, 0.0)), np.argsort(-g, kind="stable"))
    g = tidy(g0)
    best_g, best = g, value(g)
    scale = float(g0.max()) if g0.size else 0.0
    for k in range(iters):
        grad = norm_gradient(X, g, weights)
        gn = float(np.abs(grad).max())
        if scale == 0 or gn == 0:
            break
        step = 0.5 * scale / math.sqrt(k + 1) / gn
        noise = 1.0 + 0.1 * rng.standard_normal(N)
        g = tidy(g - step * grad * noise)
        v = value(g)
        if v < best:
            best, best_g = v, g
        elif k % 10 == 9:
            g = best_g
    if N <= PIVOT_MAX_POINTS:
        best_g = _pivot_search(c, best_g, value)
    return best_g


def _pivot_search(c: np.ndarray, g: np.ndarray, value, rounds: int = 20) -> np.ndarray:
    """Local search: reset one g(x) to a partner quotient, then re-lower the rest.

    Raising g(x) to c(x, y) releases y from that constraint, which the
    Gauss-Seidel pass can then exploit; moves are kept only if they improve.
    """
    best = value(g)
    N = g.size
    for _ in range(rounds):
        improved = False
        for x in range(N):
            for v in np.unique(np.append(c[x], 0.0)):
                if v == g[x]:
                    continue
                trial = g.copy()
                trial[x] = v
                trial = _raise(c, trial)
                others = np.array([y for y in np.argsort(-trial, kind="stable") if y != x])
                trial = _lower(c, trial, others)
                tv = value(trial)
                if tv < best * (1 - 1e-12):
                    best, g, improved = tv, trial, True
        if not improved:
            break
    return g


def minimal_gradient_norm(space: MMSpace, f, X: RiSpec, method: str = "auto", iters: int = 150):
    """Smallest ||g||_X over 1-gradients g of f; returns (value, certificate).

    ``lp`` is exact for L^1 and L^inf on at most 64 points.  ``descent`` runs
    projected subgradient steps from the pointwise-sup gradient, restoring
    feasibility after each step, and never returns worse than its start.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    f = np.asarray(f, dtype=float)
    c = _quotients(space, f)
    start = c.max(axis=1) if c.size else np.zeros(space.point_count)
    w = space.weights
    if not np.any(start > 0):
        cert = _certify(space, f, np.zeros_like(start), "pointwise-sup")
        return 0.0, cert
    if method == "lp" and not _lp_legal(X, space.point_count):
        raise ValueError("lp method needs X in {L1, Linf} and at most 64 points")
    if method == "lp" or (method == "auto" and _lp_legal(X, space.point_count)):
        g = _raise(c, np.maximum(_lp_gradient(c, w, X), 0.0))
        tag = "LP-exact"
    else:
        g = _descent(c, w, X, start, iters)
        tag = "improved"
    cert = _certify(space, f, g, tag)
    if not cert.feasible:
        raise RuntimeError(f"gradient certificate infeasible (slack {cert.slack:.3e})")
    return ri_norm(X, profile_from_values(cert.g, w)), cert


# ---------------------------------------------------------------------------
# K-functional of (X^{(p)}, Hajlasz-Sobolev over X^{(p)})


@dataclass(frozen=True)
class Decomposition:
    """f = g + h with A = ||g||_{X^(p)} and B = Hajlasz norm of h."""

    name: str
    A: float
    B: float

    def cost(self, t):
        return self.A + np.asarray(t, dtype=float) * self.B


@dataclass
class KSandwich:
    t: float
    lower: float
    upper: float
    direct: float
    lower_E: float = math.nan
    upper_tail: float = 0.0
    best: str = ""
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"t": self.t, "lower": self.lower, "upper": self.upper, "direct": self.direct,
                "lower_E": self.lower_E, "upper_tail": self.upper_tail, "best": self.best}


def ball_mean(space: MMSpace, f, r: float) -> np.ndarray:
    """Signed average of f over B(x, r) for every centre x."""
    f = np.asarray(f, dtype=float)
    lo = float(np.min(f))
    # shift to a nonnegative field so the |.|-based kernel returns plain means
    return _ball_power_means(space, f - lo, np.array([float(r)]), 1.0, centered=False)[:, 0] + lo


def decompositions(space: MMSpace, f, X: RiSpec, p: float = 1.0, radii=None, levels: int = 16,
                   inhomogeneous: bool = False, method: str = "auto") -> list[Decomposition]:
    """Candidate splittings used for the direct K upper bound.

    Trivial splittings, truncations at quantiles of |f|, ball-average
    smoothings and constants.  A is measured in X^{(p)}; B is the minimal
    gradient norm in X^{(p)} (plus ||h|| for the inhomogeneous couple).
    """
    f = np.asarray(f, dtype=float)
    Xp = convexify(X, p)
    w = space.weights

    def norm(v):
        return ri_norm(Xp, profile_from_values(v, w))

    cache: dict = {}

    def hnorm(h):
        key = h.tobytes()
        if key not in cache:
            val, _ = minimal_gradient_norm(space, h, Xp, method)
            cache[key] = val + (norm(h) if inhomogeneous else 0.0)
        return cache[key]

    out = [Decomposition("zero", norm(f), 0.0), Decomposition("identity", 0.0, hnorm(f))]
    if not inhomogeneous:
        mean = float(np.sum(f * w) / space.total_mass)
        for name, c in (("mean", mean), ("median", float(np.median(f)))):
            out.append(Decomposition(f"const:{name}", norm(f - c), 0.0))
    mags = np.unique(np.abs(f))
    if mags.size > 1:
        for lam in np.unique(np.quantile(mags, np.linspace(0, 1, levels + 2)[1:-1])):
            h = np.clip(f, -lam, lam)
            out.append(Decomposition(f"trunc:{lam:.6g}", norm(f - h), hnorm(h)))
    if radii is None:
        lo, hi = space.min_distance, space.diameter
        radii = np.geomspace(lo * 1.01, hi * 1.01, 8) if lo > 0 else []
    for r in radii:
        h = ball_mean(space, f, r)
        out.append(Decomposition(f"avg:{r:.6g}", norm(f - h), hnorm(h)))
    return out


def k_direct(decs: list[Decomposition], t):
    """min over decompositions of A + t B (a certified upper bound for K)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    costs = np.array([d.cost(t) for d in decs])
    return costs.min(axis=0), [decs[i].name for i in costs.argmin(axis=0)]


def dyadic_upper(space: MMSpace, f, X: RiSpec, p: float, t: float, J: int = 40,
                 variant: str = "calE") -> tuple[float, float]:
    """sum_{j=0}^{J} 2^{-j} M(f, 2^j t) and the bound on the omitted tail.

    M is the calE modulus (or E measured in X^{(p)}); terms are frozen once
    2^j t exceeds the diameter, so only the unfrozen radii are evaluated.
    """
    j_all = np.arange(J + 1)
    radii = t * 2.0 ** j_all
    live = radii <= space.diameter
    n_live = int(live.sum())
    eval_r = np.append(radii[live], space.diameter * 2.0)
    Xp = convexify(X, p)
    if variant == "calE":
        vals = modulus(space, f, X, eval_r, "calE", p).values
    else:
        vals = modulus(space, f, Xp, eval_r, "E").values
    terms = np.where(live, 0.0, vals[-1])
    terms[:n_live] = vals[:n_live]
    s = float(np.sum(2.0 ** -j_all * terms))
    frozen = float(vals[-1])
    return s, frozen * 2.0 ** -J


def k_sobolev(space: MMSpace, f, X: RiSpec, p: float, t: float, J: int = 40,
              decs: list[Decomposition] | None = None, method: str = "auto") -> KSandwich:
    """The three members of the K sandwich at a single t."""
    if not t > 0:
        raise ValueError("t must be positive")
    f = np.asarray(f, dtype=float)
    Xp = convexify(X, p)
    lower = float(modulus(space, f, X, [t], "calE", p).values[0])
    lower_E = float(modulus(space, f, Xp, [t], "E").values[0])
    upper, tail = dyadic_upper(space, f, X, p, t, J)
    if decs is None:
        decs = decompositions(space, f, X, p, method=method)
    direct, names = k_direct(decs, t)
    return KSandwich(t=float(t), lower=lower, upper=upper + tail, direct=float(direct[0]),
                     lower_E=lower_E, upper_tail=tail, best=names[0])


def interp_norm(space: MMSpace, f, couple: str, theta: float, b: SVFn, E: ParamSpec,
                X: RiSpec | None = None, p: float = 1.0, inhomogeneous: bool = False,
                method: str = "auto", decs: list[Decomposition] | None = None) -> float:
    """|| t^{-theta} b(t) K(f, t) ||_{E~} for the couple (L1, Linf) or the Hajlasz couple.

    ``couple`` is ``"L1Linf"`` (exact K from the rearrangement) or
    ``"hajlasz"`` (the direct upper bound for K with X^{(p)}).
    """
    if not (0 < theta < 1):
        raise ValueError("theta must lie strictly between 0 and 1")
    f = np.asarray(f, dtype=float)
    t = grid_nodes(DEFAULT_T_MIN, DEFAULT_T_MAX, 64)
    if couple == "L1Linf":
        prof = profile_from_values(f, space.weights)
        # K is piecewise linear with kinks at the breakpoints; keep them as nodes
        t = np.union1d(t, prof.breakpoints[(prof.breakpoints > t[0]) & (prof.breakpoints < t[-1])])
        K = k_classical(prof, t)
    elif couple == "hajlasz":
        if X is None:
            raise ValueError("the Hajlasz couple needs an r.i. space X")
        if decs is None:
            decs = decompositions(space, f, X, p, inhomogeneous=inhomogeneous, method=method)
        K, _ = k_direct(decs, t)
    else:
        raise ValueError(f"unknown couple {couple!r}")
    return tilde_norm(E.with_flavor("dt_over_t"), (t, t**-theta * b(t) * K))


def interp_norm_indicator(m: float, theta: float, q: float) -> float:
    """Closed form for f = chi_A, mu(A) = m, b = 1, E = L^q, couple (L1, Linf)."""
    if math.isinf(q):
        return m ** (1 - theta)
    return m ** (1 - theta) * (theta * (1 - theta) * q) ** (-1.0 / q)

