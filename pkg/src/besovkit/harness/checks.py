"""Inequality checks evaluated on one battery.

Every check returns a list of Records.  A record holds a left side and a
right side of one inequality ``lhs <= C * rhs`` for one field and one
parameter set; constants and pass flags are derived in ``report``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..besov import BesovSpec, besov_curve, norm_from_curve
from ..hajlasz import ball_mean, decompositions, dyadic_upper, k_direct, interp_norm
from ..rearrange import l1_plus_linf, maximal, oscillation, profile_from_values
from ..rispace import RiSpec, convexify, fundamental_function, fundamental_indices, ri_norm
from ..smoothness import bmo_norm, modulus, suerte_bounds
from ..svparam import DEFAULT_T_MAX, DEFAULT_T_MIN, ParamSpec, SVFn, grid_nodes, tilde_norm
from .batteries import Battery

DISPATCH_TOL = 0.02
BMO_MAX_POINTS = 512
PAIR_LIMIT = 1_000_000

L1, L2, L4, L8 = (RiSpec.lebesgue(p) for p in (1, 2, 4, 8))
LINF = RiSpec.lebesgue(math.inf)
E1, E2, EINF = ParamSpec.lebesgue(1), ParamSpec.lebesgue(2), ParamSpec.lebesgue(math.inf)
ONE = SVFn()
LOG11, LOG10, LOGM = SVFn(1.0, 1.0), SVFn(1.0, 0.0), SVFn(-0.5, 0.0)


@dataclass
class Record:
    check: str
    battery: str
    field: str
    params: dict
    lhs: float
    rhs: float
    scale: float = 1.0  # max(1, max|f|), sets the zero tolerance

    def to_dict(self) -> dict:
        return {"check_id": self.check, "battery": self.battery, "field": self.field,
                "params": self.params, "lhs": self.lhs, "rhs": self.rhs}


_INDEX_CACHE: dict[str, tuple[float, float]] = {}


def x_indices(X: RiSpec) -> tuple[float, float]:
    if X.label not in _INDEX_CACHE:
        _INDEX_CACHE[X.label] = fundamental_indices(X)
    return _INDEX_CACHE[X.label]


def _b_label(b) -> str:
    return getattr(b, "label", "custom")


@dataclass
class Context:
    """Per-battery cache of curves, profiles and decomposition families."""

    battery: Battery
    _curves: dict = field(default_factory=dict)
    _decs: dict = field(default_factory=dict)

    @property
    def space(self):
        return self.battery.space

    @property
    def geometry(self):
        return self.battery.geometry

    @property
    def fields(self) -> dict[str, np.ndarray]:
        return self.battery.fields

    def scale(self, name: str) -> float:
        return max(1.0, float(np.max(np.abs(self.fields[name]))))

    def rec(self, check: str, name: str, params: dict, lhs: float, rhs: float) -> Record:
        return Record(check, self.battery.name, name, params, float(lhs), float(rhs), self.scale(name))

    def curve(self, name: str, X: RiSpec, variant: str = "E", p: float = 1.0):
        key = (name, X.label, variant, p)
        if key not in self._curves:
            self._curves[key] = besov_curve(self.space, self.fields[name], X, variant=variant, p=p,
                                            field_id=name)
        return self._curves[key]

    def xnorm(self, name: str, X: RiSpec) -> float:
        return ri_norm(X, profile_from_values(self.fields[name], self.space.weights))

    def besov(self, name: str, theta: float, b, X: RiSpec, E: ParamSpec,
              homogeneous: bool = True) -> float:
        spec = BesovSpec(theta=theta, b=b, X=X, E=E, homogeneous=homogeneous)
        f_norm = 0.0 if homogeneous else self.xnorm(name, X)
        return norm_from_curve(self.curve(name, X), spec, f_norm)

    def decs(self, name: str, X: RiSpec, p: float = 1.0, inhomogeneous: bool = False):
        key = (name, convexify(X, p).label, inhomogeneous)
        if key not in self._decs:
            self._decs[key] = decompositions(self.space, self.fields[name], X, p,
                                             inhomogeneous=inhomogeneous)
        return self._decs[key]

    def centered(self, name: str) -> np.ndarray:
        f = self.fields[name]
        w = self.space.weights
        return f - float(np.sum(f * w) / np.sum(w))


# ---------------------------------------------------------------- embeddings

def check_emm(ctx: Context) -> list[Record]:
    """B(X, L1) <= B(X, E) <= B(X, Linf), homogeneous and inhomogeneous."""
    out = []
    for name in ctx.fields:
        for b in (ONE, LOG11):
            for hom in (True, False):
                n1 = ctx.besov(name, 0.5, b, L2, E1, hom)
                nE = ctx.besov(name, 0.5, b, L2, E2, hom)
                ni = ctx.besov(name, 0.5, b, L2, EINF, hom)
                params = {"theta": 0.5, "b": b.label, "X": L2.label, "E": E2.label, "homogeneous": hom}
                out.append(ctx.rec("emm.E_le_L1", name, params, nE, n1))
                out.append(ctx.rec("emm.Linf_le_E", name, params, ni, nE))
    return out


def check_param_convex(ctx: Context) -> list[Record]:
    """B(X, E^(q)) <= C B(X, E^(p)) for p < q with E = L1."""
    out = []
    for name in ctx.fields:
        for p, q in ((1, 2), (2, 4)):
            Ep, Eq = E1.convexify(p), E1.convexify(q)
            for hom in (True, False):
                lhs = ctx.besov(name, 0.5, LOG11, L2, Eq, hom)
                rhs = ctx.besov(name, 0.5, LOG11, L2, Ep, hom)
                params = {"p": p, "q": q, "theta": 0.5, "b": LOG11.label, "X": L2.label,
                          "homogeneous": hom}
                out.append(ctx.rec("param_convex", name, params, lhs, rhs))
    return out


def gamma_sweep(X: RiSpec) -> list[float]:
    beta_bar = min(1.0, max(0.0, x_indices(X)[1]))
    return sorted({round(g, 6) for g in (beta_bar, (beta_bar + 1) / 2, 1.0)})


def check_anterior(ctx: Context) -> list[Record]:
    """Convexification of X: parts (i), (ii) and the submultiplicative bound (iii)."""
    out = []
    p, sigma, theta, b = 1.0, 2.0, 0.4, LOG11
    n = ctx.geometry.n
    for X in (L1, L2):
        Xp, Xsp = convexify(X, p), convexify(X, sigma * p)
        for gamma in gamma_sweep(X):
            alpha = theta + n * gamma / p * (1 - 1 / sigma)
            params = {"X": X.label, "p": p, "sigma": sigma, "theta": theta, "b": b.label,
                      "gamma": gamma, "alpha": alpha, "E": E2.label}
            for name in ctx.fields:
                B_alpha = ctx.besov(name, alpha, b, Xp, E2, homogeneous=False)
                out.append(ctx.rec("anterior.i", name, params,
                                   ctx.besov(name, theta, b, Xsp, E2, True), B_alpha))
                out.append(ctx.rec("anterior.ii", name, params,
                                   ctx.besov(name, theta, b, Xsp, E2, False), B_alpha))
                A = ctx.xnorm(name, Xp)
                rhs = 0.0
                if A > 0 and B_alpha > 0:
                    e = theta / alpha
                    corr = 1.0 + 1.0 / float(b((A / B_alpha) ** e))
                    rhs = A**e * B_alpha ** (1 - e) * corr
                out.append(ctx.rec("anterior.submult", name, params, ctx.xnorm(name, Xsp), rhs))
    return out


def check_suerte(ctx: Context) -> list[Record]:
    """Ball-average bounds from X^(p) into X^(q), parts (i) and (ii)."""
    out = []
    sp = ctx.space
    radii = (2 * sp.min_distance, 0.1 * sp.diameter, 0.3 * sp.diameter)
    for name, f in ctx.fields.items():
        for p, q in ((1, 1), (1, 2), (2, 4)):
            for r in radii:
                res = suerte_bounds(sp, f, L1, p, q, r, ctx.geometry)
                params = {"X": L1.label, "p": p, "q": q, "r": r}
                for part in ("i", "ii"):
                    out.append(ctx.rec(f"suerte.{part}", name, params, res[part]["lhs"], res[part]["rhs"]))
    return out


def check_qc(ctx: Context) -> list[Record]:
    """E_X(f, a) <= c E_X(f, b) whenever a <= b <= 2a."""
    out = []
    for X in (L1, L2):
        for name in ctx.fields:
            c = ctx.curve(name, X)
            t, v = c.t, c.values
            worst = (0.0, 0.0, 0.0)
            zero_rhs = None
            for i in range(t.size):
                j = np.flatnonzero((t >= t[i]) & (t <= 2 * t[i] * (1 + 1e-12)))
                for jj in j:
                    if v[jj] > 0:
                        r = v[i] / v[jj]
                        if r > worst[0]:
                            worst = (r, v[i], v[jj])
                    elif v[i] > 0:
                        zero_rhs = (v[i], v[jj])
            lhs, rhs = zero_rhs if zero_rhs else worst[1:]
            out.append(ctx.rec("qc", name, {"X": X.label}, lhs, rhs))
    return out


# ------------------------------------------------------------- interpolation

def check_sandwich(ctx: Context) -> list[Record]:
    """lower <= C1 direct and direct <= C2 upper for the K sandwich."""
    out = []
    sp = ctx.space
    ts = np.geomspace(sp.min_distance / 2, 2 * sp.diameter, 8)
    for p in (1.0, 2.0):
        for name, f in ctx.fields.items():
            decs = ctx.decs(name, L1, p)
            direct, _ = k_direct(decs, ts)
            lower = modulus(sp, f, L1, ts, "calE", p).values
            for t, lo, di in zip(ts, lower, direct):
                up, tail = dyadic_upper(sp, f, L1, p, float(t))
                params = {"X": L1.label, "p": p, "t": float(t)}
                out.append(ctx.rec("sandwich.C1", name, params, lo, di))
                out.append(ctx.rec("sandwich.C2", name, params, di, up + tail))
    return out


INTERP_SETS = ((0.5, ONE, E2), (0.3, LOG10, E2))


def check_interp(ctx: Context) -> list[Record]:
    """Besov norm of X^(p) against the (X^(p), Hajlasz) interpolation norm, both ways."""
    out = []
    for p in (1.0, 2.0):
        Xp = convexify(L1, p)
        for theta, b, E in INTERP_SETS:
            for hom in (True, False):
                params = {"X": L1.label, "p": p, "theta": theta, "b": b.label, "E": E.label,
                          "homogeneous": hom}
                for name, f in ctx.fields.items():
                    bn = ctx.besov(name, theta, b, Xp, E, hom)
                    inn = interp_norm(ctx.space, f, "hajlasz", theta, b, E, X=L1, p=p,
                                      inhomogeneous=not hom,
                                      decs=ctx.decs(name, L1, p, inhomogeneous=not hom))
                    out.append(ctx.rec("interp.besov_le_K", name, params, bn, inn))
                    out.append(ctx.rec("interp.K_le_besov", name, params, inn, bn))
    return out


def _reiteration_parts(ctx: Context, f: np.ndarray, levels: int = 16) -> list[tuple[str, np.ndarray]]:
    sp = ctx.space
    parts = [("zero", np.zeros_like(f)), ("identity", f.copy())]
    mags = np.unique(np.abs(f))
    if mags.size > 1:
        for lam in np.unique(np.quantile(mags, np.linspace(0, 1, levels + 2)[1:-1])):
            parts.append((f"trunc:{lam:.6g}", np.clip(f, -lam, lam)))
    for r in np.geomspace(sp.min_distance * 1.01, sp.diameter * 1.01, 8):
        parts.append((f"avg:{r:.6g}", ball_mean(sp, f, r)))
    return parts


def reiterated_b(b0, b1, b, theta0: float, theta1: float, theta: float) -> Callable:
    """b~(t) = b0^{1-theta} b1^theta b(t^{theta1-theta0} b0 / b1)."""
    def bt(t):
        t = np.asarray(t, dtype=float)
        return (b0(t) ** (1 - theta) * b1(t) ** theta
                * b(t ** (theta1 - theta0) * b0(t) / b1(t)))
    return bt


def check_reiteration(ctx: Context) -> list[Record]:
    """(B^{theta0,b0}, B^{theta1,b1})_{theta,b,E} against B^{theta~,b~}, both ways."""
    out = []
    sp = ctx.space
    theta0, theta1, theta = 0.25, 0.75, 0.5
    t = grid_nodes(DEFAULT_T_MIN, DEFAULT_T_MAX, 64)
    for b0, b1, b in ((ONE, ONE, ONE), (ONE, LOG10, ONE)):
        tt = (1 - theta) * theta0 + theta * theta1
        bt = reiterated_b(b0, b1, b, theta0, theta1, theta)
        params = {"theta0": theta0, "theta1": theta1, "theta": theta, "b0": b0.label,
                  "b1": b1.label, "b": b.label, "E": E2.label, "X": L1.label}
        s0 = BesovSpec(theta0, b0, L1, E2)
        s1 = BesovSpec(theta1, b1, L1, E2)
        for name, f in ctx.fields.items():
            A, B = [], []
            for _, h in _reiteration_parts(ctx, f):
                A.append(norm_from_curve(besov_curve(sp, f - h, L1), s0))
                B.append(norm_from_curve(besov_curve(sp, h, L1), s1))
            K = np.min(np.array(A)[:, None] + np.array(B)[:, None] * t[None, :], axis=0)
            lhs = tilde_norm(E2, (t, t**-theta * b(t) * K))
            rhs = ctx.besov(name, tt, bt, L1, E2, True)
            out.append(ctx.rec("reiteration.K_le_besov", name, params, lhs, rhs))
            out.append(ctx.rec("reiteration.besov_le_K", name, params, rhs, lhs))
    return out


# ------------------------------------------------------- Sobolev embeddings

def _R(t: np.ndarray, k: float, n: float) -> np.ndarray:
    return np.maximum(t ** (1 / n), t ** (1 / k))


def check_the1(ctx: Context) -> list[Record]:
    """O(f, t) phi_X(t) <= C K(f, R(t)) with R(t) = max(t^{1/n}, t^{1/k})."""
    out = []
    sp, g = ctx.space, ctx.geometry
    w = sp.weights
    ts = np.geomspace(w.min() / 10, 10 * sp.total_mass, 24)
    for X in (L1, L2):
        phi = fundamental_function(X, ts)
        for name in ctx.fields:
            f0 = ctx.centered(name)
            O = oscillation(profile_from_values(f0, w), ts)
            K, _ = k_direct(ctx.decs(name, X), _R(ts, g.k, g.n))
            for ti, o, ph, kk in zip(ts, O, phi, K):
                out.append(ctx.rec("the1", name, {"X": X.label, "t": float(ti)}, o * ph, kk))
    return out


def _local_power(b: SVFn) -> float | None:
    """Exponent a with b(t) ~ |ln t|^a as t -> 0, or None outside the log family."""
    return None if b.eps else b.alpha


def inclusi_cases(X: RiSpec, theta: float, k: float, n: float, tol: float = DISPATCH_TOL) -> list[str]:
    lo, hi = x_indices(X)
    cases = []
    if lo > theta / k + tol:
        cases.append("i")
    if theta / n + tol < lo <= theta / k + tol:
        cases.append("ii")
    if abs(lo - theta / n) <= tol:
        cases.append("iii")
    if hi < theta / n - tol:
        cases.append("iv")
    return cases


def iii_conditions(X: RiSpec, theta: float, n: float, b: SVFn, E: ParamSpec,
                   tol: float = DISPATCH_TOL) -> dict[str, bool | None]:
    """Hypotheses of sub-cases (a), (b), (c) near t = 0 for log-type b.

    Inside the dispatch band the power t^{theta/n - beta} is taken as 1, so
    t^{theta/n}/(b(t^{1/n}) phi_X(t)) behaves like |ln t|^{-a}.
    """
    a = _local_power(b)
    if a is None:
        return {"a": None, "b": None, "c": None}
    lo, _ = x_indices(X)
    e = theta / n - lo
    e = 0.0 if abs(e) <= tol else e
    qp = 1.0 / (1.0 - 1.0 / E.q) if E.q > 1 else math.inf
    if e > 0:
        cond_a, cond_c = True, True
    elif e < 0:
        cond_a, cond_c = False, False
    else:
        cond_a = (a >= 0) if math.isinf(qp) else (a * qp > 1)
        cond_c = a >= 0
    boyd_inside = 1 < E.q < math.inf and E.family == "lebesgue"
    cond_b = boyd_inside and e == 0 and a <= 0
    return {"a": cond_a, "b": cond_b, "c": cond_c}


def check_inclusi(ctx: Context) -> list[Record]:
    """Rearrangement bounds by Besov norms, dispatched on the fitted indices."""
    out = []
    sp, g = ctx.space, ctx.geometry
    k, n = g.k, g.n
    t = grid_nodes(DEFAULT_T_MIN, DEFAULT_T_MAX, 64)
    w = sp.weights
    ell = 1.0 + np.abs(np.log(t))
    for X in (L1, L2, L4):
        lo = x_indices(X)[0]
        thetas = sorted({0.3, 0.9} | ({round(lo * n, 6)} if 0 < lo * n < 1 else set()))
        phi = fundamental_function(X, t)
        for theta in thetas:
            cases = inclusi_cases(X, theta, k, n)
            for b in (ONE, LOG10, LOGM):
                E = E2
                wt0 = np.asarray(b(t ** (1 / n))) * phi * t ** (-theta / n)
                wt1 = np.asarray(b(t ** (1 / k))) * phi * t ** (-theta / k)
                cond = iii_conditions(X, theta, n, b, E) if "iii" in cases else {}
                params = {"X": X.label, "theta": theta, "b": b.label, "E": E.label, "k": k, "n": n,
                          "cases": cases}
                for name, f in ctx.fields.items():
                    f0 = ctx.centered(name)
                    prof0 = profile_from_values(f0, w)
                    prof = profile_from_values(f, w)
                    O0, M0 = oscillation(prof0, t), maximal(prof0, t)
                    hom = ctx.besov(name, theta, b, X, E, True)
                    side = l1_plus_linf(prof)
                    lhs = (tilde_norm(E, (t, wt0 * O0), (0.0, 1.0))
                           + tilde_norm(E, (t, wt1 * O0), (1.0, math.inf)))
                    out.append(ctx.rec("inclusi.main", name, params, lhs, hom))
                    if "i" in cases:
                        lhs = (tilde_norm(E, (t, wt0 * M0), (0.0, 1.0))
                               + tilde_norm(E, (t, wt1 * M0), (1.0, math.inf)))
                        out.append(ctx.rec("inclusi.i", name, params, lhs, hom))
                    if "ii" in cases:
                        M, O = maximal(prof, t), oscillation(prof, t)
                        lhs = (tilde_norm(E, (t, wt0 * M), (0.0, 1.0))
                               + tilde_norm(E, (t, wt1 * O), (1.0, math.inf)))
                        out.append(ctx.rec("inclusi.ii", name, params, lhs, hom + side))
                    if cond.get("a"):
                        out.append(ctx.rec("inclusi.iii_a", name, params, prof.sup, hom + side))
                    if cond.get("b"):
                        M = maximal(prof, t)
                        lhs = tilde_norm(E, (t, wt0 * M / ell), (0.0, 1.0))
                        out.append(ctx.rec("inclusi.iii_b", name, params, lhs, hom + side))
                    if cond.get("c") and sp.point_count <= BMO_MAX_POINTS:
                        rhs = ctx.besov(name, theta, b, X, EINF, True) + side
                        out.append(ctx.rec("inclusi.iii_c", name, params, bmo_norm(sp, f), rhs))
                    if "iv" in cases:
                        out.append(ctx.rec("inclusi.iv", name, params, prof.sup, hom + side))
    return out


def _pairs(N: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if N * (N - 1) // 2 <= PAIR_LIMIT:
        return np.triu_indices(N, 1)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, N, PAIR_LIMIT)
    j = rng.integers(0, N, PAIR_LIMIT)
    keep = i != j
    return i[keep], j[keep]


def _worst_pair(lhs: np.ndarray, rhs: np.ndarray, tol: float) -> tuple[float, float]:
    bad = (lhs > tol) & (rhs <= tol)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        return float(lhs[i]), float(rhs[i])
    live = (lhs > tol) & (rhs > tol)
    if not live.any():
        return 0.0, 0.0
    i = int(np.flatnonzero(live)[np.argmax(lhs[live] / rhs[live])])
    return float(lhs[i]), float(rhs[i])


def check_contt(ctx: Context) -> list[Record]:
    """Pairwise continuity bound and the Morrey-type Hoelder bound."""
    out = []
    sp, g = ctx.space, ctx.geometry
    k, n = g.k, g.n
    I, J = _pairs(sp.point_count, ctx.battery.seed)
    d = sp.dist[I, J]
    for X in (L4, L8):
        lo, hi = x_indices(X)
        for name, f in ctx.fields.items():
            tol = 1e-12 * ctx.scale(name)
            diff = np.abs(f[I] - f[J])
            c = ctx.curve(name, X)
            s = c.t
            integrand = c.values / fundamental_function(X, np.minimum(s**k, s**n))
            ls = np.log(s)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(ls))])
            rhs = np.interp(np.log(8 * d), ls, cum)
            lhs_w, rhs_w = _worst_pair(diff, rhs, tol)
            out.append(ctx.rec("contt", name, {"X": X.label, "pairs": int(d.size)}, lhs_w, rhs_w))
            for theta in (0.9,):
                if not lo < theta / n:
                    continue
                gamma = min(1.0, max(hi, 0.0))
                for b in (ONE, LOG10):
                    B = ctx.besov(name, theta, b, X, E2, homogeneous=False)
                    rhs = B * d ** (theta - gamma * n) / np.asarray(b(d))
                    lhs_w, rhs_w = _worst_pair(diff, rhs, tol)
                    params = {"X": X.label, "theta": theta, "gamma": gamma, "b": b.label,
                              "E": E2.label, "pairs": int(d.size)}
                    out.append(ctx.rec("morrey", name, params, lhs_w, rhs_w))
    return out


HEAVY, SMALL = "heavy", "small"

CHECKS: dict[str, tuple[Callable[[Context], list[Record]], tuple[str, ...]]] = {
    "emm": (check_emm, (HEAVY,)),
    "param_convex": (check_param_convex, (HEAVY,)),
    "anterior": (check_anterior, (HEAVY,)),
    "suerte": (check_suerte, (HEAVY,)),
    "qc": (check_qc, (HEAVY,)),
    "sandwich": (check_sandwich, (SMALL,)),
    "interp": (check_interp, (SMALL,)),
    "reiteration": (check_reiteration, (SMALL,)),
    "the1": (check_the1, (SMALL,)),
    "inclusi": (check_inclusi, (HEAVY, SMALL)),
    "contt": (check_contt, (HEAVY,)),
}


def run_checks(battery: Battery, names: list[str] | None = None) -> list[Record]:
    ctx = Context(battery)
    out: list[Record] = []
    for name, (fn, roles) in CHECKS.items():
        if names is not None and name not in names:
            continue
        if battery.role in roles:
            out.extend(fn(ctx))
    return out
