"""Ball averages, moduli of smoothness and the local bmo norm.

Ball averages are exact weighted sums over open balls B(x, r) = {d(x, .) < r}.
For a batch of radii every row of the distance-sorted neighbour table is
accumulated once and the prefix sums are gathered at the ball sizes, so the
cost is O(N^2) per field regardless of the number of radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mmspace import IndexReport, MMSpace, doubling_at
from .rearrange import profile_from_values
from .rispace import RiSpec, convexify, fundamental_function, ri_norm

ROW_CHUNK = 256
MAX_CENTERS = 8192
VARIANTS = ("E", "calE")


def _ball_power_means(space: MMSpace, f: np.ndarray, radii: np.ndarray, p: float,
                      centered: bool, rows: np.ndarray | None = None) -> np.ndarray:
    """M[x, j] = mean over B(x, r_j) of |f(y) - f(x)|^p (centered) or |f(y)|^p."""
    rows = np.arange(space.point_count) if rows is None else rows
    counts = space.ball_counts(radii)[rows]
    out = np.empty((rows.size, radii.size))
    w = space.weights
    for start in range(0, rows.size, ROW_CHUNK):
        r = rows[start:start + ROW_CHUNK]
        idx = space.order[r]
        vals = f[idx] - f[r][:, None] if centered else f[idx]
        terms = np.abs(vals) ** p * w[idx]
        cs = np.cumsum(terms, axis=1)
        c = counts[start:start + ROW_CHUNK] - 1
        out[start:start + ROW_CHUNK] = (np.take_along_axis(cs, c, axis=1)
                                        / np.take_along_axis(space.cum_mass[r], c, axis=1))
    return out


def _as_field(space: MMSpace, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (space.point_count,):
        raise ValueError(f"field has shape {f.shape}, expected ({space.point_count},)")
    if not np.all(np.isfinite(f)):
        raise ValueError("field values must be finite")
    return f


def avg_operator(space: MMSpace, f, r: float, p: float = 1.0) -> np.ndarray:
    """T_r^p f(x) = (mean over B(x, r) of |f|^p)^{1/p}."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if p < 1 or math.isinf(p):
        raise ValueError("p must lie in [1, inf)")
    f = _as_field(space, f)
    return _ball_power_means(space, f, np.array([float(r)]), p, centered=False)[:, 0] ** (1.0 / p)


def deviation_fields(space: MMSpace, f, radii, p: float = 1.0) -> np.ndarray:
    """Columns x -> (mean over B(x, r) of |f(x) - f(y)|^p)^{1/p}, one per radius."""
    f = _as_field(space, f)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    return _ball_power_means(space, f, radii, p, centered=True) ** (1.0 / p)


def default_t_grid(space: MMSpace, ppd: int = 32) -> np.ndarray:
    """Geometric grid from the minimum distance to just past the diameter."""
    lo, hi = space.min_distance, space.diameter
    if lo <= 0:
        return np.array([1.0])
    steps = int(math.ceil(math.log10(hi * (1 + 1e-9) / lo) * ppd)) + 1
    t = lo * 10.0 ** (np.arange(steps + 1) / ppd)
    return t


@dataclass(frozen=True, eq=False)
class ModulusCurve:
    """Values of a modulus of smoothness on a grid of radii."""

    t: np.ndarray
    values: np.ndarray
    X: str
    variant: str
    p: float
    space: str = ""
    field_id: str = ""
    diameter: float = math.inf
    sampled: bool = False
    meta: dict = field(default_factory=dict)

    def at(self, t):
        """Step evaluation: value at the largest grid radius <= t; frozen past the diameter."""
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, self.t.size - 1)
        return self.values[idx]

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "values": self.values.tolist(), "X": self.X,
                "variant": self.variant, "p": self.p, "space": self.space,
                "field": self.field_id, "sampled": self.sampled}


def _norm_columns(spec: RiSpec, fields: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.array([ri_norm(spec, profile_from_values(fields[:, j], weights))
                     for j in range(fields.shape[1])])


def modulus(space: MMSpace, f, X: RiSpec, t_grid=None, variant: str = "E", p: float = 1.0,
            max_centers: int = MAX_CENTERS, seed: int = 0, field_id: str = "") -> ModulusCurve:
    """E_X(f, t) (variant E) or the p-mean variant measured in X^{(p)} (variant calE).

    E:    || x -> mean_{B(x,t)} |f(x) - f(y)| ||_X
    calE: || x -> (mean_{B(x,t)} |f(x) - f(y)|^p)^{1/p} ||_{X^{(p)}}
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if variant == "E":
        p = 1.0
    if p < 1 or math.isinf(p):
        raise ValueError("p must lie in [1, inf)")
    f = _as_field(space, f)
    t = default_t_grid(space) if t_grid is None else np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t <= 0):
        raise ValueError("radii must be positive")
    rows, weights, sampled = None, space.weights, False
    if space.point_count > max_centers:
        # subsample centres; the rearrangement uses their rescaled weights
        rng = np.random.default_rng(seed)
        rows = np.sort(rng.choice(space.point_count, max_centers, replace=False))
        weights = space.weights[rows] * (space.total_mass / space.weights[rows].sum())
        sampled = True
    fields = _ball_power_means(space, f, t, p, centered=True, rows=rows) ** (1.0 / p)
    outer = X if variant == "E" else convexify(X, p)
    vals = _norm_columns(outer, fields, weights)
    return ModulusCurve(t=t, values=vals, X=X.label, variant=variant, p=p, space=space.name,
                        field_id=field_id, diameter=space.diameter, sampled=sampled)


def suerte_bounds(space: MMSpace, f, X: RiSpec, p: float, q: float, r: float,
                  geometry: IndexReport | None, ppd: int = 32) -> dict:
    """Both sides of the X^{(p)} -> X^{(q)} ball-average bounds and their ratios.

    (i)  || mean_{B(x,r)} |f| ||_{X^{(q)}}  vs  ||f||_{X^{(p)}} / phi_X(min(r^k, r^n))^{1/p-1/q}
    (ii) E_{X^{(q)}}(f, r)  vs  int_0^{4r} calE_{X^{(p)}}(f, s) / phi_X(min(s^k, s^n))^{1/p-1/q} ds/s
    """
    if geometry is None:
        raise ValueError("missing IndexReport: run estimate_geometry first")
    if not (q >= p >= 1):
        raise ValueError("need q >= p >= 1")
    f = _as_field(space, f)
    k, n = geometry.k, geometry.n
    expo = 1.0 / p - (0.0 if math.isinf(q) else 1.0 / q)
    Xp, Xq = convexify(X, p), convexify(X, q)

    def phi_pow(s):
        return fundamental_function(X, np.minimum(s**k, s**n)) ** expo

    lhs1 = ri_norm(Xq, profile_from_values(avg_operator(space, f, r), space.weights))
    rhs1 = ri_norm(Xp, profile_from_values(f, space.weights)) / float(phi_pow(np.array(r)))

    lhs2 = float(modulus(space, f, Xq, [r], "E").values[0])
    lo = space.min_distance
    if 4 * r > lo:
        s = np.geomspace(lo, 4 * r, max(2, int(math.ceil(math.log10(4 * r / lo) * ppd)) + 1))
        cal = modulus(space, f, X, s, "calE", p).values
        g = cal / phi_pow(s)
        rhs2 = float(np.trapezoid(g, np.log(s)))
    else:
        rhs2 = 0.0
    out = {
        "X": X.label, "p": p, "q": q, "r": r,
        "i": {"lhs": lhs1, "rhs": rhs1, "ratio": _ratio(lhs1, rhs1)},
        "ii": {"lhs": lhs2, "rhs": rhs2, "ratio": _ratio(lhs2, rhs2)},
    }
    if q == p:
        out["doubling_at_r"] = doubling_at(space, r)
    return out


def _ratio(lhs: float, rhs: float) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def bmo_norm(space: MMSpace, f, mass_cut: float = 1.0) -> float:
    """Local bmo norm over every ball of the space.

    sup of the mean oscillation over balls with mu(B) <= mass_cut, plus the sup
    of |mean of f| over balls with mu(B) > mass_cut.  Balls are the distinct
    prefixes of each centre's distance-sorted row (ends at distance ties).
    Cost is O(N^3); intended for spaces of at most a few hundred points.
    """
    f = _as_field(space, f)
    w = space.weights
    osc_sup, mean_sup = 0.0, 0.0
    N = space.point_count
    tri = np.tri(N, dtype=bool)  # tri[k, j]: j <= k
    for x in range(N):
        idx = space.order[x]
        sd = space.sorted_dist[x]
        v, wx = f[idx], w[idx]
        mass = space.cum_mass[x]
        mean = np.cumsum(v * wx) / mass
        ends = np.flatnonzero(np.append(sd[1:] > sd[:-1], True))
        m = mean[ends]
        dev = np.abs(v[None, :] - m[:, None]) * wx[None, :]
        osc = np.sum(np.where(tri[ends], dev, 0.0), axis=1) / mass[ends]
        small = mass[ends] <= mass_cut * (1 + 1e-12)
        if small.any():
            osc_sup = max(osc_sup, float(osc[small].max()))
        if (~small).any():
            mean_sup = max(mean_sup, float(np.abs(m[~small]).max()))
    return osc_sup + mean_sup


def shift_modulus(values, max_shift: int, p: float = 1.0, cell: float = 1.0) -> float:
    """sup over |h| <= max_shift grid steps of ||f(. + h) - f||_{L^p} on a periodic grid.

    ``cell`` is the measure of one grid cell.
    """
    v = np.asarray(values, dtype=float)
    best = 0.0
    for h in range(1, max_shift + 1):
        d = np.abs(np.roll(v, -h) - v)
        val = float(np.max(d)) if math.isinf(p) else float((np.sum(d**p) * cell) ** (1.0 / p))
        best = max(best, val)
    return best
