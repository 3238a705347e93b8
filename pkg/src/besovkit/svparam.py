"""Slowly varying functions, index estimators and parameter-space norms on (0, inf).

Functions of t are carried on geometric grids (``LogGridFn``).  Norms with
respect to dt/t are trapezoid sums in ln t; the dt flavour multiplies the
weights by t.  Index estimators fit slopes of log dilation functions over the
outermost decade of the available range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _weights
from .rearrange import profile_from_values
from .rispace import INF, RiSpec, conjugate, ri_norm

DEFAULT_T_MIN = 1e-8
DEFAULT_T_MAX = 1e8
DEFAULT_PPD = 64
MIN_DECADES = 4.0
FLAVORS = ("dt", "dt_over_t")


@dataclass(frozen=True)
class SVFn:
    """b(t) = scale * l^(alpha,beta)(t) * exp(eps * |ln t|^a)."""

    alpha: float = 0.0
    beta: float = 0.0
    eps: float = 0.0
    a: float = 0.5
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.eps != 0 and not (0 < self.a < 1):
            raise ValueError("exp-log exponent must lie in (0, 1)")

    def log(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("t must be positive")
        u = np.log(t)
        out = _weights.log_weight(u, 0.0, self.alpha, self.beta) + math.log(self.scale)
        if self.eps:
            out = out + self.eps * np.abs(u) ** self.a
        return out

    def __call__(self, t):
        return np.exp(self.log(t))

    def __pow__(self, r: float) -> "SVFn":
        return SVFn(self.alpha * r, self.beta * r, self.eps * r, self.a, self.scale**r)

    def __mul__(self, other: "SVFn") -> "SVFn":
        if not isinstance(other, SVFn):
            return NotImplemented
        if self.eps and other.eps and self.a != other.a:
            raise ValueError("product of exp-log terms with different exponents leaves the family")
        a = self.a if self.eps else other.a
        return SVFn(self.alpha + other.alpha, self.beta + other.beta, self.eps + other.eps, a,
                    self.scale * other.scale)

    def reciprocal(self) -> "SVFn":
        return self ** -1.0

    @property
    def label(self) -> str:
        if self.eps:
            return f"explog:{self.eps:g},{self.a:g}"
        if self.alpha == 0 and self.beta == 0:
            return f"const:{self.scale:g}"
        return f"log:{self.alpha:g},{self.beta:g}"


def sv_eval(b: SVFn, t):
    return b(t)


def parse_sv(text: str) -> SVFn:
    """Parse ``log:1.0,0.0``, ``explog:0.5,0.5`` or ``const:1`` (prefix ``b=`` allowed)."""
    s = text.strip()
    if s.startswith("b="):
        s = s[2:]
    kind, _, args = s.partition(":")
    try:
        vals = [float(x) for x in args.split(",")] if args else []
    except ValueError:
        raise ValueError(f"bad numeric argument in {text!r}") from None
    kind = kind.strip().lower()
    if kind == "log" and len(vals) == 2:
        return SVFn(vals[0], vals[1])
    if kind == "explog" and len(vals) == 2:
        return SVFn(eps=vals[0], a=vals[1])
    if kind == "const" and len(vals) == 1:
        return SVFn(scale=vals[0])
    raise ValueError(f"cannot parse slowly varying function {text!r}")


@dataclass(frozen=True)
class ParamSpec:
    family: str = "lebesgue"
    q: float = 2.0
    alpha: float = 0.0
    beta: float = 0.0
    flavor: str = "dt_over_t"

    def __post_init__(self):
        if self.family not in ("lebesgue", "lorentz_zygmund"):
            raise ValueError(f"unknown parameter family {self.family!r}")
        if not (1 <= self.q <= INF):
            raise ValueError("q must lie in [1, inf]")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        object.__setattr__(self, "q", float(self.q))

    @classmethod
    def lebesgue(cls, q: float, flavor: str = "dt_over_t") -> "ParamSpec":
        return cls("lebesgue", q, flavor=flavor)

    @classmethod
    def lorentz_zygmund(cls, q: float, alpha: float, beta: float, flavor: str = "dt_over_t") -> "ParamSpec":
        return cls("lorentz_zygmund", q, alpha, beta, flavor)

    def with_flavor(self, flavor: str) -> "ParamSpec":
        return ParamSpec(self.family, self.q, self.alpha, self.beta, flavor)

    @property
    def label(self) -> str:
        q = "inf" if math.isinf(self.q) else f"{self.q:g}"
        if self.family == "lebesgue":
            return f"Lq:{q}"
        return f"LZq:{q},{self.alpha:g},{self.beta:g}"

    def convexify(self, r: float) -> "ParamSpec":
        if r < 1:
            raise ValueError("convexification exponent must be >= 1")
        return ParamSpec(self.family, self.q * r, self.alpha / r, self.beta / r, self.flavor)

    def associate(self) -> "ParamSpec":
        if self.family != "lebesgue":
            raise ValueError(f"no closed-form associate for {self.label}")
        return ParamSpec.lebesgue(conjugate(self.q), self.flavor)

    def as_ri(self) -> RiSpec | None:
        if self.family == "lebesgue":
            return None
        return RiSpec.lorentz_zygmund(self.q, self.q, self.alpha, self.beta)


def parse_param(text: str, flavor: str = "dt_over_t") -> ParamSpec:
    """Parse ``Lq:2``, ``Lq:inf`` or ``LZq:2,1,1`` (prefix ``E=`` allowed)."""
    s = text.strip()
    if s.startswith("E="):
        s = s[2:]
    kind, _, args = s.partition(":")
    try:
        vals = [float(x) for x in args.split(",")] if args else []
    except ValueError:
        raise ValueError(f"bad numeric argument in {text!r}") from None
    kind = kind.strip().lower()
    if kind == "lq" and len(vals) == 1:
        return ParamSpec.lebesgue(vals[0], flavor)
    if kind == "lzq" and len(vals) == 3:
        return ParamSpec.lorentz_zygmund(*vals, flavor=flavor)
    raise ValueError(f"cannot parse parameter space {text!r}")


@dataclass(frozen=True, eq=False)
class LogGridFn:
    """Samples of a function at geometric nodes t_min * 10^(i/ppd)."""

    t_min: float
    t_max: float
    points_per_decade: int
    values: np.ndarray

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max):
            raise ValueError("need 0 < t_min < t_max")
        if self.points_per_decade < 16:
            raise ValueError("points_per_decade must be >= 16")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (grid_size(self.t_min, self.t_max, self.points_per_decade),):
            raise ValueError("values do not match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return grid_nodes(self.t_min, self.t_max, self.points_per_decade)

    @property
    def h(self) -> float:
        """Node spacing in ln t."""
        return math.log(self.t_max / self.t_min) / (self.values.size - 1)

    @classmethod
    def from_function(cls, fn: Callable, t_min: float = DEFAULT_T_MIN, t_max: float = DEFAULT_T_MAX,
                      ppd: int = DEFAULT_PPD) -> "LogGridFn":
        t = grid_nodes(t_min, t_max, ppd)
        return cls(t_min, t_max, ppd, np.asarray(fn(t), dtype=float))

    def map(self, fn: Callable) -> "LogGridFn":
        return LogGridFn(self.t_min, self.t_max, self.points_per_decade, fn(self.nodes, self.values))


def grid_size(t_min: float, t_max: float, ppd: int) -> int:
    return int(round(math.log10(t_max / t_min) * ppd)) + 1


def grid_nodes(t_min: float = DEFAULT_T_MIN, t_max: float = DEFAULT_T_MAX, ppd: int = DEFAULT_PPD) -> np.ndarray:
    return np.geomspace(t_min, t_max, grid_size(t_min, t_max, ppd))


def _restrict(t: np.ndarray, g: np.ndarray, lo: float, hi: float):
    """Nodes and values on [lo, hi], endpoints added by interpolation in ln t."""
    lt = np.log(t)
    inside = (t > lo) & (t < hi)
    ends = np.interp(np.log([lo, hi]), lt, g)
    return np.concatenate([[lo], t[inside], [hi]]), np.concatenate([[ends[0]], g[inside], [ends[1]]])


def _trapezoid_weights(lt: np.ndarray) -> np.ndarray:
    w = np.zeros_like(lt)
    if lt.size > 1:
        d = np.diff(lt)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
    return w


def _tail(lg0: float, lg1: float, du: float) -> float:
    """Integral of exp(lg) beyond a node when ln(integrand) continues linearly.

    Slope c = (lg1 - lg0)/du toward the tail must be negative for convergence;
    returns exp(lg0)/|c| or 0 when the tail does not decay.
    """
    if not (math.isfinite(lg0) and math.isfinite(lg1)):
        return 0.0
    c = (lg0 - lg1) / du
    if c >= -1e-12:
        return 0.0
    return math.exp(lg0) / (-c)


def tilde_norm(E: ParamSpec, g, interval: tuple[float, float] | None = None, tails: str = "both") -> float:
    """||g||_{E(u, v)} for a function sampled on a log grid.

    ``g`` is a LogGridFn or a pair (nodes, values).  ``interval`` defaults to
    (0, inf); an endpoint 0 or inf is replaced by the grid end and, if
    ``tails`` allows it, a power-law tail correction fitted to the last cell.
    """
    if isinstance(g, LogGridFn):
        t, vals = g.nodes, np.abs(g.values)
    else:
        t, vals = np.asarray(g[0], dtype=float), np.abs(np.asarray(g[1], dtype=float))
    u, v = interval if interval is not None else (0.0, INF)
    rel = 1e-9
    if not (u < v):
        raise ValueError("empty interval")
    if (u > 0 and u < t[0] * (1 - rel)) or (math.isfinite(v) and v > t[-1] * (1 + rel)):
        raise ValueError(f"interval ({u:g}, {v:g}) outside grid [{t[0]:g}, {t[-1]:g}]")
    lo = t[0] if u == 0 else max(u, t[0])
    hi = t[-1] if math.isinf(v) else min(v, t[-1])
    tt, gg = _restrict(t, vals, lo, hi)
    if math.isinf(E.q):
        return float(np.max(gg)) if gg.size else 0.0
    lt = np.log(tt)
    w = _trapezoid_weights(lt)
    if E.flavor == "dt":
        w = w * tt
    if E.family == "lorentz_zygmund":
        return ri_norm(E.as_ri(), profile_from_values(gg, w))
    integrand = gg**E.q * (tt if E.flavor == "dt" else 1.0)
    total = float(np.sum(integrand * _trapezoid_weights(lt)))
    if tt.size >= 2:
        with np.errstate(divide="ignore"):
            lgi = np.log(integrand)
        if u == 0 and tails in ("both", "lower"):
            total += _tail(lgi[0], lgi[1], lt[1] - lt[0])
        if math.isinf(v) and tails in ("both", "upper"):
            total += _tail(lgi[-1], lgi[-2], lt[-1] - lt[-2])
    return total ** (1.0 / E.q)


def tilde_norm_substitution(E: ParamSpec, fn: Callable, u_max: float = math.log(1 / DEFAULT_T_MIN),
                            n: int = 20001) -> float:
    """||fn||_{E~(0,1)} computed as ||fn(e^{-u})||_{E(0, inf)} with du.

    The dt/t measure on (0,1) is the image of du on (0, inf) under t = e^{-u};
    this route is an independent check of ``tilde_norm`` on (0, 1).
    """
    uu = np.linspace(0.0, u_max, n)
    vals = np.abs(np.asarray(fn(np.exp(-uu)), dtype=float))
    w = np.full(n, uu[1] - uu[0])
    w[0] = w[-1] = 0.5 * (uu[1] - uu[0])
    if math.isinf(E.q):
        return float(np.max(vals))
    if E.family == "lorentz_zygmund":
        return ri_norm(E.as_ri(), profile_from_values(vals, w))
    return float(np.sum(w * vals**E.q) ** (1.0 / E.q))


def hardy_power_norm(alpha: float, q: float, t0: float) -> float:
    """Closed form ||s^alpha||_{L~q(0, t0)} = t0^alpha (alpha q)^{-1/q}."""
    if math.isinf(q):
        return t0**alpha
    return t0**alpha * (alpha * q) ** (-1.0 / q)


def sv_constant(b: SVFn, eps: float, t_min: float = DEFAULT_T_MIN, t_max: float = DEFAULT_T_MAX,
                ppd: int = 16) -> float:
    """Smallest c with b(st) <= c max(t^eps, t^-eps) b(s) and the reverse bound on the grid.

    This is the almost-monotonicity constant of t^{+-eps} b(t).
    """
    lb = b.log(grid_nodes(t_min, t_max, ppd))
    h = math.log(10) / ppd
    n = lb.size
    worst = 0.0
    for j in range(1, n):
        d = lb[j:] - lb[:-j]
        worst = max(worst, float(np.max(np.abs(d))) - eps * j * h)
    return math.exp(worst)


def _dilation_logs(lp: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """log M(shift) = max_i lp[i+shift] - lp[i] over valid i."""
    n = lp.size
    out = np.empty(shifts.size)
    for k, j in enumerate(shifts):
        if j >= 0:
            out[k] = np.max(lp[j:] - lp[: n - j])
        else:
            out[k] = np.max(lp[: n + j] - lp[-j:])
    return out


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def extension_indices(phi, u_range: float = 300.0, per_unit: int = 16) -> tuple[float, float]:
    """(lower, upper) extension indices of a positive function.

    ``phi`` is a LogGridFn (used on its own nodes) or a vectorized callable
    sampled on t = e^u, |u| <= u_range.  The dilation function
    M(t) = sup_s phi(st)/phi(s) is taken over pairs that stay inside the
    range and its log is regressed on ln t over the outermost decade of
    admissible dilations on either side.
    """
    if isinstance(phi, LogGridFn):
        decades = math.log10(phi.t_max / phi.t_min)
        if decades < MIN_DECADES:
            raise ValueError(f"insufficient range: {decades:.2f} decades < {MIN_DECADES:g}")
        with np.errstate(divide="ignore"):
            lp = np.log(phi.values)
        h = phi.h
    else:
        if 2 * u_range / math.log(10) < MIN_DECADES:
            raise ValueError("insufficient range")
        n = int(2 * u_range * per_unit) + 1
        uu = np.linspace(-u_range, u_range, n)
        with np.errstate(divide="ignore", over="ignore"):
            lp = np.log(np.asarray(phi(np.exp(uu)), dtype=float))
        h = uu[1] - uu[0]
    if not np.all(np.isfinite(lp)):
        raise ValueError("phi must be positive and finite on the grid")
    return _end_slopes(lp, h)


def _end_slopes(lp: np.ndarray, h: float) -> tuple[float, float]:
    n = lp.size
    # keep at least a third of the range free for the base point s
    jmax = (n - 1) // 3
    d = max(2, int(round(math.log(10) / h)))
    d = min(d, jmax)
    up = np.arange(jmax - d, jmax + 1)
    lo = -up
    low = _slope(lo * h, _dilation_logs(lp, lo))
    high = _slope(up * h, _dilation_logs(lp, up))
    return low, high


def _battery_log_norms(E: ParamSpec, u: np.ndarray) -> list[np.ndarray]:
    """log ||s^{-gamma} chi_(0, e^u)||_E (measure ds) for a few gamma."""
    if E.flavor != "dt":
        raise ValueError("Boyd indices are defined for the dt flavour")
    if math.isinf(E.q):
        if E.family == "lebesgue":
            return [np.zeros_like(u)]
        lw = _weights.log_weight(u, 0.0, E.alpha, E.beta)
        return [np.maximum.accumulate(lw)]
    out = []
    c_lo, c_hi = (E.alpha * E.q, E.beta * E.q) if E.family == "lorentz_zygmund" else (0.0, 0.0)
    for gamma in np.array([0.0, 0.25, 0.5, 0.75]) / E.q:
        a = 1.0 - gamma * E.q
        if E.family == "lebesgue":
            out.append((a * u - math.log(a)) / E.q)
        else:
            out.append(_weights.log_cumulative(a, c_lo, c_hi, u) / E.q)
    return out


def boyd_indices(E: ParamSpec, u_range: float = 300.0, per_unit: int = 4) -> tuple[float, float]:
    """Boyd indices from the dilation norm h_E(s) estimated on a test battery.

    D_s f(t) = f(t/s) maps s^{-gamma} chi_(0,a) to s^gamma (t)^{-gamma} chi_(0, a s),
    so h_E(s) >= sup over the battery of s^gamma N_gamma(a s) / N_gamma(a).
    """
    E = E.with_flavor("dt")
    n = int(2 * u_range * per_unit) + 1
    uu = np.linspace(-u_range, u_range, n)
    h = uu[1] - uu[0]
    jmax = (n - 1) // 3
    d = min(jmax, max(2, int(round(math.log(10) / h))))
    gammas = np.array([0.0, 0.25, 0.5, 0.75]) / E.q if math.isfinite(E.q) else np.array([0.0])
    norms = _battery_log_norms(E, uu)
    res = []
    for shifts in (-np.arange(jmax - d, jmax + 1), np.arange(jmax - d, jmax + 1)):
        logh = np.full(shifts.size, -INF)
        for gamma, ln in zip(gammas, norms):
            logh = np.maximum(logh, gamma * shifts * h + _dilation_logs(ln, shifts))
        res.append(_slope(shifts * h, logh))
    return res[0], res[1]


# Hardy battery: (name, f, F = antiderivative from 0, support end)
_HARDY_BATTERY = (
    ("chi_(0,1)", lambda s: (s <= 1).astype(float), lambda s: np.minimum(s, 1.0), 1.0),
    ("chi_(0.01,100)", lambda s: ((s >= 0.01) & (s <= 100)).astype(float),
     lambda s: np.clip(s - 0.01, 0.0, 100 - 0.01), 100.0),
    ("s^-0.5 chi_(0,1)", lambda s: np.where(s <= 1, s**-0.5, 0.0), lambda s: 2 * np.minimum(s, 1.0) ** 0.5, 1.0),
    ("s chi_(0,1)", lambda s: np.where(s <= 1, s, 0.0), lambda s: 0.5 * np.minimum(s, 1.0) ** 2, 1.0),
    ("exp(-s)", lambda s: np.exp(-s), lambda s: -np.expm1(-s), INF),
    ("(1+s)^-2", lambda s: (1 + s) ** -2.0, lambda s: s / (1 + s), INF),
)


def pamam_check(E: ParamSpec, b: SVFn, alpha: float, t_grid=None, t_min: float = DEFAULT_T_MIN,
                t_max: float = DEFAULT_T_MAX, ppd: int = DEFAULT_PPD) -> dict:
    """Power-times-SV norm ratios and the weighted Hardy inequality on a battery.

    Part (i): ratio of ||s^alpha b(s)||_{E~(0,t)} to t^alpha b(t), and of
    ||s^{-alpha} b(s)||_{E~(t,inf)} to t^{-alpha} b(t).
    Part (ii): C = ||s^{-alpha} b(s) int_0^s f|| / ||s^{1-alpha} b(s) f(s)||.
    Each f is truncated to [t_min, inf) so both sides see the same function.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    nodes = grid_nodes(t_min, t_max, ppd)
    if t_grid is None:
        t_grid = np.geomspace(1e-4, 1e4, 17)
    t_grid = np.asarray(t_grid, dtype=float)
    bv = b(nodes)
    up = (nodes, nodes**alpha * bv)
    down = (nodes, nodes**-alpha * bv)
    bt = b(t_grid)
    r_low = np.array([tilde_norm(E, up, (0.0, t)) for t in t_grid]) / (t_grid**alpha * bt)
    r_tail = np.array([tilde_norm(E, down, (t, INF)) for t in t_grid]) / (t_grid**-alpha * bt)
    consts = {}
    for name, f, F, end in _HARDY_BATTERY:
        Ft = np.maximum(F(nodes) - F(np.array(t_min)), 0.0)
        lhs = tilde_norm(E, (nodes, nodes**-alpha * bv * Ft), (0.0, INF), tails="upper")
        hi = min(end, t_max)
        rhs = tilde_norm(E, (nodes, nodes ** (1 - alpha) * bv * f(nodes)), (t_min, hi), tails="none")
        consts[name] = lhs / rhs if rhs > 0 else (INF if lhs > 0 else 0.0)
    return {
        "E": E.label,
        "b": b.label,
        "alpha": alpha,
        "ratio_low": [float(r_low.min()), float(r_low.max())],
        "ratio_tail": [float(r_tail.min()), float(r_tail.max())],
        "hardy_constants": consts,
        "hardy_max": float(max(consts.values())),
    }
