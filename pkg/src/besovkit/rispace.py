"""Rearrangement-invariant function spaces from a small parametric family.

Supported families: Lebesgue L^p, Lorentz L^{p,q} and Lorentz-Zygmund
L^{p,q}(log L)^A with the broken-log weight l^A(s) = (1+|ln s|)^alpha on
(0,1) and (1+|ln s|)^beta on [1, inf).  Every norm depends on f only
through its decreasing rearrangement (a StepProfile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _weights
from .rearrange import StepProfile, profile_from_values, rearrangement

INF = math.inf
FAMILIES = ("lebesgue", "lorentz", "lorentz_zygmund")


def conjugate(p: float) -> float:
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:g}"


@dataclass(frozen=True)
class RiSpec:
    family: str
    p: float
    q: float = INF
    alpha: float = 0.0
    beta: float = 0.0
    # set when the space stands for another one up to an equivalent norm
    equivalent: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        p, q = float(self.p), float(self.q)
        if self.family == "lebesgue":
            q = p
        if not (1 <= p <= INF) or not (1 <= q <= INF):
            raise ValueError("exponents must lie in [1, inf]")
        if self.family == "lorentz" and math.isinf(p) and not math.isinf(q):
            raise ValueError("Lorentz space with p = inf and q < inf is trivial (not normable)")
        if self.family == "lorentz_zygmund" and math.isinf(p):
            if math.isinf(q):
                if self.alpha > 0:
                    raise ValueError("L^inf(log L)^A needs alpha <= 0")
            elif self.alpha * q >= -1:
                raise ValueError("LZ with p = inf, q < inf needs alpha*q < -1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def lebesgue(cls, p: float) -> "RiSpec":
        return cls("lebesgue", p, p)

    @classmethod
    def lorentz(cls, p: float, q: float) -> "RiSpec":
        return cls("lorentz", p, q)

    @classmethod
    def lorentz_zygmund(cls, p: float, q: float, alpha: float = 0.0, beta: float = 0.0) -> "RiSpec":
        return cls("lorentz_zygmund", p, q, alpha, beta)

    @property
    def label(self) -> str:
        if self.family == "lebesgue":
            return f"Lp:{_fmt(self.p)}"
        if self.family == "lorentz":
            return f"Lorentz:{_fmt(self.p)},{_fmt(self.q)}"
        return f"LZ:{_fmt(self.p)},{_fmt(self.q)},{_fmt(self.alpha)},{_fmt(self.beta)}"

    def __str__(self) -> str:
        return self.label


def parse_ri(text: str) -> RiSpec:
    """Parse ``Lp:2``, ``L1``, ``Linf``, ``Lorentz:2,1`` or ``LZ:2,2,1.0,0.0``."""
    s = text.strip()
    if s.startswith("X="):
        s = s[2:]
    name, _, args = s.partition(":")
    try:
        vals = [float(a) for a in args.split(",")] if args else []
    except ValueError:
        raise ValueError(f"bad numeric argument in {text!r}") from None
    key = name.strip().lower()
    if not args and key.startswith("l") and key[1:] and key not in ("lorentz", "lz"):
        return RiSpec.lebesgue(float(key[1:]))
    if key == "lp" and len(vals) == 1:
        return RiSpec.lebesgue(vals[0])
    if key == "lorentz" and len(vals) == 2:
        return RiSpec.lorentz(*vals)
    if key == "lz" and len(vals) in (2, 4):
        return RiSpec.lorentz_zygmund(*vals)
    raise ValueError(f"cannot parse r.i. space {text!r}")


def _lz_segment_sup(spec: RiSpec, s0: float, s1: float) -> float:
    """sup of s^{1/p} l^A(s) over [s0, s1] (s0 may be 0)."""
    a = 0.0 if math.isinf(spec.p) else 1.0 / spec.p
    cands = [s1]
    if s0 > 0:
        cands.append(s0)
    # interior critical points of a*u + c*ln(1+|u|): u = -1 - c/a (u<0) or c/a - 1 (u>0)
    if a > 0:
        for u in (-1.0 - spec.alpha / a, spec.beta / a - 1.0):
            s = math.exp(u)
            if s0 < s < s1:
                cands.append(s)
    else:
        cands.append(1.0)
        if s0 == 0:
            cands.append(0.0)
    best = 0.0
    for s in cands:
        if s == 0.0:
            # limit at 0 with a = 0 and alpha <= 0
            val = 1.0 if spec.alpha == 0 else 0.0
        elif s0 <= s <= s1:
            val = math.exp(float(_weights.log_weight(math.log(s), a, spec.alpha, spec.beta)))
        else:
            continue
        best = max(best, val)
    return best


def ri_norm(spec: RiSpec, prof: StepProfile) -> float:
    """Norm of any f with decreasing rearrangement ``prof``."""
    v, s = prof.values, prof.breakpoints
    if v.size == 0 or prof.sup == 0:
        return 0.0
    if spec.family == "lebesgue":
        if math.isinf(spec.p):
            return prof.sup
        return float(np.sum(v**spec.p * prof.widths) ** (1.0 / spec.p))
    if spec.family == "lorentz":
        p, q = spec.p, spec.q
        if math.isinf(p):
            return prof.sup
        if math.isinf(q):
            return float(np.max(v * s[1:] ** (1.0 / p)))
        w = (p / q) * np.diff(s ** (q / p))
        return float(np.sum(v**q * w) ** (1.0 / q))
    # Lorentz-Zygmund
    if math.isinf(spec.q):
        return float(max(vi * _lz_segment_sup(spec, s0, s1) for vi, s0, s1 in zip(v, s[:-1], s[1:])))
    a = 0.0 if math.isinf(spec.p) else spec.q / spec.p
    cl, ch = spec.alpha * spec.q, spec.beta * spec.q
    cells = _weights.log_cell_integrals(a, cl, ch, np.log(s[1:]))
    pos = v > 0
    return float(math.exp(_weights._logsumexp(spec.q * np.log(v[pos]) + cells[pos]) / spec.q))


def _log_fundamental_lz(spec: RiSpec, t: np.ndarray) -> np.ndarray:
    flat = t.ravel()
    order = np.argsort(flat)
    u = np.log(flat[order])
    out = np.empty_like(u)
    if math.isinf(spec.q):
        for i, ti in enumerate(flat[order]):
            out[i] = math.log(_lz_segment_sup(spec, 0.0, float(ti)))
    else:
        a = 0.0 if math.isinf(spec.p) else spec.q / spec.p
        cl, ch = spec.alpha * spec.q, spec.beta * spec.q
        if u.size > 64:
            logw = _weights.log_cumulative(a, cl, ch, u)
        else:
            logw = np.array([_weights.log_weight_integral(a, cl, ch, -INF, ui) for ui in u])
        out = logw / spec.q
    res = np.empty_like(out)
    res[order] = out
    return res.reshape(t.shape)


def fundamental_function(spec: RiSpec, t):
    """phi_X(t) = ||chi_E||_X for mu(E) = t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    if spec.family == "lebesgue" or (spec.family == "lorentz" and math.isinf(spec.q)):
        return np.ones_like(t) if math.isinf(spec.p) else t ** (1.0 / spec.p)
    if spec.family == "lorentz":
        if math.isinf(spec.p):
            return np.ones_like(t)
        return (spec.p / spec.q) ** (1.0 / spec.q) * t ** (1.0 / spec.p)
    return np.exp(_log_fundamental_lz(spec, t))


def associate(spec: RiSpec) -> RiSpec:
    """Associate space; Lorentz associates hold only up to an equivalent norm."""
    if spec.family == "lebesgue":
        return RiSpec.lebesgue(conjugate(spec.p))
    if spec.family == "lorentz" and 1 < spec.p < INF:
        return replace(RiSpec.lorentz(conjugate(spec.p), conjugate(spec.q)), equivalent=True)
    raise ValueError(f"no closed-form associate for {spec.label}")


def convexify(spec: RiSpec, r: float) -> RiSpec:
    """X^{(r)} with ||f||_{X^{(r)}} = || |f|^r ||_X^{1/r}."""
    if r < 1:
        raise ValueError("convexification exponent must be >= 1")
    if r == 1:
        return spec
    if spec.family == "lebesgue":
        return RiSpec.lebesgue(spec.p * r)
    if spec.family == "lorentz":
        return replace(RiSpec.lorentz(spec.p * r, spec.q * r), equivalent=spec.equivalent)
    return RiSpec.lorentz_zygmund(spec.p * r, spec.q * r, spec.alpha / r, spec.beta / r)


def convexified_norm(spec: RiSpec, prof: StepProfile, r: float) -> float:
    """Direct evaluation of || |f|^r ||_X^{1/r}, independent of ``convexify``."""
    return ri_norm(spec, prof.power(r)) ** (1.0 / r)


def fundamental_indices(spec: RiSpec) -> tuple[float, float]:
    from .svparam import extension_indices

    return extension_indices(lambda t: fundamental_function(spec, t))


def field_norm(spec: RiSpec, space, f) -> float:
    return ri_norm(spec, rearrangement(space, f))


def cell_weights(spec: RiSpec, prof: StepProfile) -> np.ndarray:
    """c_i with ||f||_X^q = sum_i v_i^q c_i, for families with finite q."""
    s = prof.breakpoints
    if math.isinf(spec.q):
        raise ValueError("cell weights need q < inf")
    if spec.family == "lebesgue":
        return prof.widths
    if spec.family == "lorentz":
        return (spec.p / spec.q) * np.diff(s ** (spec.q / spec.p))
    a = 0.0 if math.isinf(spec.p) else spec.q / spec.p
    return np.exp(_weights.log_cell_integrals(a, spec.alpha * spec.q, spec.beta * spec.q, np.log(s[1:])))


def norm_gradient(spec: RiSpec, values, weights) -> np.ndarray:
    """A subgradient of g -> ||g||_X at a nonnegative point field g.

    Each point inherits the derivative of its rearrangement step, shared among
    tied points in proportion to their weights.
    """
    g = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not np.any(g > 0):
        return np.zeros_like(g)
    prof = profile_from_values(g, w)
    step_of = np.searchsorted(-prof.values, -g, side="left")
    if math.isinf(spec.q):
        # sup-type norms: push down the points that realise the sup
        if spec.family == "lebesgue" or math.isinf(spec.p):
            top = g >= prof.sup
        else:
            s1 = prof.breakpoints[1:]
            score = prof.values * (s1 ** (1.0 / spec.p) if spec.family == "lorentz"
                                   else np.array([_lz_segment_sup(spec, a, b)
                                                  for a, b in zip(prof.breakpoints[:-1], s1)]))
            top = step_of <= int(np.argmax(score))
        out = np.where(top, w, 0.0)
        return out / out.sum()
    c = cell_weights(spec, prof)
    N = ri_norm(spec, prof)
    q = spec.q
    share = (c / prof.widths)[step_of] * w
    return g ** (q - 1) * share / N ** (q - 1)
