"""Generalised Hajlasz-Besov norms on finite metric measure spaces.

Homogeneous:   || t^{-theta} b(t) E_X(f, t) ||_{E~}
Inhomogeneous: || t^{-theta} b(t) E_X(f, t) ||_{E~(0, tsplit)} + ||f||_X
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mmspace import MMSpace
from .rispace import RiSpec, field_norm
from .smoothness import ModulusCurve, modulus, shift_modulus
from .svparam import ParamSpec, SVFn, tilde_norm

CURVE_PPD = 32
TAIL_FACTOR = 10.0


@dataclass(frozen=True)
class BesovSpec:
    theta: float
    b: SVFn | Callable = SVFn()
    X: RiSpec = RiSpec.lebesgue(1)
    E: ParamSpec = ParamSpec.lebesgue(1)
    homogeneous: bool = True
    tsplit: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.tsplit > 0:
            raise ValueError("tsplit must be positive")
        object.__setattr__(self, "E", self.E.with_flavor("dt_over_t"))

    def with_(self, **kw) -> "BesovSpec":
        fields = dict(theta=self.theta, b=self.b, X=self.X, E=self.E,
                      homogeneous=self.homogeneous, tsplit=self.tsplit)
        fields.update(kw)
        return BesovSpec(**fields)

    @property
    def label(self) -> str:
        b = getattr(self.b, "label", "custom")
        kind = "hom" if self.homogeneous else "inhom"
        return f"B[{kind}] theta={self.theta:g} b={b} X={self.X.label} E={self.E.label}"


def besov_t_grid(space: MMSpace, ppd: int = CURVE_PPD, t_top: float | None = None) -> np.ndarray:
    """Geometric radii from the minimum distance to TAIL_FACTOR x diameter."""
    lo = space.min_distance
    hi = max(TAIL_FACTOR * space.diameter, t_top or 0.0)
    if lo <= 0:
        raise ValueError("space has no positive distances")
    steps = int(math.ceil(math.log10(hi / lo) * ppd))
    return lo * 10.0 ** (np.arange(steps + 1) / ppd)


def besov_curve(space: MMSpace, f, X: RiSpec, t_grid=None, variant: str = "E", p: float = 1.0,
                field_id: str = "") -> ModulusCurve:
    """Modulus curve on the Besov grid; radii past the diameter reuse one evaluation."""
    t = besov_t_grid(space) if t_grid is None else np.asarray(t_grid, dtype=float)
    live = t <= space.diameter
    eval_t = np.append(t[live], space.diameter * 1.5)
    c = modulus(space, f, X, eval_t, variant, p, field_id=field_id)
    vals = np.full(t.size, c.values[-1])
    vals[: int(live.sum())] = c.values[:-1]
    return ModulusCurve(t=t, values=vals, X=c.X, variant=c.variant, p=c.p, space=c.space,
                        field_id=field_id, diameter=space.diameter, sampled=c.sampled,
                        meta={"zero_below": float(space.min_distance)})


def _b_values(b, t: np.ndarray) -> np.ndarray:
    return np.asarray(b(t), dtype=float)


def norm_from_curve(curve: ModulusCurve, spec: BesovSpec, f_norm: float = 0.0) -> float:
    """Besov norm from a precomputed modulus curve (f_norm = ||f||_X if inhomogeneous)."""
    t, e = curve.t, curve.values
    g = t ** -spec.theta * _b_values(spec.b, t) * e
    if spec.homogeneous:
        return tilde_norm(spec.E, (t, g), (0.0, math.inf))
    if spec.tsplit <= t[0]:
        # every radius below the split sees singleton balls only
        return f_norm
    if spec.tsplit > t[-1]:
        raise ValueError("tsplit beyond the curve grid")
    return tilde_norm(spec.E, (t, g), (0.0, spec.tsplit)) + f_norm


def besov_norm(space: MMSpace, f, spec: BesovSpec, curve: ModulusCurve | None = None) -> float:
    f = np.asarray(f, dtype=float)
    if curve is None:
        top = spec.tsplit * 1.01 if not spec.homogeneous else None
        curve = besov_curve(space, f, spec.X, besov_t_grid(space, t_top=top))
    f_norm = 0.0 if spec.homogeneous else field_norm(spec.X, space, f)
    return norm_from_curve(curve, spec, f_norm)


def besov_report(space: MMSpace, f, spec: BesovSpec) -> dict:
    return {
        "spec": spec.label,
        "norm": besov_norm(space, f, spec),
        "notes": [f"modulus is 0 below the minimum distance {space.min_distance:.6g}"],
        "tsplit_covers_space": bool(spec.tsplit >= space.diameter),
    }


def classical_besov_circle(values, theta: float, p: float, q: float, t_grid) -> float:
    """Besov seminorm built from the shift modulus omega_p on a periodic unit grid."""
    v = np.asarray(values, dtype=float)
    N = v.size
    t = np.asarray(t_grid, dtype=float)
    om = np.array([shift_modulus(v, int(math.floor(ti * N + 1e-9)), p, 1.0 / N) for ti in t])
    return tilde_norm(ParamSpec.lebesgue(q), (t, t**-theta * om), (0.0, math.inf))
