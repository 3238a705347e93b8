"""Decreasing rearrangements as exact step functions.

f*(s) = inf{t >= 0 : mu{|f| > t} <= s}.  On a finite space f* is a step
function: value v_i on [s_{i-1}, s_i), zero beyond the total mass.  All
integrals below are closed-form sums over the steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class StepProfile:
    """Nonincreasing step function on (0, total_mass], extended by 0.

    ``breakpoints`` has length m+1 with breakpoints[0] = 0; ``values`` has
    length m and ``values[i]`` is taken on [breakpoints[i], breakpoints[i+1]).
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or v.ndim != 1 or s.size != v.size + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if s[0] != 0 or np.any(np.diff(s) <= 0):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("values must be nonnegative and nonincreasing")
        object.__setattr__(self, "breakpoints", s)
        object.__setattr__(self, "values", v)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def total_mass(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def sup(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    def star(self, s):
        """Evaluate f*(s) (right-continuous; 0 for s >= total mass)."""
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.breakpoints, s, side="right") - 1
        padded = np.append(self.values, 0.0)
        idx = np.clip(idx, 0, self.values.size)
        return padded[idx]

    def integral(self, t):
        """int_0^t f*(s) ds, exact for every t >= 0."""
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.values * self.widths)])
        idx = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, self.values.size)
        padded = np.append(self.values, 0.0)
        return cum[idx] + padded[idx] * (t - self.breakpoints[idx])

    def power(self, p: float) -> "StepProfile":
        """Profile of |f|^p."""
        return StepProfile(self.breakpoints, self.values**p)

    def distribution(self, tau):
        """mu{|f| > tau}."""
        tau = np.asarray(tau, dtype=float)
        # values are nonincreasing; count steps strictly above tau
        cnt = np.searchsorted(-self.values, -tau, side="left")
        return self.breakpoints[cnt]

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}


def profile_from_values(values, weights) -> StepProfile:
    """Weighted decreasing rearrangement of |values|; ties merge into one step."""
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    if a.shape != w.shape:
        raise ValueError("values and weights must have the same shape")
    if not np.all(np.isfinite(a)):
        raise ValueError("field values must be finite")
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    # merge equal values
    starts = np.flatnonzero(np.concatenate([[True], a[1:] != a[:-1]]))
    vals = a[starts]
    mass = np.add.reduceat(w, starts)
    return StepProfile(np.concatenate([[0.0], np.cumsum(mass)]), vals)


def rearrangement(space, f) -> StepProfile:
    """Decreasing rearrangement of a scalar field on a space."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.point_count,):
        raise ValueError(f"field has shape {f.shape}, expected ({space.point_count},)")
    return profile_from_values(f, space.weights)


def maximal(p: StepProfile, t):
    """f**(t) = (1/t) int_0^t f*."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    return p.integral(t) / t


def oscillation(p: StepProfile, t):
    """O(f, t) = f**(t) - f*(t) >= 0."""
    return np.maximum(maximal(p, t) - p.star(t), 0.0)


def k_classical(p: StepProfile, t, p_exp: float = 1.0):
    """K-functional of the couple (L^p, L^inf) at t.

    p_exp = 1 gives K(f, t; L1, Linf) = int_0^t f* exactly.  For p_exp > 1
    this returns (int_0^{t^p} f*(s)^p ds)^{1/p}, which is only equivalent to
    K(f, t; L^p, L^inf) up to constants depending on p.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    if p_exp < 1:
        raise ValueError("p_exp must be >= 1")
    if p_exp == 1:
        return p.integral(t)
    return p.power(p_exp).integral(t**p_exp) ** (1.0 / p_exp)


def l1_plus_linf(p: StepProfile) -> float:
    """||f||_{L1 + Linf} = f**(1) = K(f, 1; L1, Linf)."""
    return float(p.integral(1.0))


def l1_cap_linf(p: StepProfile) -> float:
    """||f||_{L1 cap Linf} = max(||f||_1, ||f||_inf)."""
    return max(float(p.integral(p.total_mass)), p.sup)
