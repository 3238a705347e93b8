"""Test batteries: a space, its fitted geometry and a set of seeded fields."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..mmspace import IndexReport, MMSpace, estimate_geometry, generate
from ..smoothness import avg_operator

FIELD_NAMES = ("constant", "indicator_half", "indicator_ball", "cone", "trig", "smooth_random")

PROFILES = {
    # heavy: moduli and Besov norms; small: anything that needs 1-gradients or bmo
    "default": {
        "heavy": ["circle:2048", "torus:64", "random:48:0:3"],
        "small": ["circle:64", "torus:8", "random:48:0:3"],
    },
    "quick": {
        "heavy": ["circle:256", "torus:16", "random:48:0:3"],
        "small": ["circle:32", "torus:8", "random:48:0:3"],
    },
}


def make_fields(space: MMSpace, seed: int = 0) -> dict[str, np.ndarray]:
    """The six canonical fields; all are finite and deterministic given the seed."""
    N = space.point_count
    x0 = 0
    d0 = space.dist[x0]
    order = space.order[x0]
    half = np.zeros(N)
    half[order[: N // 2]] = 1.0
    ball = np.zeros(N)
    ball[order[: max(1, N // 8)]] = 1.0
    if space.coords is not None:
        c = space.coords
        span = np.ptp(c[:, 0]) + (c[1, 0] - c[0, 0] if N > 1 and c[1, 0] > c[0, 0] else 0.0)
        span = span if span > 0 else 1.0
        ang = 2 * np.pi * c[:, 0] / span
        trig = np.sin(ang) + 0.3 * np.sin(5 * ang)
        if c.shape[1] > 1:
            trig = trig * np.cos(2 * np.pi * c[:, 1] / (np.ptp(c[:, 1]) or 1.0))
    else:
        trig = np.cos(2 * np.pi * d0 / space.diameter)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(N)
    smooth = avg_operator(space, noise - noise.min(), 0.15 * space.diameter) + noise.min()
    return {
        "constant": np.full(N, 1.5),
        "indicator_half": half,
        "indicator_ball": ball,
        "cone": d0.copy(),
        "trig": trig,
        "smooth_random": smooth,
    }


@dataclass
class Battery:
    descriptor: str
    seed: int = 0
    role: str = "heavy"
    _space: MMSpace | None = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return f"{self.role}:{self.descriptor}"

    @cached_property
    def space(self) -> MMSpace:
        return self._space if self._space is not None else generate(self.descriptor)

    @cached_property
    def geometry(self) -> IndexReport:
        return estimate_geometry(self.space)

    @cached_property
    def fields(self) -> dict[str, np.ndarray]:
        return make_fields(self.space, self.seed)


def battery_hash(config: dict) -> str:
    """Hash of everything that determines the numbers in a report."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
