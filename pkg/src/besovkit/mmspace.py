"""Finite metric measure spaces, exact ball queries and geometric constants.

A space stores a dense distance matrix and positive point masses.  Ball
queries go through a cache of distance rows sorted per center, so a ball
B(x, r) = {y : d(x, y) < r} is always a prefix of that center's sorted row.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

MAX_DENSE_POINTS = 8192
SYMMETRY_TOL = 1e-9


class SpaceError(ValueError):
    """Raised for malformed or invalid metric measure space input."""


@dataclass(frozen=True, eq=False)
class MMSpace:
    """Finite metric measure space (points, dense metric, positive weights).

    Instances are immutable; the sorted-row cache is built lazily and is
    read-only afterwards, so a space can be shared across workers.
    """

    dist: np.ndarray
    weights: np.ndarray
    labels: tuple = ()
    coords: np.ndarray | None = None
    name: str = "space"

    def __post_init__(self):
        dist = np.ascontiguousarray(self.dist, dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        dist.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", weights)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(weights))))
        validate(self)

    @property
    def point_count(self) -> int:
        return len(self.weights)

    @cached_property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max())

    @cached_property
    def min_distance(self) -> float:
        """Smallest positive inter-point distance."""
        d = self.dist[self.dist > 0]
        return float(d.min()) if d.size else 0.0

    @cached_property
    def _sorted(self):
        order = np.argsort(self.dist, axis=1, kind="stable").astype(np.int32)
        sdist = np.take_along_axis(self.dist, order, axis=1)
        cmass = np.cumsum(self.weights[order], axis=1)
        for a in (order, sdist, cmass):
            a.setflags(write=False)
        return order, sdist, cmass

    @property
    def order(self) -> np.ndarray:
        """Per-center point indices sorted by distance from the center."""
        return self._sorted[0]

    @property
    def sorted_dist(self) -> np.ndarray:
        return self._sorted[1]

    @property
    def cum_mass(self) -> np.ndarray:
        """cum_mass[x, j] = mass of the j+1 nearest points to x."""
        return self._sorted[2]

    def ball_counts(self, radii) -> np.ndarray:
        """Number of points in B(x, r) for every center x and every radius.

        Returns an int array of shape (N, len(radii)).  Ties at exactly r are
        excluded (strict inequality).
        """
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        sd = self.sorted_dist
        out = np.empty((self.point_count, radii.size), dtype=np.int64)
        for i in range(self.point_count):
            out[i] = np.searchsorted(sd[i], radii, side="left")
        return out

    def ball_masses(self, radii) -> np.ndarray:
        """mu(B(x, r)) for all centers x (rows) and radii (columns)."""
        counts = self.ball_counts(radii)
        return np.take_along_axis(self.cum_mass, counts - 1, axis=1)


def validate(space: MMSpace, triangle_samples: int = 10_000, seed: int = 0) -> None:
    d, w = space.dist, space.weights
    n = len(w)
    if d.ndim != 2 or d.shape != (n, n):
        raise SpaceError(f"distance matrix shape {d.shape} does not match {n} weights")
    if n == 0:
        raise SpaceError("empty space")
    if not np.all(np.isfinite(d)):
        raise SpaceError("infinite or NaN distances (disconnected graph?)")
    if np.any(d < 0):
        raise SpaceError("negative distance")
    if np.any(np.diag(d) != 0):
        raise SpaceError("nonzero diagonal in distance matrix")
    if np.max(np.abs(d - d.T)) > SYMMETRY_TOL:
        raise SpaceError("asymmetric metric")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise SpaceError("nonpositive weight")
    if triangle_samples and n >= 3:
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, triangle_samples))
        excess = d[i, k] - d[i, j] - d[j, k]
        scale = max(space_scale(d), 1.0)
        if np.max(excess) > 1e-9 * scale:
            raise SpaceError("triangle inequality violated")


def space_scale(d: np.ndarray) -> float:
    return float(d.max()) if d.size else 0.0


# ---------------------------------------------------------------------------
# constructors


def from_matrix(dist, weights=None, labels=(), name="matrix") -> MMSpace:
    dist = np.asarray(dist, dtype=float)
    if weights is None:
        weights = np.ones(dist.shape[0])
    return MMSpace(dist=dist, weights=np.asarray(weights, float), labels=tuple(labels), name=name)


def pairwise_distances(coords: np.ndarray, metric: str = "euclidean", p: float = 2.0) -> np.ndarray:
    """Dense distances for a point cloud.

    ``metric`` is ``euclidean`` (p-norm with exponent ``p``) or ``torus:L``,
    the flat torus of side L (periodic in every coordinate).
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if coords.shape[0] > MAX_DENSE_POINTS:
        raise SpaceError(f"{coords.shape[0]} points exceeds dense ceiling {MAX_DENSE_POINTS}")
    period = None
    if metric.startswith("torus"):
        _, _, side = metric.partition(":")
        period = float(side) if side else 1.0
    elif metric != "euclidean":
        raise SpaceError(f"unknown metric {metric!r}")
    n = coords.shape[0]
    acc = np.zeros((n, n))
    for c in coords.T:
        diff = np.abs(c[:, None] - c[None, :])
        if period is not None:
            diff = np.minimum(diff, period - diff)
        if math.isinf(p):
            np.maximum(acc, diff, out=acc)
        else:
            acc += diff**p
    if not math.isinf(p):
        acc **= 1.0 / p
    # exact symmetry and zero diagonal regardless of rounding
    acc = np.minimum(acc, acc.T)
    np.fill_diagonal(acc, 0.0)
    return acc


def from_points(coords, weights=None, metric="euclidean", p=2.0, labels=(), name="points") -> MMSpace:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    d = pairwise_distances(coords, metric=metric, p=p)
    if weights is None:
        weights = np.full(len(coords), 1.0 / len(coords))
    return MMSpace(dist=d, weights=np.asarray(weights, float), labels=tuple(labels),
                   coords=coords, name=name)


def from_graph(nodes: Sequence, edges: Iterable, name="graph") -> MMSpace:
    """Complete a weighted graph to its shortest-path metric.

    ``nodes`` is a sequence of (id, weight); ``edges`` of (u, v, length).
    """
    ids = [n[0] for n in nodes]
    index = {k: i for i, k in enumerate(ids)}
    if len(index) != len(ids):
        raise SpaceError("duplicate node id")
    rows, cols, vals = [], [], []
    for u, v, length in edges:
        if u not in index or v not in index:
            raise SpaceError(f"edge references unknown node {u!r}-{v!r}")
        if not length > 0:
            raise SpaceError("edge lengths must be positive")
        rows += [index[u], index[v]]
        cols += [index[v], index[u]]
        vals += [float(length), float(length)]
    n = len(ids)
    adj = csr_matrix((vals, (rows, cols)), shape=(n, n))
    d = shortest_path(adj, method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise SpaceError("disconnected graph (infinite distances)")
    return MMSpace(dist=d, weights=np.array([float(n[1]) for n in nodes]),
                   labels=tuple(ids), name=name)


def circle_grid(n: int, length: float = 1.0, weights=None) -> MMSpace:
    """n equally spaced points on a circle of the given length (arc metric)."""
    x = np.arange(n) * (length / n)
    return from_points(x[:, None], weights=weights, metric=f"torus:{length}",
                       name=f"circle{n}")


def torus_grid(m: int, dim: int = 2, side: float = 1.0) -> MMSpace:
    """m**dim grid on the flat torus [0, side)^dim, uniform weights summing to 1."""
    axes = [np.arange(m) * (side / m)] * dim
    pts = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    return from_points(pts, metric=f"torus:{side}", name=f"torus{m}^{dim}")


def random_cloud(n: int, dim: int = 3, seed: int = 0, weight_jitter: float = 0.5) -> MMSpace:
    """Uniform points in [0,1]^dim with jittered weights normalized to mass 1."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, dim))
    w = 1.0 + weight_jitter * rng.uniform(-1, 1, size=n)
    return from_points(pts, weights=w / w.sum(), name=f"random{n}d{dim}s{seed}")


def generate(descriptor: str) -> MMSpace:
    """Build a space from ``circle:N``, ``torus:M[:dim]`` or ``random:N[:seed[:dim]]``."""
    kind, *args = descriptor.split(":")
    vals = [int(a) for a in args]
    if kind == "circle":
        return circle_grid(*vals)
    if kind == "torus":
        return torus_grid(*vals)
    if kind == "random":
        n, seed, dim = (vals + [0, 3][len(vals) - 1:])[:3]
        return random_cloud(n, dim=dim, seed=seed)
    raise SpaceError(f"unknown space generator {descriptor!r}")


# ---------------------------------------------------------------------------
# file loading


def load_space(path, fmt: str, metric: str = "euclidean", weights_path=None) -> MMSpace:
    """Load a space from disk.

    Formats: ``csv`` point cloud with header ``id,x1,...,xd,weight``;
    ``json`` graph ``{nodes: [{id, weight}], edges: [{u, v, length}]}``;
    ``matrix`` dense CSV distance matrix with weights in ``weights_path``
    (unit weights if omitted).
    """
    try:
        if fmt == "csv":
            with open(path, newline="") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
            header, body = rows[0], rows[1:]
            if header[0].strip() != "id" or header[-1].strip() != "weight":
                raise SpaceError("point cloud header must be id,x1,...,xd,weight")
            labels = [r[0] for r in body]
            coords = np.array([[float(v) for v in r[1:-1]] for r in body])
            w = np.array([float(r[-1]) for r in body])
            return from_points(coords, weights=w, metric=metric, labels=labels, name=str(path))
        if fmt == "json":
            with open(path) as fh:
                doc = json.load(fh)
            nodes = [(nd["id"], nd.get("weight", 1.0)) for nd in doc["nodes"]]
            edges = [(e["u"], e["v"], e.get("length", 1.0)) for e in doc["edges"]]
            return from_graph(nodes, edges, name=str(path))
        if fmt == "matrix":
            d = np.loadtxt(path, delimiter=",", ndmin=2)
            w = np.loadtxt(weights_path, delimiter=",", ndmin=1) if weights_path else None
            return from_matrix(d, w, name=str(path))
    except SpaceError:
        raise
    except (OSError, KeyError, IndexError, ValueError) as exc:
        raise SpaceError(f"malformed {fmt} input: {exc}") from exc
    raise SpaceError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# balls and geometry


def ball(space: MMSpace, center: int, r: float):
    """Return (indices of B(center, r), its measure)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    k = int(np.searchsorted(space.sorted_dist[center], r, side="left"))
    return space.order[center, :k].copy(), float(space.cum_mass[center, k - 1])


def doubling_at(space: MMSpace, r: float) -> float:
    """max_x mu(B(x, 2r)) / mu(B(x, r)), the doubling ratio at one radius."""
    m = space.ball_masses([r, 2 * r])
    return float(np.max(m[:, 1] / m[:, 0]))


@dataclass
class IndexReport:
    k: float
    n: float
    C1: float
    C2: float
    C_D: float
    a_rev: float
    kappa: float
    c0: float
    C0: float
    radius_range: tuple
    k_fit: float = field(default=float("nan"))
    n_fit: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return {
            "k": self.k, "n": self.n, "C1": self.C1, "C2": self.C2, "C_D": self.C_D,
            "a_rev": self.a_rev, "kappa": self.kappa, "c0": self.c0, "C0": self.C0,
            "radius_range": list(self.radius_range),
        }


def geometric_radii(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.geomspace(lo, hi, steps)


def estimate_geometry(space: MMSpace, radii=None, lambdas=None) -> IndexReport:
    """Fit RD indices, doubling, reverse doubling and non-collapsing constants.

    Point estimates of k and n are the extreme per-center log-log slopes of
    r -> mu(B(x, r)) over the clipped radius range; C1, C2, c0 and C0 are
    exact envelopes over every sampled (x, r, lambda) for those exponents.
    """
    r_lo = space.min_distance
    r_hi = space.diameter / 2
    if radii is None:
        # start once every ball holds a few points; stop short of saturation
        j = min(4, space.point_count - 1)
        lo = max(2 * r_lo, float(space.sorted_dist[:, j].max()), r_hi / 64)
        radii = np.geomspace(lo, max(lo * 1.5, 0.9 * r_hi), 24)
    radii = np.asarray(radii, dtype=float)
    radii = radii[(radii > r_lo) & (radii < r_hi)]
    if radii.size < 2:
        raise ValueError("radius grid empty after clipping to (min distance, diameter/2)")
    if lambdas is None:
        lambdas = np.geomspace(1.0, 4.0, 25)
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas < 1):
        raise ValueError("dilation factors must be >= 1")

    masses = space.ball_masses(radii)  # (N, R)
    logm, logr = np.log(masses), np.log(radii)
    if np.all(np.ptp(logm, axis=1) == 0):
        raise ValueError("saturated radii: every ball has the same mass over the range")
    lr = logr - logr.mean()
    slopes = (logm - logm.mean(axis=1, keepdims=True)) @ lr / (lr @ lr)
    k_fit, n_fit = float(slopes.min()), float(slopes.max())
    k = max(k_fit, 1e-6)
    n = max(n_fit, k)

    dil = space.ball_masses(np.outer(radii, lambdas).ravel()).reshape(
        space.point_count, radii.size, lambdas.size)
    ratio = dil / masses[:, :, None]
    C1 = min(1.0, float(np.min(ratio / lambdas**k)))
    C2 = max(1.0, float(np.max(ratio / lambdas**n)))

    double = space.ball_masses(2 * radii)
    C_D = max(1.0, float(np.max(double / masses)))

    achieved = np.all(ratio >= 2.0, axis=(0, 1))
    a_rev = float(lambdas[np.argmax(achieved)]) if achieved.any() else math.inf

    unit = space.ball_masses([1.0])[:, 0]
    kappa = float(unit.min())
    low = np.minimum(radii**k, radii**n)
    high = np.maximum(radii**k, radii**n)
    c0 = float(np.min(masses / (low * unit[:, None])))
    C0 = float(np.max(masses / (high * unit[:, None])))
    return IndexReport(k=k, n=n, C1=C1, C2=C2, C_D=C_D, a_rev=a_rev, kappa=kappa,
                       c0=c0, C0=C0, radius_range=(float(radii[0]), float(radii[-1])),
                       k_fit=k_fit, n_fit=n_fit)
