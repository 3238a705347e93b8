"""Log-domain integrals of power x broken-log weights.

Everything here works in the variable u = ln s and integrates

    w(u) = exp(a*u) * (1 + |u|)^c(u),   c(u) = c_lo for u < 0, c_hi for u >= 0,

which is s^a * l^A(s)^q written against ds/s.  Results are returned as logs
so that grids spanning hundreds of e-folds neither underflow nor overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def log_weight(u, a, c_lo, c_hi):
    u = np.asarray(u, dtype=float)
    c = np.where(u < 0, c_lo, c_hi)
    return a * u + c * np.log1p(np.abs(u))


def log_weight_integral(a: float, c_lo: float, c_hi: float, u0: float, u1: float) -> float:
    """log of int_{u0}^{u1} w(u) du by adaptive quadrature (u0 may be -inf)."""
    if not u1 > u0:
        return -math.inf
    if math.isinf(u0) and not (a > 0 or (a == 0 and c_lo < -1)):
        raise ValueError("weight integral diverges at 0")
    ref = float(log_weight(u1, a, c_lo, c_hi)) if a >= 0 else float(log_weight(u0, a, c_lo, c_hi))
    if not math.isfinite(ref):
        ref = 0.0

    def f(u):
        return math.exp(float(log_weight(u, a, c_lo, c_hi)) - ref)

    pieces = [(u0, min(u1, 0.0)), (max(u0, 0.0), u1)]
    total = 0.0
    for lo, hi in pieces:
        if hi > lo:
            val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
            total += val
    if total <= 0:
        return -math.inf
    return ref + math.log(total)


def log_cell_integrals(a: float, c_lo: float, c_hi: float, u_grid, max_cell: float = 0.25):
    """log int over (-inf, u_0], (u_0, u_1], ... for an increasing grid.

    The first cell uses adaptive quadrature; later cells use Gauss-Legendre
    on sub-cells no wider than ``max_cell``, split at the kink u = 0.
    """
    u = np.asarray(u_grid, dtype=float)
    out = np.empty_like(u)
    out[0] = log_weight_integral(a, c_lo, c_hi, -math.inf, u[0])
    for j in range(1, u.size):
        lo, hi = u[j - 1], u[j]
        cuts = [lo, hi] if not (lo < 0 < hi) else [lo, 0.0, hi]
        logs = []
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(math.ceil((x1 - x0) / max_cell)))
            edges = np.linspace(x0, x1, m + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
            wts = (half[:, None] * _GL_W[None, :]).ravel()
            logs.append(_logsumexp(log_weight(nodes, a, c_lo, c_hi) + np.log(wts)))
        out[j] = _logsumexp(np.array(logs)) if logs else -math.inf
    return out


def log_cumulative(a: float, c_lo: float, c_hi: float, u_grid, max_cell: float = 0.25):
    """log int_{-inf}^{u_j} w for every node of an increasing grid."""
    return np.logaddexp.accumulate(log_cell_integrals(a, c_lo, c_hi, u_grid, max_cell))


def _logsumexp(x) -> float:
    x = np.asarray(x, dtype=float)
    m = np.max(x)
    if not math.isfinite(m):
        return float(m)
    return float(m + math.log(np.sum(np.exp(x - m))))
