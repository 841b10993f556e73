"""Error norms and mesh quality measures for discrete curves.

The continuum error norms compare the polygon, read as a piecewise
linear function over the reference interval, against a smooth exact
curve at a given time.  Two sampling rules are offered: ``gauss5``
integrates the error with five Gauss points per element (essentially
exact for the smooth integrands here), while ``nodal`` applies the
trapezoidal rule to samples at the element endpoints, the convention
behind many published error tables.  The superconvergence distance,
by contrast, is a closed form: the H1 norm of the difference between
the polygon and the nodal interpolant of the exact curve is a quadratic
in the nodal gaps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import nan, sqrt

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .curves import CurveFunction, PeriodicCurve
from .quadrature import gauss_01

__all__ = [
    "ErrorRecord",
    "l2_error",
    "h1_seminorm_error",
    "superconvergence_error",
    "mesh_ratio",
    "min_radial",
    "diameter",
    "PAIRWISE_LIMIT",
]

ERROR_RULES = ("gauss5", "nodal")

# largest node count for which the O(J^2) pairwise diameter is used
PAIRWISE_LIMIT = 1024


@dataclass(frozen=True)
class ErrorRecord:
    """Diagnostics of one accepted step; nan marks untracked fields."""

    step: int
    time: float
    err_l2: float = nan
    err_h1: float = nan
    superconv_h1: float = nan
    mesh_ratio: float = nan
    min_radius: float = nan
    diameter: float = nan


@lru_cache(maxsize=32)
def _element_rho(node_count: int, npts: int):
    """Gauss coordinates per element; element j spans [(j-1)h, jh]."""
    s, w = gauss_01(npts)
    h = 1.0 / node_count
    rho = (np.arange(node_count)[:, None] - 1.0 + s[None, :]) * h
    rho = np.mod(rho, 1.0)
    rho.setflags(write=False)
    return rho, s, w


def _check_rule(rule: str):
    if rule not in ERROR_RULES:
        raise ValueError(f"unknown error rule {rule!r}, expected one of {ERROR_RULES}")


def l2_error(
    curve: PeriodicCurve, exact: CurveFunction, t: float = 0.0, rule: str = "gauss5"
) -> float:
    """L2 distance between the polygon and the exact curve at time t."""
    _check_rule(rule)
    J = curve.node_count
    h = curve.spacing
    if rule == "nodal":
        rho = np.arange(J, dtype=float) / J
        gap = exact(rho, t) - curve.positions
        return sqrt(h * float((gap * gap).sum()))
    rho, s, w = _element_rho(J, 5)
    vals = exact(rho.ravel(), t).reshape(J, len(s), 2)
    left = np.roll(curve.positions, 1, axis=0)
    poly = left[:, None, :] * (1.0 - s)[None, :, None] + curve.positions[:, None, :] * s[None, :, None]
    diff = poly - vals
    return sqrt(h * float(np.einsum("g,jgc->", w, diff * diff)))


def h1_seminorm_error(
    curve: PeriodicCurve, exact: CurveFunction, t: float = 0.0, rule: str = "gauss5"
) -> float:
    """H1 seminorm distance: derivative of the polygon vs the exact curve."""
    _check_rule(rule)
    J = curve.node_count
    h = curve.spacing
    slope = curve.edge_vectors() / h  # constant per element
    if rule == "nodal":
        rho = np.arange(J, dtype=float) / J
        dx = exact.d_rho(rho, t)
        a = np.roll(dx, 1, axis=0) - slope  # left endpoint of element j
        b = dx - slope  # right endpoint
        return sqrt(0.5 * h * float((a * a).sum() + (b * b).sum()))
    rho, s, w = _element_rho(J, 5)
    dvals = exact.d_rho(rho.ravel(), t).reshape(J, len(s), 2)
    diff = slope[:, None, :] - dvals
    return sqrt(h * float(np.einsum("g,jgc->", w, diff * diff)))


def superconvergence_error(
    curve: PeriodicCurve, exact: CurveFunction, t: float = 0.0
) -> float:
    """Full H1 distance between the polygon and the interpolant of exact.

    Both arguments of the difference are piecewise linear on the same
    grid, so the norm is evaluated in closed form from the nodal gaps.
    """
    J = curve.node_count
    h = curve.spacing
    rho = np.arange(J, dtype=float) / J
    gap = exact(rho, t) - curve.positions
    left = np.roll(gap, 1, axis=0)
    l2_sq = h / 3.0 * float((left * left + left * gap + gap * gap).sum())
    jump = gap - left
    semi_sq = float((jump * jump).sum()) / h
    return sqrt(l2_sq + semi_sq)


def mesh_ratio(curve: PeriodicCurve) -> float:
    """Longest edge over shortest edge; inf when an edge has length zero."""
    lens = curve.edge_lengths()
    shortest = float(lens.min())
    if shortest == 0.0:
        return float("inf")
    return float(lens.max()) / shortest


def min_radial(curve: PeriodicCurve) -> float:
    """Smallest nodal distance to the rotation axis."""
    return float(curve.r.min())


def diameter(curve: PeriodicCurve) -> float:
    """Largest pairwise distance between nodes.

    Direct O(J^2) comparison up to PAIRWISE_LIMIT nodes; beyond that the
    farthest pair is found on the convex hull by a rotating-calipers
    scan.
    """
    pts = curve.positions
    if len(pts) <= PAIRWISE_LIMIT:
        return _diameter_pairwise(pts)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # degenerate (collinear) node set: the farthest pair joins
        # coordinate extremes
        idx = [pts[:, 0].argmin(), pts[:, 0].argmax(), pts[:, 1].argmin(), pts[:, 1].argmax()]
        return _diameter_pairwise(pts[sorted(set(int(i) for i in idx))])
    verts = pts[hull.vertices]  # counterclockwise
    if len(verts) <= PAIRWISE_LIMIT:
        return _diameter_pairwise(verts)
    return _rotating_calipers(verts)


def _diameter_pairwise(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    return sqrt(float((diff * diff).sum(axis=2).max()))


def _rotating_calipers(verts: np.ndarray) -> float:
    """Diameter of a convex polygon given in counterclockwise order."""
    n = len(verts)
    best_sq = 0.0

    def dist_sq(i, k):
        d = verts[i] - verts[k]
        return float(d[0] * d[0] + d[1] * d[1])

    k = 1
    for i in range(n):
        j = (i + 1) % n
        edge = verts[j] - verts[i]
        # advance the antipodal point while the supporting area grows
        advanced = 0
        while advanced < n:
            nxt = (k + 1) % n
            step = verts[nxt] - verts[k]
            if edge[0] * step[1] - edge[1] * step[0] > 0.0:
                k = nxt
                advanced += 1
            else:
                break
        best_sq = max(best_sq, dist_sq(i, k), dist_sq(j, k))
    return sqrt(best_sq)
