"""Closed generating curves in the meridian half-plane.

A torus-type surface of revolution is described by a closed curve
rho -> (r(rho), z(rho)) over the periodic reference interval [0, 1),
kept strictly inside the half-plane r > 0.  This module provides the
piecewise linear curve type used by the solver together with the
analytic start geometries of the scenario library.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

TWO_PI = 2.0 * np.pi

__all__ = [
    "InadmissibleCurveError",
    "PeriodicCurve",
    "CurveFunction",
    "interpolate",
    "torus_circle",
    "ellipse_curve",
    "rose_curve",
    "spiral_curve",
]


class InadmissibleCurveError(ValueError):
    """Raised when a curve leaves r > 0 or carries a zero-length edge."""


@dataclass(frozen=True)
class PeriodicCurve:
    """Closed polygon sampled on the uniform periodic grid rho_j = j/J.

    Column 0 of ``positions`` is the radial coordinate r, column 1 the
    axial coordinate z.  Edge j runs from node j-1 to node j, so edge 0
    is the wrap-around segment.  Instances are immutable.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True, order="C")
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must have shape (J, 2)")
        if pos.shape[0] < 3:
            raise ValueError("a closed polygon needs at least 3 nodes")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def node_count(self) -> int:
        return self.positions.shape[0]

    @property
    def spacing(self) -> float:
        """Reference grid spacing h = 1/J."""
        return 1.0 / self.positions.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self.positions[:, 1]

    def edge_vectors(self) -> np.ndarray:
        """All J edges at once; row j is node j minus node j-1."""
        return self.positions - np.roll(self.positions, 1, axis=0)

    def edge_lengths(self) -> np.ndarray:
        e = self.edge_vectors()
        return np.hypot(e[:, 0], e[:, 1])

    def edge_vector(self, j: int) -> np.ndarray:
        J = self.node_count
        return self.positions[j % J] - self.positions[(j - 1) % J]

    def edge_length(self, j: int) -> float:
        v = self.edge_vector(j)
        return float(np.hypot(v[0], v[1]))

    def is_admissible(self) -> bool:
        """True when the polygon stays in r > 0 with no degenerate edge."""
        return bool(self.r.min() > 0.0) and bool(self.edge_lengths().min() > 0.0)

    def require_admissible(self, context: str = "curve") -> None:
        if self.r.min() <= 0.0:
            raise InadmissibleCurveError(
                f"{context}: radial coordinate <= 0 (min {self.r.min():.3e})"
            )
        if self.edge_lengths().min() <= 0.0:
            raise InadmissibleCurveError(f"{context}: zero-length edge")


@dataclass(frozen=True)
class CurveFunction:
    """Smooth 1-periodic parameterization rho -> (r, z).

    ``value(rho, t)`` maps an array of reference coordinates to an
    (..., 2) array of positions.  ``derivative`` is the exact rho
    derivative when available; otherwise a central difference with a
    small fixed step stands in.
    """

    value: Callable[[np.ndarray, float], np.ndarray]
    derivative: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def __call__(self, rho, t: float = 0.0) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return np.asarray(self.value(rho, t), dtype=float)

    def d_rho(self, rho, t: float = 0.0) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(rho, t), dtype=float)
        step = 1e-6
        return (self(rho + step, t) - self(rho - step, t)) / (2.0 * step)


def interpolate(f: CurveFunction, node_count: int, t: float = 0.0) -> PeriodicCurve:
    """Nodal interpolant of f on the uniform grid with the given node count."""
    if node_count < 3:
        raise ValueError("need at least 3 nodes")
    rho = np.arange(node_count, dtype=float) / node_count
    return PeriodicCurve(f(rho, t))


def torus_circle(radius: float) -> CurveFunction:
    """Circle of the given radius about (1, 0), the canonical donut section.

    Requires 0 < radius < 1 so the revolved surface keeps its hole.
    """
    radius = float(radius)
    if not 0.0 < radius < 1.0:
        raise ValueError(f"torus circle radius must lie in (0, 1), got {radius!r}")

    def value(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return np.stack([1.0 + radius * np.cos(ang), radius * np.sin(ang)], axis=-1)

    def derivative(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return TWO_PI * radius * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    return CurveFunction(value, derivative)


def ellipse_curve() -> CurveFunction:
    """Unit circle about (5, 0): a section far from the rotation axis."""

    def value(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return np.stack([5.0 + np.cos(ang), np.sin(ang)], axis=-1)

    def derivative(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return TWO_PI * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    return CurveFunction(value, derivative)


def rose_curve() -> CurveFunction:
    """Six-petalled loop about (10, 0), radius 2 + cos(12 pi rho)."""

    def value(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        s = 2.0 + np.cos(6.0 * ang)
        return np.stack([10.0 + s * np.cos(ang), s * np.sin(ang)], axis=-1)

    def derivative(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        s = 2.0 + np.cos(6.0 * ang)
        ds = -6.0 * TWO_PI * np.sin(6.0 * ang)
        dr = ds * np.cos(ang) - s * TWO_PI * np.sin(ang)
        dz = ds * np.sin(ang) + s * TWO_PI * np.cos(ang)
        return np.stack([dr, dz], axis=-1)

    return CurveFunction(value, derivative)


def _triangle_wave(rho: np.ndarray) -> np.ndarray:
    """1-periodic tent: 0 at integers, 1 at half-integers."""
    frac = np.mod(rho, 1.0)
    return 1.0 - np.abs(1.0 - 2.0 * frac)


def spiral_curve(
    center: float = 3.0,
    inner: float = 0.4,
    spread: float = 1.2,
    layers: int = 2,
) -> CurveFunction:
    """Tightly coiled loop about (center, 0) closing after 2*layers + 1 turns.

    The distance from the center ramps linearly from ``inner`` up to
    ``inner + spread`` and back while the angle advances an odd number of
    full turns, so the curve closes after one period and winds
    2*layers + 1 times about its center.  Parameter combinations that
    push the curve out of r > 0 anywhere on a dense sample are rejected.
    """
    center, inner, spread = float(center), float(inner), float(spread)
    layers = int(layers)
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if inner <= 0.0 or spread < 0.0:
        raise ValueError("need inner > 0 and spread >= 0")
    turns = 2 * layers + 1

    def value(rho, t=0.0):
        rho = np.asarray(rho, dtype=float)
        s = inner + spread * _triangle_wave(rho)
        ang = TWO_PI * turns * rho
        return np.stack([center + s * np.cos(ang), s * np.sin(ang)], axis=-1)

    def derivative(rho, t=0.0):
        rho = np.asarray(rho, dtype=float)
        frac = np.mod(rho, 1.0)
        s = inner + spread * _triangle_wave(rho)
        ds = spread * np.where(frac < 0.5, 2.0, -2.0)
        ang = TWO_PI * turns * rho
        dang = TWO_PI * turns
        dr = ds * np.cos(ang) - s * np.sin(ang) * dang
        dz = ds * np.sin(ang) + s * np.cos(ang) * dang
        return np.stack([dr, dz], axis=-1)

    f = CurveFunction(value, derivative)
    sample = f(np.linspace(0.0, 1.0, 4097))
    if sample[:, 0].min() <= 0.0:
        raise ValueError("spiral parameters leave the half-plane r > 0")
    return f
