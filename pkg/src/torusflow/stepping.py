"""Time stepping for the axisymmetric curvature flow of generating curves.

Each scheme advances the nodal curve by solving one cyclic tridiagonal
system shared by both spatial components.  The geometric coefficients
(weighted mass, weighted stiffness, radial load) are frozen at a curve
that is already known, which keeps every step linear:

* ``bdf1_step`` freezes them at the current curve (first order, also
  the bootstrap step for the two-step schemes),
* ``cn_step`` freezes them at the midpoint extrapolation
  (3 X^m - X^{m-1})/2 and averages the stiffness action and the source
  over the old and new time level (second order),
* ``bdf2_step`` freezes them at the extrapolation 2 X^m - X^{m-1} and
  uses the two-step backward difference in time (second order).

``run`` drives a scheme from t = 0 to a final time, recording
diagnostics each step and stopping early with a typed event when the
curve touches the axis, collapses to a point, degenerates an element,
or the linear solver fails its residual audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from math import nan
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .assembly import (
    radial_direction_load,
    source_load,
    weighted_mass_matrix,
    weighted_stiffness_matrix,
)
from .curves import CurveFunction, PeriodicCurve, interpolate
from .cyclic_solver import SolveStatus, solve_cyclic
from .diagnostics import (
    PAIRWISE_LIMIT,
    ErrorRecord,
    diameter,
    h1_seminorm_error,
    l2_error,
    mesh_ratio,
    min_radial,
    superconvergence_error,
)

TWO_PI = 2.0 * np.pi
FOUR_PI_SQ = 4.0 * np.pi**2

__all__ = [
    "SchemeKind",
    "SourceField",
    "StopKind",
    "StopEvent",
    "EventThresholds",
    "StepFailure",
    "StepperState",
    "RunReport",
    "bdf1_step",
    "cn_step",
    "bdf2_step",
    "run",
    "manufactured_solution",
    "manufactured_forcing",
]


class SchemeKind(str, Enum):
    BDF1 = "bdf1"
    CN = "cn"
    BDF2 = "bdf2"


@dataclass(frozen=True)
class SourceField:
    """Forcing field sampled as f(rho, t) -> (n, 2), 1-periodic in rho."""

    func: Callable

    def __call__(self, rho, t: float) -> np.ndarray:
        return np.asarray(self.func(np.asarray(rho, dtype=float), t), dtype=float)


class StopKind(str, Enum):
    REACHED_T = "reached_T"
    AXIS_TOUCH = "axis_touch"
    CURVE_COLLAPSE = "curve_collapse"
    ELEMENT_DEGENERATE = "element_degenerate"
    SOLVER_FAILURE = "solver_failure"


@dataclass(frozen=True)
class StopEvent:
    """Why a run ended, when, and the metric that crossed its threshold."""

    kind: StopKind
    time: float
    metric: float = 0.0


@dataclass(frozen=True)
class EventThresholds:
    """Trigger levels for the geometric stopping events.

    ``axis``: smallest admissible nodal radius.  ``collapse``: smallest
    admissible diameter.  ``edge_fraction``: smallest admissible edge
    length as a fraction of the reference spacing h.
    """

    axis: float = 1e-3
    collapse: float = 1e-3
    edge_fraction: float = 1e-6


class StepFailure(RuntimeError):
    """A single step could not produce an acceptable curve."""

    def __init__(self, kind: StopKind, metric: float, message: str):
        super().__init__(message)
        self.kind = kind
        self.metric = metric


@dataclass(frozen=True)
class StepperState:
    """Inputs of one step: the current curve and, for two-step schemes,
    the previous one."""

    current: PeriodicCurve
    previous: Optional[PeriodicCurve]
    time: float
    dt: float
    step_index: int = 0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.previous is not None and (
            self.previous.node_count != self.current.node_count
        ):
            raise ValueError("current and previous curves must share a grid")


@dataclass(frozen=True)
class RunReport:
    """Outcome of a run: stopping event, final curve and per-step records."""

    scheme: SchemeKind
    node_count: int
    dt: float
    t_end: float
    event: StopEvent
    final: PeriodicCurve
    records: list[ErrorRecord] = field(default_factory=list)


def _check_weight(weight: PeriodicCurve, t_new: float) -> None:
    """Pre-flag a coefficient curve that left the admissible set."""
    rmin = float(weight.r.min())
    if rmin <= 0.0:
        raise StepFailure(
            StopKind.AXIS_TOUCH,
            rmin,
            f"coefficient curve left r > 0 approaching t = {t_new:g}",
        )
    emin = float(weight.edge_lengths().min())
    if emin <= 0.0:
        raise StepFailure(
            StopKind.ELEMENT_DEGENERATE,
            emin,
            f"coefficient curve degenerated an element approaching t = {t_new:g}",
        )


def _solve_step(matrix, rhs, t_new: float) -> PeriodicCurve:
    report = solve_cyclic(matrix, rhs)
    if report.status is not SolveStatus.OK:
        raise StepFailure(
            StopKind.SOLVER_FAILURE,
            report.residual_norm,
            f"linear solve {report.status.value} at t = {t_new:g} "
            f"(residual {report.residual_norm:.3e})",
        )
    new = PeriodicCurve(report.solution)
    if float(new.edge_lengths().min()) == 0.0:
        raise StepFailure(
            StopKind.ELEMENT_DEGENERATE, 0.0, f"zero-length edge at t = {t_new:g}"
        )
    return new


def bdf1_step(state: StepperState, source: Optional[SourceField] = None) -> PeriodicCurve:
    """One backward Euler step with coefficients frozen at the current curve."""
    cur = state.current
    dt = state.dt
    t_new = state.time + dt
    _check_weight(cur, t_new)
    mass = weighted_mass_matrix(cur)
    stiff = weighted_stiffness_matrix(cur)
    matrix = (1.0 / dt) * mass + stiff
    rhs = mass.matvec(cur.positions) / dt - radial_direction_load(cur)
    if source is not None:
        rhs = rhs + source_load(source, cur.node_count, t_new)
    return _solve_step(matrix, rhs, t_new)


def cn_step(state: StepperState, source: Optional[SourceField] = None) -> PeriodicCurve:
    """One averaged step with coefficients frozen at the midpoint
    extrapolation (3 X^m - X^{m-1}) / 2.

    Every time-level quantity enters as its average over the step: the
    stiffness acts on (X^{m+1} + X^m) / 2 and the source is tested as
    (f(t_m) + f(t_{m+1})) / 2.
    """
    if state.previous is None:
        raise ValueError("cn_step needs a previous curve; bootstrap with bdf1_step")
    cur, prev = state.current, state.previous
    dt = state.dt
    t_new = state.time + dt
    mid = PeriodicCurve(1.5 * cur.positions - 0.5 * prev.positions)
    _check_weight(mid, t_new)
    mass = weighted_mass_matrix(mid)
    stiff = weighted_stiffness_matrix(mid)
    matrix = (1.0 / dt) * mass + 0.5 * stiff
    rhs = (
        mass.matvec(cur.positions) / dt
        - 0.5 * stiff.matvec(cur.positions)
        - radial_direction_load(mid)
    )
    if source is not None:
        rhs = rhs + 0.5 * (
            source_load(source, cur.node_count, state.time)
            + source_load(source, cur.node_count, t_new)
        )
    return _solve_step(matrix, rhs, t_new)


def bdf2_step(state: StepperState, source: Optional[SourceField] = None) -> PeriodicCurve:
    """One two-step backward difference step with coefficients frozen at
    the extrapolation 2 X^m - X^{m-1}."""
    if state.previous is None:
        raise ValueError("bdf2_step needs a previous curve; bootstrap with bdf1_step")
    cur, prev = state.current, state.previous
    dt = state.dt
    t_new = state.time + dt
    extr = PeriodicCurve(2.0 * cur.positions - prev.positions)
    _check_weight(extr, t_new)
    mass = weighted_mass_matrix(extr)
    stiff = weighted_stiffness_matrix(extr)
    matrix = (1.5 / dt) * mass + stiff
    rhs = mass.matvec(4.0 * cur.positions - prev.positions) / (2.0 * dt)
    rhs = rhs - radial_direction_load(extr)
    if source is not None:
        rhs = rhs + source_load(source, cur.node_count, t_new)
    return _solve_step(matrix, rhs, t_new)


_STEPPERS = {
    SchemeKind.BDF1: bdf1_step,
    SchemeKind.CN: cn_step,
    SchemeKind.BDF2: bdf2_step,
}


def _step_count(t_end: float, dt: float) -> int:
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    steps = int(round(t_end / dt))
    if abs(steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end must be an integer multiple of dt")
    return steps


def _state_event(
    curve: PeriodicCurve, t: float, thresholds: EventThresholds
) -> Optional[StopEvent]:
    """First triggered event of a computed state, axis before collapse
    before degeneracy."""
    rmin = float(curve.r.min())
    if rmin < thresholds.axis:
        return StopEvent(StopKind.AXIS_TOUCH, t, rmin)
    pos = curve.positions
    spans = pos.max(axis=0) - pos.min(axis=0)
    bbox_diag = math.hypot(float(spans[0]), float(spans[1]))
    # the diameter is at least bbox_diag / sqrt(2), so most states skip
    # the exact computation
    if bbox_diag < math.sqrt(2.0) * thresholds.collapse:
        diam = diameter(curve)
        if diam < thresholds.collapse:
            return StopEvent(StopKind.CURVE_COLLAPSE, t, diam)
    emin = float(curve.edge_lengths().min())
    if emin < thresholds.edge_fraction * curve.spacing:
        return StopEvent(StopKind.ELEMENT_DEGENERATE, t, emin)
    return None


def run(
    initial: Union[CurveFunction, PeriodicCurve],
    scheme: SchemeKind,
    node_count: int,
    dt: float,
    t_end: float,
    source: Optional[SourceField] = None,
    exact: Optional[CurveFunction] = None,
    thresholds: Optional[EventThresholds] = None,
    observers: Sequence[Callable] = (),
    track_diameter: Optional[bool] = None,
    error_rule: str = "gauss5",
) -> RunReport:
    """March the curve from t = 0 to t_end or the first stopping event.

    ``initial`` is either a smooth curve (interpolated at t = 0) or a
    ready polygon with ``node_count`` nodes.  When ``exact`` is given,
    every record carries error norms against it under ``error_rule``.
    Observers are called as observer(step, t, curve) for the initial
    curve and every accepted step.  ``track_diameter=None`` records the
    diameter only for node counts small enough for the direct pairwise
    scan; the collapse event stays active either way.
    """
    scheme = SchemeKind(scheme)
    steps = _step_count(t_end, dt)
    if isinstance(initial, PeriodicCurve):
        start = initial
        if start.node_count != node_count:
            raise ValueError("initial curve node count disagrees with node_count")
    else:
        start = interpolate(initial, node_count, 0.0)
    thresholds = thresholds if thresholds is not None else EventThresholds()
    track = (node_count <= PAIRWISE_LIMIT) if track_diameter is None else track_diameter

    records: list[ErrorRecord] = []

    def record(idx: int, t: float, curve: PeriodicCurve) -> None:
        if exact is not None:
            e_l2 = l2_error(curve, exact, t, rule=error_rule)
            e_h1 = h1_seminorm_error(curve, exact, t, rule=error_rule)
            e_sup = superconvergence_error(curve, exact, t)
        else:
            e_l2 = e_h1 = e_sup = nan
        records.append(
            ErrorRecord(
                step=idx,
                time=t,
                err_l2=e_l2,
                err_h1=e_h1,
                superconv_h1=e_sup,
                mesh_ratio=mesh_ratio(curve),
                min_radius=min_radial(curve),
                diameter=diameter(curve) if track else nan,
            )
        )
        for obs in observers:
            obs(idx, t, curve)

    record(0, 0.0, start)
    state = StepperState(start, None, 0.0, dt, 0)
    event = _state_event(start, 0.0, thresholds)
    if event is None:
        for m in range(steps):
            bootstrap = state.previous is None and scheme is not SchemeKind.BDF1
            stepper = bdf1_step if bootstrap else _STEPPERS[scheme]
            try:
                new = stepper(state, source)
            except StepFailure as fail:
                event = StopEvent(fail.kind, (m + 1) * dt, fail.metric)
                break
            t_new = (m + 1) * dt
            state = StepperState(new, state.current, t_new, dt, m + 1)
            record(m + 1, t_new, new)
            event = _state_event(new, t_new, thresholds)
            if event is not None:
                break
        else:
            event = StopEvent(StopKind.REACHED_T, steps * dt, 0.0)
    return RunReport(
        scheme=scheme,
        node_count=node_count,
        dt=dt,
        t_end=t_end,
        event=event,
        final=state.current,
        records=records,
    )


def _drift(t: float) -> float:
    return 2.0 + math.sin(math.pi * t)


def _drift_rate(t: float) -> float:
    return math.pi * math.cos(math.pi * t)


def manufactured_solution() -> CurveFunction:
    """Unit circle drifting along the radial axis; the exact solution used
    by the convergence harness."""

    def value(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return np.stack([_drift(t) + np.cos(ang), np.sin(ang)], axis=-1)

    def derivative(rho, t=0.0):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        return TWO_PI * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)

    return CurveFunction(value, derivative)


def manufactured_forcing() -> SourceField:
    """Forcing that makes the drifting unit circle solve the flow exactly.

    Substituting the drifting circle into the strong form
    r |x_rho|^2 x_t - (r x_rho)_rho + |x_rho|^2 e_r = f
    gives this closed form; the finite difference check lives in the
    test suite.
    """

    def func(rho, t):
        ang = TWO_PI * np.asarray(rho, dtype=float)
        c = np.cos(ang)
        s = np.sin(ang)
        rad = _drift(t) + c
        gp = _drift_rate(t)
        f1 = FOUR_PI_SQ * (rad * gp + rad * c - s * s + 1.0)
        f2 = FOUR_PI_SQ * (s * c + rad * s)
        return np.stack([f1, f2], axis=-1)

    return SourceField(func)
