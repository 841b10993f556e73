"""Finite element evolution of axisymmetric torus-type surfaces via their
generating curves."""

__version__ = "0.1.0"

from .assembly import (
    CyclicTridiagonal,
    radial_direction_load,
    source_load,
    weighted_mass_matrix,
    weighted_stiffness_matrix,
)
from .curves import (
    CurveFunction,
    InadmissibleCurveError,
    PeriodicCurve,
    ellipse_curve,
    interpolate,
    rose_curve,
    spiral_curve,
    torus_circle,
)
from .cyclic_solver import SolveReport, SolveStatus, solve_cyclic
from .diagnostics import (
    ErrorRecord,
    diameter,
    h1_seminorm_error,
    l2_error,
    mesh_ratio,
    min_radial,
    superconvergence_error,
)
from .experiments import (
    BisectionResult,
    ConvergenceRow,
    ConvergenceStudy,
    ScenarioResult,
    Snapshot,
    bisect_critical_radius,
    classify_radius,
    run_convergence,
    run_scenario,
    scenario_curve,
)
from .stepping import (
    EventThresholds,
    RunReport,
    SchemeKind,
    SourceField,
    StepFailure,
    StepperState,
    StopEvent,
    StopKind,
    bdf1_step,
    bdf2_step,
    cn_step,
    manufactured_forcing,
    manufactured_solution,
    run,
)

__all__ = [
    "__version__",
    "CyclicTridiagonal",
    "radial_direction_load",
    "source_load",
    "weighted_mass_matrix",
    "weighted_stiffness_matrix",
    "CurveFunction",
    "InadmissibleCurveError",
    "PeriodicCurve",
    "ellipse_curve",
    "interpolate",
    "rose_curve",
    "spiral_curve",
    "torus_circle",
    "SolveReport",
    "SolveStatus",
    "solve_cyclic",
    "ErrorRecord",
    "diameter",
    "h1_seminorm_error",
    "l2_error",
    "mesh_ratio",
    "min_radial",
    "superconvergence_error",
    "BisectionResult",
    "ConvergenceRow",
    "ConvergenceStudy",
    "ScenarioResult",
    "Snapshot",
    "bisect_critical_radius",
    "classify_radius",
    "run_convergence",
    "run_scenario",
    "scenario_curve",
    "EventThresholds",
    "RunReport",
    "SchemeKind",
    "SourceField",
    "StepFailure",
    "StepperState",
    "StopEvent",
    "StopKind",
    "bdf1_step",
    "bdf2_step",
    "cn_step",
    "manufactured_forcing",
    "manufactured_solution",
    "run",
]
