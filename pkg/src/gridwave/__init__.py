"""Electromechanical wave propagation on transmission paths.

Power-system disturbances travel across a grid as waves of rotor-angle
deviation. This package models that propagation along a path of lines as a
one-dimensional continuum: steady-state power flow sets the stage, generator
inertia is spread over the lines by admittance, the fastest route between
two buses is found from per-line wave velocities, and a two-step
Lax-Wendroff solver advances the coupled angle/frequency fields with the
voltage profile modulating local wave speed.
"""

from .cases import (
    Bus,
    CaseError,
    CaseFormatError,
    DanglingReferenceError,
    Disturbance,
    Generator,
    Line,
    PowerCase,
    SchemaError,
    UnknownTargetError,
    ValidationReport,
    Violation,
    apply_disturbance,
    parse_case_json,
    parse_matpower,
    parse_scenario_json,
    serialize_case,
    validate_case,
)
from .powerflow import (
    AdmittanceMatrix,
    ConvergenceError,
    PhasedSolutions,
    PowerFlowSolution,
    SingularJacobianError,
    build_ybus,
    line_flow,
    solve_power_flow,
)
from .inertia import (
    GeneratorlessComponentError,
    InertiaMap,
    distribute_inertia,
    line_density,
)
from .pathfind import (
    EmwPath,
    UnreachableBusError,
    line_emw_velocity,
    path_travel_time,
    shortest_emw_path,
)
from .continuum import (
    ContinuumGrid,
    FieldState,
    discretize_path,
    initial_conditions,
    power_deviation_lossless,
    power_deviation_lossy,
    solve_voltage_profile,
)
from .solver import (
    BoundaryValues,
    InstabilityError,
    SolverConfig,
    WaveField,
    cfl_timestep,
    lw_linear_step,
    richtmyer_step,
    simulate,
    step_emw,
)
from .analysis import (
    amplitude_profile,
    compare_models,
    detect_arrival_times,
    estimate_velocity,
)

__version__ = "0.1.0"

__all__ = [
    "AdmittanceMatrix",
    "BoundaryValues",
    "Bus",
    "CaseError",
    "CaseFormatError",
    "ContinuumGrid",
    "ConvergenceError",
    "DanglingReferenceError",
    "Disturbance",
    "EmwPath",
    "FieldState",
    "Generator",
    "GeneratorlessComponentError",
    "InertiaMap",
    "InstabilityError",
    "Line",
    "PhasedSolutions",
    "PowerCase",
    "PowerFlowSolution",
    "SchemaError",
    "SingularJacobianError",
    "SolverConfig",
    "UnknownTargetError",
    "UnreachableBusError",
    "ValidationReport",
    "Violation",
    "WaveField",
    "amplitude_profile",
    "apply_disturbance",
    "build_ybus",
    "cfl_timestep",
    "compare_models",
    "detect_arrival_times",
    "discretize_path",
    "distribute_inertia",
    "estimate_velocity",
    "initial_conditions",
    "line_density",
    "line_emw_velocity",
    "line_flow",
    "lw_linear_step",
    "parse_case_json",
    "parse_matpower",
    "parse_scenario_json",
    "path_travel_time",
    "power_deviation_lossless",
    "power_deviation_lossy",
    "richtmyer_step",
    "serialize_case",
    "shortest_emw_path",
    "simulate",
    "solve_power_flow",
    "solve_voltage_profile",
    "step_emw",
    "validate_case",
]
