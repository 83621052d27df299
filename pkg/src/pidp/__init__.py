"""Numerical toolkit for the planar inverted double pendulum on a cart.

Dynamics and energies, the scaled vector-field family X1..X4 with Lie
brackets, the Lie-algebra rank condition with stratum classification,
RK4 simulation with energy diagnostics, recurrence and reachable-cloud
experiments, and a reproducible command-line interface.
"""

__version__ = "1.0.0"

from pidp.dynamics import (
    AdmissibleParams,
    EnergyBreakdown,
    Params,
    control_h,
    delta,
    drift_f,
    energies,
    hamiltonian,
    hamiltonian_from_momenta,
    mass_matrix,
    momenta,
    params_from_json,
    rhs,
    validate_params,
    velocities,
    wrap_angle,
    wrap_state,
)
from pidp.liealg import (
    BracketWord,
    VectorField,
    evaluate_word,
    jacobian_fd,
    lie_bracket,
    notation_components,
    scaled_family,
)
from pidp.rank import (
    RankReport,
    Stratum,
    SweepReport,
    SweepSpec,
    bracket_generating_verdict,
    classify_stratum,
    escape_test,
    lie_rank,
    sweep,
)
from pidp.sim import (
    Cloud,
    ControlSchedule,
    RecurrenceReport,
    Trajectory,
    cloud_compare,
    cloud_sample,
    compose_flows,
    energy_drift,
    flow,
    integrate,
    recurrence_experiment,
)

__all__ = [
    "AdmissibleParams",
    "BracketWord",
    "Cloud",
    "ControlSchedule",
    "EnergyBreakdown",
    "Params",
    "RankReport",
    "RecurrenceReport",
    "Stratum",
    "SweepReport",
    "SweepSpec",
    "Trajectory",
    "VectorField",
    "__version__",
    "bracket_generating_verdict",
    "classify_stratum",
    "cloud_compare",
    "cloud_sample",
    "compose_flows",
    "control_h",
    "delta",
    "drift_f",
    "energies",
    "energy_drift",
    "escape_test",
    "evaluate_word",
    "flow",
    "hamiltonian",
    "hamiltonian_from_momenta",
    "integrate",
    "jacobian_fd",
    "lie_bracket",
    "lie_rank",
    "mass_matrix",
    "momenta",
    "notation_components",
    "params_from_json",
    "recurrence_experiment",
    "rhs",
    "scaled_family",
    "sweep",
    "validate_params",
    "velocities",
    "wrap_angle",
    "wrap_state",
]
