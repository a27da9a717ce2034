"""Isotropic self-gravitating equilibria and orbit-averaged transport.

The package builds compactly supported isotropic steady states of the
gravitational kinetic equations (Newtonian and static relativistic),
exposes the radial orbit geometry underneath them, and provides the
linearized transport operator together with its orbit-average
projection, a weighted phase-space inner product, and a verification
suite that checks the structural identities the construction promises.
"""

from .ansatz import NEWTONIAN_MAX_EXPONENT, AnsatzFunction
from .config import RunConfig, build_ansatz, build_state, load_config, parse_config
from .effective_potential import (
    TurningPointData,
    circular_orbit_radius,
    effective_potential,
    effective_potential_min,
    turning_points,
    turning_points_arrays,
)
from .errors import (
    ClosureError,
    ConfigError,
    DegenerateOrbitError,
    DomainError,
    HorizonFormationError,
    IntegrabilityError,
    MissingPartialsError,
    NonCompactSupportError,
    NumericalError,
    StepSizeError,
    UnboundOrbitError,
)
from .hilbert import (
    QuadratureSpec,
    inner_product,
    norm,
    phase_space_integral,
    support_box_norm,
)
from .orbits import (
    energy_drift_over_periods,
    flow,
    flow_map_area_defect,
    flow_points,
    orbit_trajectory,
    radial_period_from_orbit,
)
from .phase_functions import (
    PhaseFunction,
    SupportDescriptor,
    angular_momentum_coordinate,
    band_bump,
    bump_product,
    certified_bump,
    el_bump,
    energy_coordinate,
    offset_bump,
    smooth_bump,
)
from .projection import (
    PeriodRecord,
    ProjectionTable,
    admissible_grid,
    critical_angular_momentum,
    orbit_average_spatial,
    orbit_average_time,
    orbit_average_values,
    period_table,
    project_on_grid,
    projected_pairing,
    radial_period,
    radial_period_bound,
)
from .relativistic import (
    RelativisticSteadyState,
    apply_relativistic_transport,
    field_equation_residuals,
    relativistic_flow,
    relativistic_flow_norm_defect,
    relativistic_flow_points,
    relativistic_inner_product,
    relativistic_norm,
    relativistic_skew_defect,
    solve_relativistic_steady_state,
)
from .steady_state import (
    NewtonianSteadyState,
    PointMassState,
    poisson_residual,
    solve_steady_state,
)
from .transport import (
    KernelReport,
    apply_transport,
    flow_unitarity_defect,
    kernel_inequality,
    mass_identity,
    skew_symmetry_defect,
    support_margin_parameter,
    transport_of_energy_max,
)
from .verify import ClaimResult, VerifyReport, run_verification
from .version import __version__

__all__ = [
    "AnsatzFunction",
    "ClaimResult",
    "ClosureError",
    "ConfigError",
    "DegenerateOrbitError",
    "DomainError",
    "HorizonFormationError",
    "IntegrabilityError",
    "KernelReport",
    "MissingPartialsError",
    "NEWTONIAN_MAX_EXPONENT",
    "NewtonianSteadyState",
    "NonCompactSupportError",
    "NumericalError",
    "PeriodRecord",
    "PhaseFunction",
    "PointMassState",
    "ProjectionTable",
    "QuadratureSpec",
    "RelativisticSteadyState",
    "RunConfig",
    "StepSizeError",
    "SupportDescriptor",
    "TurningPointData",
    "UnboundOrbitError",
    "VerifyReport",
    "__version__",
    "admissible_grid",
    "angular_momentum_coordinate",
    "apply_relativistic_transport",
    "apply_transport",
    "band_bump",
    "build_ansatz",
    "build_state",
    "bump_product",
    "certified_bump",
    "circular_orbit_radius",
    "critical_angular_momentum",
    "effective_potential",
    "effective_potential_min",
    "el_bump",
    "energy_coordinate",
    "energy_drift_over_periods",
    "field_equation_residuals",
    "flow",
    "flow_map_area_defect",
    "flow_points",
    "flow_unitarity_defect",
    "inner_product",
    "kernel_inequality",
    "load_config",
    "mass_identity",
    "norm",
    "offset_bump",
    "orbit_average_spatial",
    "orbit_average_time",
    "orbit_average_values",
    "orbit_trajectory",
    "parse_config",
    "period_table",
    "phase_space_integral",
    "poisson_residual",
    "project_on_grid",
    "projected_pairing",
    "radial_period",
    "radial_period_bound",
    "radial_period_from_orbit",
    "relativistic_flow",
    "relativistic_flow_norm_defect",
    "relativistic_flow_points",
    "relativistic_inner_product",
    "relativistic_norm",
    "relativistic_skew_defect",
    "run_verification",
    "skew_symmetry_defect",
    "smooth_bump",
    "solve_relativistic_steady_state",
    "solve_steady_state",
    "support_box_norm",
    "support_margin_parameter",
    "transport_of_energy_max",
    "turning_points",
    "turning_points_arrays",
]
