"""Error taxonomy shared across the package."""


class NumericalError(Exception):
    """Base class for failures of the numerical machinery."""


class DomainError(NumericalError, ValueError):
    """Input outside the mathematical domain of an operation."""


class UnboundOrbitError(DomainError):
    """Requested orbit has E >= 0 and is not radially bound."""


class DegenerateOrbitError(DomainError):
    """Requested orbit has E <= min psi_L: no radial oscillation exists."""


class NonCompactSupportError(NumericalError):
    """Steady-state solve ran past the search radius without finding a surface."""


class StepSizeError(NumericalError):
    """ODE integration failed (step-size underflow or invalid state reached)."""


class IntegrabilityError(NumericalError):
    """Weighted integral is divergent for the given arguments."""


class MissingPartialsError(NumericalError):
    """Phase-space function lacks the analytic partials an operation needs."""


class ClosureError(NumericalError):
    """Cutoff-consistency iteration of the relativistic solve did not converge."""


class HorizonFormationError(NumericalError):
    """Metric solve approached 2m(r)/r -> 1; no static solution on this branch."""


class ConfigError(ValueError):
    """Run configuration file is malformed or violates a validation rule."""
