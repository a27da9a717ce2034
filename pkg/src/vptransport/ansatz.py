"""Decreasing energy profiles that generate isotropic equilibria.

The profile phi determines the particle distribution f0 = phi(E).  Its
negative slope makes 1/|phi'(E)| a positive weight, which is what the
weighted inner products downstream integrate against.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

# Finite-mass Newtonian polytropes require an exponent below 7/2.
NEWTONIAN_MAX_EXPONENT = 3.5


@dataclass(frozen=True)
class AnsatzFunction:
    """Polytropic profile phi(E) = amplitude * (cutoff_energy - E)^k for
    E < cutoff_energy, zero above.

    A negative cutoff marks the Newtonian regime, a cutoff in (0, 1) the
    relativistic one (particle energies there include the rest mass).
    """

    k: float
    amplitude: float = 1.0
    cutoff_energy: float = -0.1
    kind: str = "polytrope"

    def __post_init__(self):
        if self.kind != "polytrope":
            raise DomainError(f"unsupported ansatz kind {self.kind!r}")
        if not self.k > 0:
            raise DomainError("polytropic exponent k must be positive")
        if not self.amplitude > 0:
            raise DomainError("ansatz amplitude must be positive")
        if self.cutoff_energy == 0:
            raise DomainError("cutoff energy must be nonzero")
        if self.newtonian:
            if self.k >= NEWTONIAN_MAX_EXPONENT:
                raise DomainError(
                    f"k = {self.k} has no steady state with finite support; "
                    f"need k < {NEWTONIAN_MAX_EXPONENT}"
                )
        elif not self.cutoff_energy < 1:
            raise DomainError("relativistic cutoff must lie in (0, 1)")

    @property
    def newtonian(self):
        return self.cutoff_energy < 0

    def with_cutoff(self, cutoff_energy):
        return replace(self, cutoff_energy=cutoff_energy)

    def phi(self, E):
        """Profile value; zero at and above the cutoff."""
        depth = np.maximum(self.cutoff_energy - np.asarray(E, dtype=float), 0.0)
        out = self.amplitude * depth**self.k
        return out if out.ndim else float(out)

    def phi_prime(self, E):
        """Slope of the profile, strictly negative below the cutoff."""
        depth = self.cutoff_energy - np.asarray(E, dtype=float)
        if np.any(depth <= 0):
            raise DomainError("phi' is only defined for E below the cutoff")
        out = -self.amplitude * self.k * depth ** (self.k - 1.0)
        return out if out.ndim else float(out)

    def weight(self, E):
        """Inverse slope magnitude 1/|phi'(E)|, the inner-product weight."""
        out = 1.0 / np.abs(self.phi_prime(E))
        return out if np.ndim(out) else float(out)
