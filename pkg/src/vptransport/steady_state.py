"""Self-consistent Newtonian equilibria and the point-mass stand-in.

The radial potential solve works in the relative depth y = E0 - U0, for
which the source is cutoff-independent:

    (r^2 y')' = -4 pi r^2 rho(y),   y(0) = y_center,  y'(0) = 0,

with rho(y) = c_k y^(k+3/2) for the polytropic profile.  The first root of
y is the surface R, the enclosed mass is M0 = R^2 |y'(R)|, and the cutoff
consistent with the vacuum exterior is E0 = -M0/R.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .ansatz import AnsatzFunction
from .errors import DomainError, NonCompactSupportError, StepSizeError
from .numerics import centered_derivative, ppoly_scalar


def density_coefficient(a):
    """c_k with rho(y) = c_k y^(k + 3/2): the angular and speed integrals of
    the profile reduce to a Beta function, 4 pi sqrt(2) c B(3/2, k+1)."""
    k = a.k
    return (
        4.0 * math.pi * math.sqrt(2.0) * a.amplitude
        * math.gamma(k + 1.0) * math.gamma(1.5) / math.gamma(k + 2.5)
    )


def rho_from_relative_potential(a, y):
    """Spatial density induced by the profile at relative depth y >= 0."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise DomainError("relative potential depth must be nonnegative")
    out = density_coefficient(a) * y_arr ** (a.k + 1.5)
    return out if out.ndim else float(out)


@dataclass
class NewtonianSteadyState:
    """Sampled equilibrium: potential, enclosed mass and density on a uniform
    radial grid, monotone-cubic interpolation inside, -M0/r outside."""

    ansatz: AnsatzFunction
    r_grid: np.ndarray
    u_grid: np.ndarray
    m_grid: np.ndarray
    rho_grid: np.ndarray
    R: float
    M0: float
    E0: float
    interpolation: str = "pchip"
    _u: PchipInterpolator = field(init=False, repr=False)
    _m: PchipInterpolator = field(init=False, repr=False)
    _rho: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        self._u = PchipInterpolator(self.r_grid, self.u_grid, extrapolate=False)
        self._m = PchipInterpolator(self.r_grid, self.m_grid, extrapolate=False)
        self._rho = PchipInterpolator(self.r_grid, self.rho_grid, extrapolate=False)

    @property
    def support_radius(self):
        """Largest radius with E0 - U0(r) > 0; here the stellar surface."""
        return self.R

    def potential(self, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("radius must be nonnegative")
        inside = r_arr <= self.R
        out = np.where(
            inside,
            self._u(np.clip(r_arr, 0.0, self.R)),
            -self.M0 / np.maximum(r_arr, self.R),
        )
        return out if out.ndim else float(out)

    def mass_within(self, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("radius must be nonnegative")
        out = np.where(
            r_arr <= self.R,
            np.clip(self._m(np.clip(r_arr, 0.0, self.R)), 0.0, self.M0),
            self.M0,
        )
        return out if out.ndim else float(out)

    def density(self, r):
        r_arr = np.asarray(r, dtype=float)
        out = np.where(
            r_arr <= self.R,
            np.maximum(self._rho(np.clip(r_arr, 0.0, self.R)), 0.0),
            0.0,
        )
        return out if out.ndim else float(out)

    def relative_depth(self, r):
        """y(r) = E0 - U0(r), positive exactly inside the support."""
        return self.E0 - self.potential(r)

    def mass_scalar(self, r):
        """Scalar fast path for sequential orbit loops."""
        if r >= self.R:
            return self.M0
        m = ppoly_scalar(self._m.x, self._m.c, r)
        if m < 0.0:
            return 0.0
        return self.M0 if m > self.M0 else m


@dataclass
class PointMassState:
    """All mass at the origin: U0 = -M0/r, m0 = M0, rho = 0.

    Not a self-consistent equilibrium, but every orbit quantity has a
    closed form, which makes it the sharp oracle for the orbit machinery.
    """

    M0: float = 1.0
    E0: float = -0.1
    ansatz: AnsatzFunction | None = None

    def __post_init__(self):
        if not self.M0 > 0:
            raise DomainError("point mass must be positive")
        if not self.E0 < 0:
            raise DomainError("point-mass cutoff must be negative")
        if self.ansatz is None:
            self.ansatz = AnsatzFunction(k=1.0, amplitude=1.0, cutoff_energy=self.E0)

    @property
    def support_radius(self):
        return -self.M0 / self.E0

    def potential(self, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("radius must be nonnegative")
        with np.errstate(divide="ignore"):
            out = np.where(r_arr > 0, -self.M0 / np.maximum(r_arr, 1e-300), -np.inf)
        return out if out.ndim else float(out)

    def mass_within(self, r):
        out = np.full(np.shape(r), self.M0)
        return out if out.ndim else float(self.M0)

    def density(self, r):
        out = np.zeros(np.shape(r))
        return out if out.ndim else 0.0

    def relative_depth(self, r):
        return self.E0 - self.potential(r)

    def mass_scalar(self, r):
        return self.M0


def _sample_solution(sol, r, r_start, y_center, rho_center):
    """Dense-output samples of (y, z = r^2 y'); series below the start radius."""
    r = np.asarray(r, dtype=float)
    y = np.empty_like(r)
    z = np.empty_like(r)
    small = r < r_start
    if np.any(small):
        rs = r[small]
        y[small] = y_center - (2.0 * math.pi / 3.0) * rho_center * rs**2
        z[small] = -(4.0 * math.pi / 3.0) * rho_center * rs**3
    if np.any(~small):
        vals = sol.sol(r[~small])
        y[~small] = vals[0]
        z[~small] = vals[1]
    return y, z


def solve_steady_state(
    ansatz,
    y_center=1.0,
    *,
    match_cutoff=False,
    n_grid=2001,
    rtol=1e-12,
    atol=1e-14,
    max_step=None,
    r_max_factor=1e4,
):
    """Construct the equilibrium generated by a Newtonian polytropic profile.

    Parameters
    ----------
    ansatz : AnsatzFunction
        Newtonian profile (negative cutoff).  The nominal cutoff is replaced
        by the self-consistent value -M0/R unless match_cutoff is set.
    y_center : float
        Central relative depth y(0) > 0.
    match_cutoff : bool
        Rescale the solution (amplitude-preserving scaling symmetry) so the
        reported cutoff equals ansatz.cutoff_energy instead of -M0/R.
    n_grid : int
        Number of uniform radial samples stored on [0, R].
    max_step : float or None
        Cap on the ODE step; defaults to a tenth of the central length scale.
        Halving it is the knob for grid-refinement convergence checks.
    """
    if not ansatz.newtonian:
        raise DomainError("steady-state solve requires a Newtonian ansatz")
    if not y_center > 0:
        raise DomainError("central depth y_center must be positive")
    if n_grid < 16:
        raise DomainError("n_grid too small to resolve the profile")

    coeff = density_coefficient(ansatz)
    expo = ansatz.k + 1.5
    rho_center = coeff * y_center**expo
    scale = math.sqrt(y_center / (4.0 * math.pi * rho_center))
    if max_step is None:
        max_step = 0.1 * scale

    def rhs(r, state):
        y, z = state
        rho = coeff * max(y, 0.0) ** expo
        return (z / r**2, -4.0 * math.pi * r**2 * rho)

    def surface(r, state):
        return state[0]

    surface.terminal = True
    surface.direction = -1

    r_start = 1e-8 * scale
    y0 = y_center - (2.0 * math.pi / 3.0) * rho_center * r_start**2
    z0 = -(4.0 * math.pi / 3.0) * rho_center * r_start**3
    sol = solve_ivp(
        rhs,
        (r_start, r_max_factor * scale),
        (y0, z0),
        method="DOP853",
        dense_output=True,
        events=surface,
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )
    if sol.status == -1:
        raise StepSizeError(f"radial integration failed: {sol.message}")
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NonCompactSupportError(
            "no surface found within the search radius; profile too shallow"
        )

    R_raw = float(sol.t_events[0][0])
    y_R, z_R = sol.sol(R_raw)
    M_raw = -float(z_R)
    if not (M_raw > 0 and math.isfinite(M_raw)):
        raise StepSizeError("surface found but enclosed mass is not positive")
    if abs(y_R) > 1e-9 * y_center:
        raise StepSizeError("surface event poorly localized")

    cutoff_natural = -M_raw / R_raw
    if match_cutoff:
        target = ansatz.cutoff_energy
        amp_scale = target / cutoff_natural  # > 0: both cutoffs negative
        len_scale = amp_scale ** ((2.0 * ansatz.k + 1.0) / 4.0)
    else:
        amp_scale = 1.0
        len_scale = 1.0

    R = R_raw / len_scale
    M0 = (amp_scale / len_scale) * M_raw
    E0 = amp_scale * cutoff_natural  # == -M0/R in either branch

    r = np.linspace(0.0, R, n_grid)
    y, z = _sample_solution(sol, len_scale * r, r_start, y_center, rho_center)
    y = amp_scale * y
    m = -(amp_scale / len_scale) * z
    y[0] = amp_scale * y_center
    m[0] = 0.0
    y[-1] = 0.0
    m[-1] = M0

    u = E0 - y
    # Analytically U0(r) >= -M0/r with a margin that vanishes like
    # (R - r)^(k + 7/2) at the surface; solver noise (~1e-13) can cross it
    # there, so snap the samples onto the bound.  A float-level correction.
    u[1:] = np.maximum(u[1:], -M0 / r[1:])
    rho = coeff * np.maximum(y, 0.0) ** expo

    state = NewtonianSteadyState(
        ansatz=ansatz.with_cutoff(E0),
        r_grid=r,
        u_grid=u,
        m_grid=m,
        rho_grid=rho,
        R=R,
        M0=M0,
        E0=E0,
    )
    return state


def poisson_residual(state):
    """Max interior residual |(r^2 U0')' - 4 pi r^2 rho| / max rho on the
    stored grid, by fourth-order finite differences of the potential table."""
    r = state.r_grid
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-12):
        raise DomainError("residual stencil requires the uniform sample grid")
    du = centered_derivative(state.u_grid, h)        # indices 2..n-3
    flux = r[2:-2] ** 2 * du
    dflux = centered_derivative(flux, h)             # indices 4..n-5
    rr = r[4:-4]
    res = np.abs(dflux - 4.0 * math.pi * rr**2 * state.rho_grid[4:-4])
    return float(np.max(res) / np.max(state.rho_grid))
