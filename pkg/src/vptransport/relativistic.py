"""Static spherically symmetric relativistic equilibria (units G = c = 1).

The metric is ds^2 = -e^(2 mu) dt^2 + e^(2 lam) dr^2 + r^2 dOmega^2 and
the particle energy E = e^(mu) sqrt(1 + w^2 + L/r^2) includes the rest
mass, so cutoffs live in (0, 1).  The field solve works in the depth
q = ln E0 - mu, the relativistic counterpart of y = E0 - U0:

    m' = 4 pi r^2 rho(q),
    q' = -(m/r^2 + 4 pi r p(q)) / (1 - 2m/r),

with rho and p momentum integrals of the profile.  The surface R is the
first root of q, and the matching condition to the Schwarzschild
exterior, mu(R) = ln E0, closes the system; the central depth that
satisfies it is found by a guarded secant iteration.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .ansatz import AnsatzFunction
from .errors import (
    ClosureError,
    DomainError,
    HorizonFormationError,
    IntegrabilityError,
    NonCompactSupportError,
    StepSizeError,
)
from .numerics import centered_derivative, gauss_nodes


def momentum_integrals(ansatz, q, n_u=64):
    """Density and pressure of the profile at depth q >= 0.

    rho = 4 pi int u^2 sqrt(1+u^2) phi(E) du,
    p = (4 pi / 3) int u^4 / sqrt(1+u^2) phi(E) du,

    over u in (0, u_max), u_max^2 = e^(2q) - 1, with the substitution
    u = u_max sin(theta) clustering nodes where phi vanishes.  Vectorized
    over q; p <= rho pointwise since u^4/sqrt(1+u^2) <= 3 u^2 sqrt(1+u^2).
    """
    E0 = ansatz.cutoff_energy
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    u_max = np.sqrt(np.expm1(2.0 * np.maximum(q_arr, 0.0)))
    theta, wq = gauss_nodes(n_u, 0.0, 0.5 * math.pi)
    s, c = np.sin(theta), np.cos(theta)
    u = u_max[..., None] * s
    du = u_max[..., None] * c
    root = np.sqrt(1.0 + u * u)
    phi = ansatz.phi(E0 * np.exp(-q_arr)[..., None] * root)
    rho = 4.0 * math.pi * np.sum(wq * u**2 * root * phi * du, axis=-1)
    p = (4.0 * math.pi / 3.0) * np.sum(wq * u**4 / root * phi * du, axis=-1)
    if np.ndim(q) == 0:
        return float(rho[0]), float(p[0])
    return rho, p


@dataclass
class RelativisticSteadyState:
    """Sampled relativistic equilibrium on a uniform radial grid.

    The depth q and enclosed mass m are interpolated monotone-cubically;
    everything metric is derived from them, so e^(-2 lam) = 1 - 2m/r and
    mu = ln E0 - q hold on the grid by construction.
    """

    ansatz: AnsatzFunction
    r_grid: np.ndarray
    q_grid: np.ndarray
    m_grid: np.ndarray
    rho_grid: np.ndarray
    p_grid: np.ndarray
    R: float
    M0: float
    E0: float
    _q: PchipInterpolator = field(init=False, repr=False)
    _m: PchipInterpolator = field(init=False, repr=False)
    _rho: PchipInterpolator = field(init=False, repr=False)
    _p: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        self._q = PchipInterpolator(self.r_grid, self.q_grid, extrapolate=False)
        self._m = PchipInterpolator(self.r_grid, self.m_grid, extrapolate=False)
        self._rho = PchipInterpolator(self.r_grid, self.rho_grid, extrapolate=False)
        self._p = PchipInterpolator(self.r_grid, self.p_grid, extrapolate=False)

    @property
    def support_radius(self):
        return self.R

    def depth(self, r):
        """q(r) = ln E0 - mu(r); positive exactly inside the support."""
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("radius must be nonnegative")
        inside = r_arr <= self.R
        exterior = math.log(self.E0) - 0.5 * np.log1p(
            -2.0 * self.M0 / np.maximum(r_arr, self.R)
        )
        out = np.where(inside, self._q(np.clip(r_arr, 0.0, self.R)), exterior)
        return out if out.ndim else float(out)

    def mu(self, r):
        """Time metric exponent; ln E0 at the surface, Schwarzschild outside."""
        out = math.log(self.E0) - np.asarray(self.depth(r))
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

    def lam(self, r):
        """Radial metric exponent, -log(1 - 2m/r)/2; zero at the center."""
        r_arr = np.asarray(r, dtype=float)
        m = np.asarray(self.mass_within(r_arr))
        out = np.where(
            r_arr > 0,
            -0.5 * np.log1p(-2.0 * m / np.maximum(r_arr, 1e-300)),
            0.0,
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

    def pressure(self, r):
        r_arr = np.asarray(r, dtype=float)
        out = np.where(
            r_arr <= self.R,
            np.maximum(self._p(np.clip(r_arr, 0.0, self.R)), 0.0),
            0.0,
        )
        return out if out.ndim else float(out)

    def mu_prime(self, r):
        """mu' from the field equation, valid through the surface since the
        pressure vanishes there."""
        r_arr = np.asarray(r, dtype=float)
        m = np.asarray(self.mass_within(r_arr))
        p = np.asarray(self.pressure(r_arr))
        r_safe = np.maximum(r_arr, 1e-300)
        grr = 1.0 - 2.0 * m / r_safe
        out = np.where(
            r_arr > 0,
            (m / r_safe**2 + 4.0 * math.pi * r_arr * p) / grr,
            0.0,
        )
        return out if out.ndim else float(out)

    def energy(self, r, w, L):
        """Conserved particle energy e^mu sqrt(1 + w^2 + L/r^2)."""
        Q = np.sqrt(1.0 + np.asarray(w, dtype=float) ** 2 + np.asarray(L, dtype=float) / np.asarray(r, dtype=float) ** 2)
        out = np.exp(self.mu(r)) * Q
        return out if np.ndim(out) else float(out)

    def energy_partials(self, r, w, L):
        """(dE/dr, dE/dw) at fixed L."""
        r_arr = np.asarray(r, dtype=float)
        w_arr = np.asarray(w, dtype=float)
        L_arr = np.asarray(L, dtype=float)
        Q = np.sqrt(1.0 + w_arr**2 + L_arr / r_arr**2)
        emu = np.exp(self.mu(r_arr))
        dE_dr = emu * (self.mu_prime(r_arr) * Q - L_arr / (r_arr**3 * Q))
        dE_dw = emu * w_arr / Q
        if np.ndim(dE_dr):
            return dE_dr, dE_dw
        return float(dE_dr), float(dE_dw)


def _sample_depth(sol, r, r_start, q_center, rho_center, p_center):
    """Dense-output samples of (m, q); quadratic/cubic series below r_start."""
    r = np.asarray(r, dtype=float)
    m = np.empty_like(r)
    q = np.empty_like(r)
    small = r < r_start
    if np.any(small):
        rs = r[small]
        m[small] = (4.0 * math.pi / 3.0) * rho_center * rs**3
        q[small] = q_center - 2.0 * math.pi * (rho_center / 3.0 + p_center) * rs**2
    if np.any(~small):
        vals = sol.sol(r[~small])
        m[~small] = vals[0]
        q[~small] = vals[1]
    return m, q


def _integrate_depth(ansatz, q_center, *, rtol, atol, r_max_factor, n_u):
    """One outward integration at fixed central depth.

    Returns (R, M, sol, r_start, rho_c, p_c); raises HorizonFormationError
    if 2m/r approaches 1 before the surface.
    """
    rho_c, p_c = momentum_integrals(ansatz, q_center, n_u=n_u)
    if not rho_c > 0:
        raise DomainError("central depth gives an empty momentum ball")
    scale = math.sqrt(q_center / (4.0 * math.pi * rho_c))

    def rhs(r, state):
        m, q = state
        rho, p = momentum_integrals(ansatz, max(q, 0.0), n_u=n_u)
        grr = 1.0 - 2.0 * m / r
        return (
            4.0 * math.pi * r**2 * rho,
            -(m / r**2 + 4.0 * math.pi * r * p) / grr,
        )

    def surface(r, state):
        return state[1]

    surface.terminal = True
    surface.direction = -1

    def horizon(r, state):
        return 1.0 - 2.0 * state[0] / r - 1e-3

    horizon.terminal = True
    horizon.direction = -1

    r_start = 1e-8 * scale
    m0 = (4.0 * math.pi / 3.0) * rho_c * r_start**3
    q0 = q_center - 2.0 * math.pi * (rho_c / 3.0 + p_c) * r_start**2
    sol = solve_ivp(
        rhs,
        (r_start, r_max_factor * scale),
        (m0, q0),
        method="DOP853",
        dense_output=True,
        events=(surface, horizon),
        rtol=rtol,
        atol=atol,
        max_step=0.1 * scale,
    )
    if sol.status == -1:
        raise StepSizeError(f"field integration failed: {sol.message}")
    if len(sol.t_events[1]) > 0:
        raise HorizonFormationError(
            f"2m/r reached 1 - 1e-3 at r = {sol.t_events[1][0]:.6g}; "
            "no static solution at this central depth"
        )
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NonCompactSupportError(
            "no surface found within the search radius; profile too shallow"
        )
    R = float(sol.t_events[0][0])
    M = float(sol.sol(R)[0])
    if not (0.0 < 2.0 * M / R < 1.0):
        raise HorizonFormationError("compactness left (0, 1) at the surface")
    return R, M, sol, r_start, rho_c, p_c


def solve_relativistic_steady_state(
    ansatz,
    *,
    q_center_guess=None,
    n_grid=2001,
    closure_tol=1e-10,
    max_iter=100,
    rtol=1e-12,
    atol=1e-14,
    r_max_factor=1e4,
    n_u=64,
):
    """Construct the relativistic equilibrium for a cutoff in (0, 1).

    Unlike the Newtonian problem there is no scaling freedom: the cutoff
    fixes the central depth through the matching condition

        g(q_c) = log(1 - 2M/R)/2 - ln E0 = 0,

    solved by a secant iteration with damped first step and positivity
    guards.  ClosureError after max_iter unconverged solves.
    """
    if ansatz.newtonian:
        raise DomainError("relativistic solve requires a cutoff in (0, 1)")
    E0 = ansatz.cutoff_energy
    ln_e0 = math.log(E0)

    q_c = q_center_guess if q_center_guess is not None else max(-2.5 * ln_e0, 1e-4)
    if not q_c > 0:
        raise DomainError("central depth guess must be positive")

    q_prev = g_prev = g_first = None
    best = math.inf
    stale = 0
    bracketed = False
    for _ in range(max_iter):
        R, M, sol, r_start, rho_c, p_c = _integrate_depth(
            ansatz, q_c, rtol=rtol, atol=atol, r_max_factor=r_max_factor, n_u=n_u
        )
        g = 0.5 * math.log1p(-2.0 * M / R) - ln_e0
        if abs(g) < closure_tol:
            break
        if g_first is None:
            g_first = g
        bracketed = bracketed or (g > 0) != (g_first > 0)
        if abs(g) < 0.9 * best:
            best = abs(g)
            stale = 0
        else:
            stale += 1
        if stale >= 12 and not bracketed:
            # g keeps one sign and has stopped shrinking: the requested
            # compactness lies above the whole one-parameter family
            raise ClosureError(
                f"matching stalled at g = {g:.3e} with no sign change; "
                "no central depth reaches this cutoff"
            )
        if q_prev is not None and g != g_prev:
            step = -g * (q_c - q_prev) / (g - g_prev)
        else:
            step = 0.8 * g
        q_prev, g_prev = q_c, g
        q_next = q_c + step
        if not math.isfinite(q_next):
            q_next = 0.5 * q_c
        q_c = min(max(q_next, 0.3 * q_c), 3.0 * q_c)
    else:
        raise ClosureError(
            f"matching iteration did not reach |g| < {closure_tol:g} "
            f"in {max_iter} solves (last g = {g:.3e})"
        )

    r = np.linspace(0.0, R, n_grid)
    m, q = _sample_depth(sol, r, r_start, q_c, rho_c, p_c)
    m[0], q[0] = 0.0, q_c
    m[-1], q[-1] = M, 0.0
    q = np.maximum(q, 0.0)
    rho, p = momentum_integrals(ansatz, q, n_u=n_u)
    rho[-1] = p[-1] = 0.0

    return RelativisticSteadyState(
        ansatz=ansatz,
        r_grid=r,
        q_grid=q,
        m_grid=m,
        rho_grid=rho,
        p_grid=p,
        R=R,
        M0=M,
        E0=E0,
    )


def field_equation_residuals(state):
    """Fourth-order finite-difference residuals of both field equations on
    the stored grid, relative to the source scale max(8 pi r^2 rho).

        e^(-2 lam) (2 r lam' - 1) + 1 = 8 pi r^2 rho
        e^(-2 lam) (2 r mu' + 1) - 1 = 8 pi r^2 p
    """
    r = state.r_grid
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-12):
        raise DomainError("residual stencil requires the uniform sample grid")
    with np.errstate(divide="ignore"):
        grr = 1.0 - 2.0 * state.m_grid / np.maximum(r, 1e-300)
    grr[0] = 1.0
    lam = -0.5 * np.log(grr)
    mu = math.log(state.E0) - state.q_grid

    rr = r[2:-2]
    scale = float(np.max(8.0 * math.pi * r**2 * state.rho_grid))

    dlam = centered_derivative(lam, h)
    res_density = (
        grr[2:-2] * (2.0 * rr * dlam - 1.0)
        + 1.0
        - 8.0 * math.pi * rr**2 * state.rho_grid[2:-2]
    )
    dmu = centered_derivative(mu, h)
    res_pressure = (
        grr[2:-2] * (2.0 * rr * dmu + 1.0)
        - 1.0
        - 8.0 * math.pi * rr**2 * state.p_grid[2:-2]
    )
    return {
        "density_equation": float(np.max(np.abs(res_density)) / scale),
        "pressure_equation": float(np.max(np.abs(res_pressure)) / scale),
    }


def relativistic_region_nodes(state, spec=None, l_window=None):
    """Tensor Gauss-Legendre nodes over the bound region E < E0.

    Section limits follow from E = e^mu sqrt(1 + w^2 + L/r^2) < E0:
    L < r^2 (e^(2q) - 1) at w = 0, then w^2 < e^(2q) - 1 - L/r^2.  The
    returned weights include the 4 pi^2 factor and the e^lam volume
    element of the radial metric.

    With l_window the angular-momentum nodes concentrate on that band,
    clipped under the section bound per radius; radii whose section misses
    the band keep zero-weight placeholder nodes.  Integrands supported in
    the band lose nothing and gain resolution.
    """
    from .hilbert import QuadratureSpec

    spec = spec or QuadratureSpec()
    R = state.support_radius
    r, wr = gauss_nodes(spec.n_r, 0.0, R)
    q = np.asarray(state.depth(r))
    ball = np.maximum(np.expm1(2.0 * q), 0.0)

    l_max = r**2 * ball
    if l_window is not None:
        l_lo = np.minimum(l_window[0], 0.999 * l_max)
        l_hi = np.minimum(l_window[1], 0.999 * l_max)
        L, wl = gauss_nodes(spec.n_l, l_lo, l_hi)
    else:
        L, wl = gauss_nodes(spec.n_l, 0.0, l_max)

    gap = np.maximum(ball[:, None] - L / r[:, None] ** 2, 0.0)
    w_max = np.sqrt(gap)
    w, ww = gauss_nodes(spec.n_w, -w_max, w_max)

    elam = np.exp(np.asarray(state.lam(r)))
    wt = (
        4.0 * math.pi**2
        * (wr * elam)[:, None, None]
        * wl[:, :, None]
        * ww
    )
    r_full = np.broadcast_to(r[:, None, None], w.shape)
    L_full = np.broadcast_to(L[:, :, None], w.shape)
    return r_full.ravel(), w.ravel(), L_full.ravel(), wt.ravel()


def relativistic_inner_product(state, f, g, spec=None):
    """<f, g> = 4 pi^2 iiint e^lam f g / |phi'(E)| dr dw dL over {E < E0}."""
    from .hilbert import _needs_certificate

    _needs_certificate(state, f, g)
    r, w, L, wt = relativistic_region_nodes(state, spec)
    E = state.energy(r, w, L)
    E_safe = np.minimum(E, state.E0 * (1.0 - 1e-14))
    weight = state.ansatz.weight(E_safe)
    fv = f(r, w, L) if callable(f) else f.value(r, w, L)
    gv = g(r, w, L) if callable(g) else g.value(r, w, L)
    return float(np.sum(wt * fv * gv * weight))


def relativistic_norm(state, f, spec=None):
    return math.sqrt(max(relativistic_inner_product(state, f, f, spec=spec), 0.0))


def apply_relativistic_transport(state, f):
    """T f = e^(-lam) (dE/dw d_r f - dE/dr d_w f)."""
    from .errors import MissingPartialsError
    from .phase_functions import PhaseFunction

    if f.d_r is None or f.d_w is None:
        raise MissingPartialsError(
            f"transport needs both tracked partials; {f.label or 'function'!r} lacks them"
        )

    def value(r, w, L):
        dE_dr, dE_dw = state.energy_partials(r, w, L)
        elam = np.exp(-np.asarray(state.lam(r)))
        return elam * (dE_dw * f.d_r(r, w, L) - dE_dr * f.d_w(r, w, L))

    return PhaseFunction(value=value, support=f.support, label=f"T[{f.label}]", box=f.box)


def relativistic_skew_defect(state, f, g, spec=None):
    """|<f, T g> + <T f, g>| / (||f|| ||g||) in the weighted product."""
    Tf = apply_relativistic_transport(state, f)
    Tg = apply_relativistic_transport(state, g)
    raw = relativistic_inner_product(state, f, Tg, spec=spec)
    raw += relativistic_inner_product(state, Tf, g, spec=spec)
    scale = relativistic_norm(state, f, spec=spec) * relativistic_norm(state, g, spec=spec)
    return abs(raw) / scale


def relativistic_flow_points(state, r, w, L, t, h):
    """Characteristic flow by classical RK4 with a fixed step.

        dr/dt = e^(-lam) dE/dw,   dw/dt = -e^(-lam) dE/dr.

    Vectorized over phase points; L is constant along each characteristic.
    """
    if h <= 0:
        raise DomainError("step size must be positive")
    r = np.array(r, dtype=float, copy=True)
    w = np.array(w, dtype=float, copy=True)
    L = np.asarray(L, dtype=float)

    sign = 1.0 if t >= 0 else -1.0
    total = abs(t)
    n_full = int(total / h)
    tail = total - n_full * h

    def deriv(r_c, w_c):
        dE_dr, dE_dw = state.energy_partials(r_c, w_c, L)
        elam = np.exp(-np.asarray(state.lam(r_c)))
        return sign * elam * dE_dw, -sign * elam * dE_dr

    def rk4_step(r_c, w_c, dt):
        k1r, k1w = deriv(r_c, w_c)
        k2r, k2w = deriv(r_c + 0.5 * dt * k1r, w_c + 0.5 * dt * k1w)
        k3r, k3w = deriv(r_c + 0.5 * dt * k2r, w_c + 0.5 * dt * k2w)
        k4r, k4w = deriv(r_c + dt * k3r, w_c + dt * k3w)
        r_n = r_c + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        w_n = w_c + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        if np.any(r_n <= 0):
            raise StepSizeError("flow step crossed r = 0; reduce the step size")
        return r_n, w_n

    for _ in range(n_full):
        r, w = rk4_step(r, w, h)
    if tail > 1e-12 * h:
        r, w = rk4_step(r, w, tail)
    return r, w


def relativistic_flow(state, z0, t, h):
    """Scalar convenience wrapper around relativistic_flow_points."""
    r, w, L = z0
    r_t, w_t = relativistic_flow_points(
        state, np.array([r]), np.array([w]), np.array([L]), t, h
    )
    return float(r_t[0]), float(w_t[0]), L


def relativistic_flow_norm_defect(state, f, t, spec=None, n_steps=4000):
    """Relative defect of ||f . flow_t|| = ||f|| in the weighted product.

    RK4 is not exactly volume preserving, so unlike the Newtonian case
    the defect here also carries an O(h^4) transport error.
    """
    window = f.box[2] if f.box is not None else None
    r, w, L, wt = relativistic_region_nodes(state, spec, l_window=window)
    E = state.energy(r, w, L)
    weight = state.ansatz.weight(np.minimum(E, state.E0 * (1.0 - 1e-14)))

    base_sq = float(np.sum(wt * f(r, w, L) ** 2 * weight))

    if f.box is not None:
        l_lo, l_hi = f.box[2]
        mask = (L > l_lo) & (L < l_hi) & (wt != 0.0)
    else:
        mask = np.ones(L.shape, dtype=bool)

    h = abs(t) / n_steps
    r_t, w_t = relativistic_flow_points(state, r[mask], w[mask], L[mask], t, h)
    vals = np.zeros_like(r)
    vals[mask] = f(r_t, w_t, L[mask])
    moved_sq = float(np.sum(wt * vals**2 * weight))

    base = math.sqrt(max(base_sq, 0.0))
    moved = math.sqrt(max(moved_sq, 0.0))
    return abs(moved - base) / base
