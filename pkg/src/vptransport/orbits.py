"""Characteristic flow in the reduced (r, w) plane at fixed L.

Stoermer-Verlet (kick-drift-kick) with a fixed step: symplectic, so the
numerical flow preserves phase-space area exactly and the energy error
stays bounded and oscillatory instead of drifting.
"""

import math
from dataclasses import dataclass

import numpy as np

from .effective_potential import turning_points
from .errors import DomainError, StepSizeError
from .numerics import bisect_root


@dataclass(frozen=True)
class OrbitState:
    """Point of the reduced phase space with its conserved energy."""

    r: float
    w: float
    L: float
    energy: float


def orbit_state(state, r, w, L):
    energy = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    return OrbitState(r=float(r), w=float(w), L=float(L), energy=float(energy))


def _acceleration(state, r, L):
    return (L / r - state.mass_within(r)) / r**2


def flow_points(state, r, w, L, t, h):
    """Advance arrays of initial conditions by time t with fixed step h.

    The final partial step completes t exactly.  Negative t integrates
    backward.  Returns (r, w) arrays of the same shape as the inputs.
    """
    if h <= 0:
        raise DomainError("step size must be positive")
    r = np.array(r, dtype=float, copy=True)
    w = np.array(w, dtype=float, copy=True)
    L = np.asarray(L, dtype=float)
    if t == 0:
        return r, w
    direction = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    n_full = int(remaining / h)
    steps = [h] * n_full
    tail = remaining - n_full * h
    if tail > 1e-12 * h:
        steps.append(tail)
    for s in steps:
        dt = direction * s
        w += 0.5 * dt * _acceleration(state, r, L)
        r += dt * w
        if np.any(r <= 0):
            raise StepSizeError("orbit step crossed r = 0; reduce the step size")
        w += 0.5 * dt * _acceleration(state, r, L)
    return r, w


def flow(state, z0, t, h):
    """Flow map applied to a single OrbitState."""
    r, w = flow_points(state, z0.r, z0.w, z0.L, t, h)
    return orbit_state(state, float(r), float(w), z0.L)


def orbit_trajectory(state, z0, t, h, record_every=1):
    """Sampled trajectory from an (r, w, L) triple over [0, t].

    Returns (times, r, w) arrays."""
    if h <= 0 or t <= 0:
        raise DomainError("trajectory sampling needs t > 0 and h > 0")
    n = int(math.ceil(t / h))
    mass = state.mass_scalar
    r, w, L = z0
    times = [0.0]
    rs = [r]
    ws = [w]
    a = (L / r - mass(r)) / r**2
    for i in range(1, n + 1):
        dt = min(h, t - (i - 1) * h)
        w_half = w + 0.5 * dt * a
        r = r + dt * w_half
        if r <= 0:
            raise StepSizeError("orbit step crossed r = 0; reduce the step size")
        a = (L / r - mass(r)) / r**2
        w = w_half + 0.5 * dt * a
        if i % record_every == 0 or i == n:
            times.append(min(i * h, t))
            rs.append(r)
            ws.append(w)
    return np.asarray(times), np.asarray(rs), np.asarray(ws)


def _hermite_zero_crossing(w0, w1, a0, a1, dt):
    """Root of the cubic Hermite model of w(t) on a step with a sign change."""

    def model(theta):
        h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
        h10 = theta * (1.0 - theta) ** 2
        h01 = theta**2 * (3.0 - 2.0 * theta)
        h11 = theta**2 * (theta - 1.0)
        return h00 * w0 + h01 * w1 + dt * (h10 * a0 + h11 * a1)

    return float(bisect_root(model, 0.0, 1.0, iters=70))


def _interp_radius(r0, r1, w0, w1, theta, dt):
    """Cubic Hermite radius at fraction theta of the step (w = dr/dt)."""
    h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
    h10 = theta * (1.0 - theta) ** 2
    h01 = theta**2 * (3.0 - 2.0 * theta)
    h11 = theta**2 * (theta - 1.0)
    return h00 * r0 + h01 * r1 + dt * (h10 * w0 + h11 * w1)


def epicyclic_period(state, L):
    """Small-oscillation period at the circular orbit: a cheap, conservative
    step-size scale (it underestimates anharmonic periods here)."""
    from .effective_potential import circular_orbit_radius

    r_c = circular_orbit_radius(state, L)
    curvature = (4.0 * math.pi * state.density(r_c) * r_c**2 + L / r_c**2) / r_c**2
    return 2.0 * math.pi / math.sqrt(curvature)


def _period_once(state, E, L, r_start, h, t_max):
    """One leapfrog pass: event-refined full return to w = 0 near r_minus.

    Returns (period, inner radius at return, outer radius at first apsis).
    """
    mass = state.mass_scalar
    r, w = r_start, 0.0
    a = (L / r - mass(r)) / r**2
    crossings = 0
    r_outer = r_start
    t = 0.0
    max_steps = int(math.ceil(t_max / h)) + 2
    for _ in range(max_steps):
        r0, w0, a0 = r, w, a
        w_half = w + 0.5 * h * a
        r = r + h * w_half
        if r <= 0:
            raise StepSizeError("orbit step crossed r = 0; reduce the step size")
        a = (L / r - mass(r)) / r**2
        w = w_half + 0.5 * h * a
        t += h
        if w0 > 0.0 and w <= 0.0:
            # apsis at r_plus: refine the radius only
            theta = _hermite_zero_crossing(w0, w, a0, a, h)
            r_outer = _interp_radius(r0, r, w0, w, theta, h)
            crossings += 1
        elif w0 < 0.0 and w >= 0.0:
            theta = _hermite_zero_crossing(w0, w, a0, a, h)
            period = t - h + theta * h
            r_inner = _interp_radius(r0, r, w0, w, theta, h)
            return period, r_inner, r_outer
    raise StepSizeError("no full radial return detected within the time budget")


def radial_period_from_orbit(
    state, E, L, steps_per_period=2000, *, richardson=True, return_extremes=False
):
    """Radial period by direct orbit integration from (r_minus, 0).

    The step is the epicyclic period over steps_per_period.  With
    richardson=True the event-refined return times at h and h/2 are
    combined, (4 T_{h/2} - T_h)/3, removing the O(h^2) bias of the
    modified dynamics.
    """
    tp = turning_points(state, E, L)
    h = epicyclic_period(state, L) / steps_per_period
    t_max = 4.0 * radial_period_bound_newtonian(state.M0, E, L)
    T_h, r_in, r_out = _period_once(state, E, L, tp.r_minus, h, t_max)
    if richardson:
        T_h2, r_in2, r_out2 = _period_once(state, E, L, tp.r_minus, 0.5 * h, t_max)
        T = (4.0 * T_h2 - T_h) / 3.0
        r_in = (4.0 * r_in2 - r_in) / 3.0
        r_out = (4.0 * r_out2 - r_out) / 3.0
    else:
        T = T_h
    if return_extremes:
        return T, r_in, r_out
    return T


def radial_period_bound_newtonian(M0, E, L):
    """2 pi M0^2 / (E^2 sqrt(L)), the closed-form period majorant."""
    E_arr = np.asarray(E, dtype=float)
    L_arr = np.asarray(L, dtype=float)
    if np.any(E_arr >= 0) or np.any(L_arr <= 0):
        raise DomainError("period bound needs E < 0 and L > 0")
    out = 2.0 * math.pi * M0**2 / (E_arr**2 * np.sqrt(L_arr))
    return out if out.ndim else float(out)


def energy_drift_over_periods(state, E, L, n_periods=100, steps_per_period=2000):
    """Relative energy defect at the event-refined return after n_periods
    full radial oscillations (where the oscillatory leapfrog error cancels)."""
    tp = turning_points(state, E, L)
    h = epicyclic_period(state, L) / steps_per_period
    t_max = 4.0 * n_periods * radial_period_bound_newtonian(state.M0, E, L)
    mass = state.mass_scalar
    r, w = tp.r_minus, 0.0
    E_start = 0.5 * w**2 + L / (2.0 * r**2) + state.potential(r)
    a = (L / r - mass(r)) / r**2
    t = 0.0
    returns = 0
    max_steps = int(math.ceil(t_max / h)) + 2
    for _ in range(max_steps):
        r0, w0, a0 = r, w, a
        w_half = w + 0.5 * h * a
        r = r + h * w_half
        if r <= 0:
            raise StepSizeError("orbit step crossed r = 0; reduce the step size")
        a = (L / r - mass(r)) / r**2
        w = w_half + 0.5 * h * a
        t += h
        if w0 < 0.0 and w >= 0.0:
            returns += 1
            if returns == n_periods:
                theta = _hermite_zero_crossing(w0, w, a0, a, h)
                r_ret = _interp_radius(r0, r, w0, w, theta, h)
                w_ret = 0.0
                E_end = (
                    0.5 * w_ret**2 + L / (2.0 * r_ret**2) + state.potential(r_ret)
                )
                return abs(E_end - E_start) / abs(E_start)
    raise StepSizeError("orbit did not complete the requested returns")


def flow_map_area_defect(state, z0, t, h, fd_eps=1e-6):
    """|det D(flow map) - 1| at z0 by central differences in (r, w).

    The leapfrog map is symplectic, so the determinant is 1 up to the
    finite-difference error of the Jacobian.  z0 is an (r, w, L) triple.
    """
    r0, w0, L = z0
    r_init = np.array([r0 + fd_eps, r0 - fd_eps, r0, r0])
    w_init = np.array([w0, w0, w0 + fd_eps, w0 - fd_eps])
    L_init = np.full(4, L)
    r_out, w_out = flow_points(state, r_init, w_init, L_init, t, h)
    d_rr = (r_out[0] - r_out[1]) / (2.0 * fd_eps)
    d_wr = (w_out[0] - w_out[1]) / (2.0 * fd_eps)
    d_rw = (r_out[2] - r_out[3]) / (2.0 * fd_eps)
    d_ww = (w_out[2] - w_out[3]) / (2.0 * fd_eps)
    return abs(d_rr * d_ww - d_rw * d_wr - 1.0)
